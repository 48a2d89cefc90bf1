"""Monthly water-balance core for a multi-reservoir river cascade.

Physical conventions used throughout:

- storage and monthly fluxes are volumes in m^3; instantaneous flows are m^3/s
- a month is the physical number of seconds of that calendar month in a
  non-leap year (episodes start in January)
- evaporation is a monthly depth rate (m/month) times the interpolated
  reservoir surface area, applied after inflow and release within the month
- releases are clamped so a reservoir is never drawn below its dead storage;
  evaporation may still take storage below dead storage (but never below 0)
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError

DAYS_PER_MONTH = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)
SECONDS_PER_MONTH = tuple(float(d) * 86400.0 for d in DAYS_PER_MONTH)

WATER_DENSITY = 1000.0  # kg/m^3
GRAVITY = 9.81          # m/s^2

NODE_KINDS = ("inflow", "reservoir", "demand", "confluence")


def month_of_step(t: int) -> int:
    """Calendar month (1..12) of episode step t; step 0 is January."""
    return t % 12 + 1


def seconds_in_month(month: int) -> float:
    return SECONDS_PER_MONTH[month - 1]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigurationError(message)


@dataclass(frozen=True)
class ReservoirSpec:
    """Static description of a dam: geometry, outlet capacity, evaporation.

    level_storage_table holds (storage m^3, level m, surface area m^2) knots,
    strictly increasing in every column; level and area at intermediate
    storages are piecewise-linear, clamped to the end knots outside the range.
    """

    name: str
    capacity: float
    dead_storage: float
    level_storage_table: tuple[tuple[float, float, float], ...]
    max_release: float  # m^3/s
    evap_rate_by_month: tuple[float, ...]  # m/month, 12 entries

    # interpolation columns, derived once at construction
    _storages: tuple[float, ...] = field(init=False, repr=False, compare=False)
    _levels: tuple[float, ...] = field(init=False, repr=False, compare=False)
    _areas: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _require(self.dead_storage >= 0.0, f"{self.name}: dead_storage must be >= 0")
        _require(self.capacity > self.dead_storage,
                 f"{self.name}: capacity must exceed dead_storage")
        _require(self.max_release > 0.0, f"{self.name}: max_release must be > 0")
        _require(len(self.evap_rate_by_month) == 12,
                 f"{self.name}: evap_rate_by_month needs 12 entries")
        _require(all(r >= 0.0 for r in self.evap_rate_by_month),
                 f"{self.name}: evaporation rates must be >= 0")
        table = self.level_storage_table
        _require(len(table) >= 2, f"{self.name}: level_storage_table needs at least 2 knots")
        for col in range(3):
            values = [knot[col] for knot in table]
            _require(all(a < b for a, b in zip(values, values[1:])),
                     f"{self.name}: level_storage_table column {col} must be strictly increasing")
        object.__setattr__(self, "_storages", tuple(k[0] for k in table))
        object.__setattr__(self, "_levels", tuple(k[1] for k in table))
        object.__setattr__(self, "_areas", tuple(k[2] for k in table))


@dataclass(frozen=True)
class ReservoirState:
    """Evolving state of one reservoir: stored volume in m^3."""

    storage: float


@dataclass(frozen=True)
class HydroPlantSpec:
    """Hydropower plant attached to a reservoir (by name)."""

    name: str
    reservoir: str
    efficiency: float          # dimensionless, (0, 1]
    installed_capacity: float  # W
    turbine_max_flow: float    # m^3/s
    tailwater_level: float     # m

    def __post_init__(self):
        _require(0.0 < self.efficiency <= 1.0, f"{self.name}: efficiency must be in (0, 1]")
        _require(self.installed_capacity > 0.0, f"{self.name}: installed_capacity must be > 0")
        _require(self.turbine_max_flow > 0.0, f"{self.name}: turbine_max_flow must be > 0")


@dataclass(frozen=True)
class DemandSite:
    """Consumptive water demand with a 12-month pattern (m^3/month)."""

    name: str
    monthly_demand: tuple[float, ...]

    def __post_init__(self):
        _require(len(self.monthly_demand) == 12, f"{self.name}: monthly_demand needs 12 entries")
        _require(all(d >= 0.0 for d in self.monthly_demand),
                 f"{self.name}: demands must be >= 0")


@dataclass(frozen=True)
class InflowModel:
    """Boundary inflow at a source node.

    Two modes: "deterministic-trace" replays `trace` (m^3/s per step; when no
    trace is given the 12 monthly means are cycled), "stochastic-lognormal"
    draws each month from a lognormal with the configured mean and coefficient
    of variation. A cv of 0 degenerates to the mean exactly.
    """

    name: str
    monthly_mean: tuple[float, ...]  # m^3/s
    monthly_cv: tuple[float, ...]
    mode: str = "stochastic-lognormal"
    trace: Optional[tuple[float, ...]] = None  # m^3/s per month step

    def __post_init__(self):
        _require(len(self.monthly_mean) == 12, f"{self.name}: monthly_mean needs 12 entries")
        _require(len(self.monthly_cv) == 12, f"{self.name}: monthly_cv needs 12 entries")
        _require(all(m > 0.0 for m in self.monthly_mean),
                 f"{self.name}: monthly means must be > 0")
        _require(all(c >= 0.0 for c in self.monthly_cv),
                 f"{self.name}: coefficients of variation must be >= 0")
        _require(self.mode in ("deterministic-trace", "stochastic-lognormal"),
                 f"{self.name}: unknown inflow mode {self.mode!r}")


@dataclass(frozen=True)
class TopologyNode:
    """One routed node; `downstream` is None only for the basin sink."""

    name: str
    kind: str
    downstream: Optional[str] = None

    def __post_init__(self):
        _require(self.kind in NODE_KINDS,
                 f"{self.name}: node kind must be one of {NODE_KINDS}, got {self.kind!r}")


@dataclass(frozen=True)
class BasinConfig:
    """A validated basin: component specs plus the routed topology.

    The topology list must already be in topological order (each node's
    downstream appears later in the list), contain exactly one sink, and
    reference every reservoir/demand/inflow spec exactly once.
    """

    reservoirs: tuple[ReservoirSpec, ...]
    plants: tuple[HydroPlantSpec, ...]
    demands: tuple[DemandSite, ...]
    inflows: tuple[InflowModel, ...]
    topology: tuple[TopologyNode, ...]

    def __post_init__(self):
        names = [n.name for n in self.topology]
        _require(len(set(names)) == len(names), "topology node names must be unique")
        index = {name: i for i, name in enumerate(names)}

        sinks = [n for n in self.topology if n.downstream is None]
        _require(len(sinks) == 1, f"topology must have exactly one sink, found {len(sinks)}")
        for i, node in enumerate(self.topology):
            if node.downstream is not None:
                _require(node.downstream in index,
                         f"{node.name}: downstream {node.downstream!r} is not a topology node")
                _require(index[node.downstream] > i,
                         f"{node.name}: topology must be listed in topological order "
                         f"(downstream {node.downstream!r} appears earlier)")

        by_kind = {kind: [n.name for n in self.topology if n.kind == kind] for kind in NODE_KINDS}
        for kind, specs in (("reservoir", self.reservoirs),
                            ("demand", self.demands),
                            ("inflow", self.inflows)):
            spec_names = [s.name for s in specs]
            _require(sorted(by_kind[kind]) == sorted(spec_names),
                     f"{kind} nodes {sorted(by_kind[kind])} must match specs {sorted(spec_names)}")
        _require(sinks[0].kind != "reservoir", "a reservoir cannot be the basin sink")
        _require(sinks[0].kind != "inflow", "an inflow source cannot be the basin sink")

        reservoir_names = {r.name for r in self.reservoirs}
        plant_names = [p.name for p in self.plants]
        _require(len(set(plant_names)) == len(plant_names), "plant names must be unique")
        for plant in self.plants:
            _require(plant.reservoir in reservoir_names,
                     f"{plant.name}: unknown reservoir {plant.reservoir!r}")

    def reservoir_order(self) -> tuple[str, ...]:
        """Reservoir names in topology order (the action/observation order)."""
        return tuple(n.name for n in self.topology if n.kind == "reservoir")

    def inflow_order(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.topology if n.kind == "inflow")

    def demand_order(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.topology if n.kind == "demand")


def level_area_from_storage(spec: ReservoirSpec, storage: float) -> tuple[float, float]:
    """Interpolate (level m, surface area m^2) from storage.

    Piecewise linear between the spec's knots, clamped to the first/last knot
    outside the tabulated storage range.
    """
    xs = spec._storages
    if storage <= xs[0]:
        return spec._levels[0], spec._areas[0]
    if storage >= xs[-1]:
        return spec._levels[-1], spec._areas[-1]
    i = bisect_right(xs, storage)
    x0, x1 = xs[i - 1], xs[i]
    f = (storage - x0) / (x1 - x0)
    level = spec._levels[i - 1] + f * (spec._levels[i] - spec._levels[i - 1])
    area = spec._areas[i - 1] + f * (spec._areas[i] - spec._areas[i - 1])
    return level, area


def feasible_release(spec: ReservoirSpec, state: ReservoirState,
                     requested: float, dt: float) -> float:
    """Clamp a requested monthly release (m^3) to what the dam can deliver.

    The release is limited by outlet capacity over the month and by the
    storage above dead storage; a reservoir at or below dead storage
    releases nothing. Total function, never raises.
    """
    available = state.storage - spec.dead_storage
    if available <= 0.0:
        return 0.0
    return min(max(requested, 0.0), spec.max_release * dt, available)


def reservoir_step(spec: ReservoirSpec, state: ReservoirState, inflow: float,
                   release: float, month: int) -> tuple[ReservoirState, float, float]:
    """Advance one reservoir by one month; returns (state', outflow, evap).

    Within the month: inflow is added, the (already feasibility-clamped)
    release is taken, then evaporation is drawn on the surface area of the
    resulting storage, truncated so storage never goes negative. Storage
    above capacity spills into the outflow. The balance
    s' - s = inflow - outflow - evap holds by construction.
    """
    s1 = state.storage + inflow - release
    _, area = level_area_from_storage(spec, s1 if s1 > 0.0 else 0.0)
    evap = spec.evap_rate_by_month[month - 1] * area
    if evap > s1:
        evap = s1 if s1 > 0.0 else 0.0
    s2 = s1 - evap
    if s2 > spec.capacity:
        spill = s2 - spec.capacity
        new_storage = s2 - spill
    else:
        spill = 0.0
        new_storage = s2
    return ReservoirState(new_storage), release + spill, evap


def hydropower_energy(plant: HydroPlantSpec, flow: float, head: float, dt: float) -> float:
    """Energy (J) produced by turbining `flow` (m^3/s) under `head` (m) for dt seconds.

    Power is efficiency * rho * g * q * head with q capped at the turbine
    design flow, and the whole product capped at installed capacity.
    """
    q = flow if flow < plant.turbine_max_flow else plant.turbine_max_flow
    power = plant.efficiency * WATER_DENSITY * GRAVITY * q * head
    if power > plant.installed_capacity:
        power = plant.installed_capacity
    return power * dt


def generate_inflows(model: InflowModel, horizon: int, seed) -> np.ndarray:
    """Monthly inflow volumes (m^3) for `horizon` steps starting in January.

    Deterministic-trace mode replays the stored trace (or cycles the monthly
    means when no trace is present); stochastic mode draws lognormal samples
    with the configured per-month mean and cv. The same seed always yields a
    bit-identical sequence.
    """
    if horizon < 1:
        raise ConfigurationError("inflow horizon must be >= 1")
    months = np.array([month_of_step(t) for t in range(horizon)])
    seconds = np.array(SECONDS_PER_MONTH)[months - 1]

    if model.mode == "deterministic-trace":
        if model.trace is not None:
            if len(model.trace) < horizon:
                raise ConfigurationError(
                    f"{model.name}: trace has {len(model.trace)} entries, "
                    f"horizon needs {horizon}")
            flows = np.array(model.trace[:horizon], dtype=float)
        else:
            flows = np.array(model.monthly_mean, dtype=float)[months - 1]
        return flows * seconds

    means = np.array(model.monthly_mean, dtype=float)[months - 1]
    cvs = np.array(model.monthly_cv, dtype=float)[months - 1]
    # lognormal with E[X] = mean and sd = cv * mean; cv == 0 gives the mean exactly
    sigma = np.sqrt(np.log1p(cvs * cvs))
    z = np.random.default_rng(seed).standard_normal(horizon)
    flows = means * np.exp(sigma * z - 0.5 * sigma * sigma)
    return flows * seconds


@dataclass
class MonthlyRouting:
    """Fluxes of one routed month; reservoir/demand lists follow topology order."""

    month: int
    storages_before: list[float]
    storages_after: list[float]
    levels_after: list[float]
    releases: list[float]
    spills: list[float]
    evaporations: list[float]
    energies: list[float]       # J per reservoir (0 where no plant)
    supplies: list[float]       # per demand site
    deficits: list[float]
    inflow_total: float
    delivered_total: float
    evaporation_total: float
    sink_outflow: float


class Basin:
    """Routing engine over a validated BasinConfig.

    Routes one month at a time through the topology: inflow sources emit
    their volume, reservoirs apply the mass balance, demand sites take
    min(arriving, demand) and pass the remainder on, confluences sum. The
    single sink's outflow is the water leaving the system via the river;
    deliveries leave the system at their demand site.
    """

    def __init__(self, config: BasinConfig):
        self.config = config
        self.nodes = config.topology
        index = {n.name: i for i, n in enumerate(self.nodes)}
        self._down = [index[n.downstream] if n.downstream is not None else -1
                      for n in self.nodes]
        reservoirs = {r.name: r for r in config.reservoirs}
        demands = {d.name: d for d in config.demands}
        inflow_models = {m.name: m for m in config.inflows}
        plants = {p.reservoir: p for p in config.plants}

        # per-node resolved payloads, in topology order
        self._reservoir_specs = [reservoirs[n.name] for n in self.nodes if n.kind == "reservoir"]
        self._demand_specs = [demands[n.name] for n in self.nodes if n.kind == "demand"]
        self.inflow_models = [inflow_models[n.name] for n in self.nodes if n.kind == "inflow"]
        self._plant_by_reservoir = [plants.get(s.name) for s in self._reservoir_specs]

        # node -> (kind, position within its kind)
        self._kind_slots: list[tuple[str, int]] = []
        counters = {kind: 0 for kind in NODE_KINDS}
        for node in self.nodes:
            self._kind_slots.append((node.kind, counters[node.kind]))
            counters[node.kind] += 1

    @property
    def reservoir_specs(self) -> list[ReservoirSpec]:
        return list(self._reservoir_specs)

    @property
    def demand_specs(self) -> list[DemandSite]:
        return list(self._demand_specs)

    def plant_for(self, reservoir_name: str) -> Optional[HydroPlantSpec]:
        for spec, plant in zip(self._reservoir_specs, self._plant_by_reservoir):
            if spec.name == reservoir_name:
                return plant
        return None

    def route_month(self, storages: Sequence[float], requested_releases: Sequence[float],
                    source_volumes: Sequence[float], month: int) -> MonthlyRouting:
        """Route one month through the cascade.

        storages and requested_releases are per reservoir (topology order, m^3),
        source_volumes per inflow source (topology order, m^3 for this month).
        """
        dt = seconds_in_month(month)
        arriving = [0.0] * len(self.nodes)
        out = MonthlyRouting(
            month=month,
            storages_before=list(storages),
            storages_after=[0.0] * len(self._reservoir_specs),
            levels_after=[0.0] * len(self._reservoir_specs),
            releases=[0.0] * len(self._reservoir_specs),
            spills=[0.0] * len(self._reservoir_specs),
            evaporations=[0.0] * len(self._reservoir_specs),
            energies=[0.0] * len(self._reservoir_specs),
            supplies=[0.0] * len(self._demand_specs),
            deficits=[0.0] * len(self._demand_specs),
            inflow_total=0.0,
            delivered_total=0.0,
            evaporation_total=0.0,
            sink_outflow=0.0,
        )

        for i, node in enumerate(self.nodes):
            kind, slot = self._kind_slots[i]
            if kind == "inflow":
                flow_out = source_volumes[slot]
                out.inflow_total += flow_out
            elif kind == "reservoir":
                spec = self._reservoir_specs[slot]
                state = ReservoirState(storages[slot])
                release = feasible_release(spec, state, requested_releases[slot], dt)
                new_state, outflow, evap = reservoir_step(spec, state, arriving[i],
                                                          release, month)
                level, _ = level_area_from_storage(spec, new_state.storage)
                plant = self._plant_by_reservoir[slot]
                if plant is not None:
                    head = level - plant.tailwater_level
                    if head < 0.0:
                        head = 0.0
                    out.energies[slot] = hydropower_energy(plant, release / dt, head, dt)
                out.storages_after[slot] = new_state.storage
                out.levels_after[slot] = level
                out.releases[slot] = release
                out.spills[slot] = outflow - release
                out.evaporations[slot] = evap
                out.evaporation_total += evap
                flow_out = outflow
            elif kind == "demand":
                demand = self._demand_specs[slot].monthly_demand[month - 1]
                water = arriving[i]
                supply = water if water < demand else demand
                out.supplies[slot] = supply
                out.deficits[slot] = demand - supply
                out.delivered_total += supply
                flow_out = water - supply
            else:  # confluence
                flow_out = arriving[i]

            down = self._down[i]
            if down < 0:
                out.sink_outflow += flow_out
            else:
                arriving[down] += flow_out

        return out
