"""YAML configuration loading and validation.

A configuration document has three top-level sections:

- ``basin``: reservoirs, plants, demand sites, inflow sources, topology
- ``env``: episode horizon, discounting, initial storages, objective knobs
- ``emodps``: optimizer settings (optional, defaults apply)

Lookup order for the document itself: explicit path argument, then the
NILE_MOMDP_CONFIG environment variable, then the packaged default basin.
All numeric fields are coerced with float()/int() so YAML strings such as
"6e8" (a string under YAML 1.1 rules) still parse.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Mapping, Optional

import yaml

from .basin import (BasinConfig, DemandSite, HydroPlantSpec, InflowModel,
                    ReservoirSpec, TopologyNode)
from .errors import ConfigurationError

ENV_CONFIG_VAR = "NILE_MOMDP_CONFIG"
DEFAULT_CONFIG_RESOURCE = "default_basin.yaml"


def _as_float(value: Any, where: str) -> float:
    try:
        result = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{where}: expected a number, got {value!r}") from None
    if result != result:  # NaN
        raise ConfigurationError(f"{where}: NaN is not a valid value")
    return result


def _as_int(value: Any, where: str) -> int:
    result = _as_float(value, where)
    if result != int(result):
        raise ConfigurationError(f"{where}: expected an integer, got {value!r}")
    return int(result)


def _as_float_tuple(value: Any, where: str) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)):
        raise ConfigurationError(f"{where}: expected a list of numbers")
    return tuple(_as_float(v, f"{where}[{i}]") for i, v in enumerate(value))


def _as_str(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise ConfigurationError(f"{where}: expected a non-empty string")
    return value


def _as_mapping(value: Any, where: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise ConfigurationError(f"{where}: expected a mapping")
    return value


def _check_keys(mapping: Mapping[str, Any], allowed: set[str], required: set[str],
                where: str) -> None:
    keys = set(mapping)
    unknown = keys - allowed
    if unknown:
        raise ConfigurationError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - keys
    if missing:
        raise ConfigurationError(f"{where}: missing required keys {sorted(missing)}")


@dataclass(frozen=True)
class EnvConfig:
    """Episode-level settings; initial storages follow reservoir topology order."""

    horizon: int
    gamma: float
    initial_storages: tuple[float, ...]
    min_power_level_had: float
    deficit_power: float

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("env.horizon must be >= 1")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigurationError("env.gamma must be in (0, 1]")
        if self.deficit_power <= 0.0:
            raise ConfigurationError("env.deficit_power must be > 0")


@dataclass(frozen=True)
class MoeaConfig:
    """Optimizer settings: population size, evaluation budget, operator knobs."""

    n_rbf: int = 6
    pop: int = 100
    nfe: int = 20000
    eta_c: float = 15.0
    eta_m: float = 20.0

    def __post_init__(self):
        if self.n_rbf < 1:
            raise ConfigurationError("emodps.n_rbf must be >= 1")
        if self.pop < 4 or self.pop % 2 != 0:
            raise ConfigurationError("emodps.pop must be an even number >= 4")
        if self.nfe < self.pop:
            raise ConfigurationError("emodps.nfe must be at least the population size")
        if self.eta_c <= 0.0 or self.eta_m <= 0.0:
            raise ConfigurationError("emodps.eta_c and emodps.eta_m must be > 0")


@dataclass(frozen=True)
class FullConfig:
    basin: BasinConfig
    env: EnvConfig
    moea: MoeaConfig
    source: str = field(default="<inline>", compare=False)


def build_basin_config(section: Any) -> BasinConfig:
    doc = _as_mapping(section, "basin")
    _check_keys(doc, {"reservoirs", "plants", "demands", "inflows", "topology"},
                {"reservoirs", "demands", "inflows", "topology"}, "basin")

    reservoirs = []
    for i, raw in enumerate(doc["reservoirs"]):
        where = f"basin.reservoirs[{i}]"
        item = _as_mapping(raw, where)
        _check_keys(item, {"name", "capacity", "dead_storage", "level_storage_table",
                           "max_release", "evap_rate_by_month"},
                    {"name", "capacity", "dead_storage", "level_storage_table",
                     "max_release", "evap_rate_by_month"}, where)
        table_raw = item["level_storage_table"]
        if not isinstance(table_raw, (list, tuple)):
            raise ConfigurationError(f"{where}.level_storage_table: expected a list of rows")
        table = []
        for j, row in enumerate(table_raw):
            cells = _as_float_tuple(row, f"{where}.level_storage_table[{j}]")
            if len(cells) != 3:
                raise ConfigurationError(
                    f"{where}.level_storage_table[{j}]: expected [storage, level, area]")
            table.append((cells[0], cells[1], cells[2]))
        reservoirs.append(ReservoirSpec(
            name=_as_str(item["name"], f"{where}.name"),
            capacity=_as_float(item["capacity"], f"{where}.capacity"),
            dead_storage=_as_float(item["dead_storage"], f"{where}.dead_storage"),
            level_storage_table=tuple(table),
            max_release=_as_float(item["max_release"], f"{where}.max_release"),
            evap_rate_by_month=_as_float_tuple(item["evap_rate_by_month"],
                                               f"{where}.evap_rate_by_month"),
        ))

    plants = []
    for i, raw in enumerate(doc.get("plants", []) or []):
        where = f"basin.plants[{i}]"
        item = _as_mapping(raw, where)
        _check_keys(item, {"name", "reservoir", "efficiency", "installed_capacity",
                           "turbine_max_flow", "tailwater_level"},
                    {"name", "reservoir", "efficiency", "installed_capacity",
                     "turbine_max_flow", "tailwater_level"}, where)
        plants.append(HydroPlantSpec(
            name=_as_str(item["name"], f"{where}.name"),
            reservoir=_as_str(item["reservoir"], f"{where}.reservoir"),
            efficiency=_as_float(item["efficiency"], f"{where}.efficiency"),
            installed_capacity=_as_float(item["installed_capacity"],
                                         f"{where}.installed_capacity"),
            turbine_max_flow=_as_float(item["turbine_max_flow"], f"{where}.turbine_max_flow"),
            tailwater_level=_as_float(item["tailwater_level"], f"{where}.tailwater_level"),
        ))

    demands = []
    for i, raw in enumerate(doc["demands"]):
        where = f"basin.demands[{i}]"
        item = _as_mapping(raw, where)
        _check_keys(item, {"name", "monthly_demand"}, {"name", "monthly_demand"}, where)
        demands.append(DemandSite(
            name=_as_str(item["name"], f"{where}.name"),
            monthly_demand=_as_float_tuple(item["monthly_demand"], f"{where}.monthly_demand"),
        ))

    inflows = []
    for i, raw in enumerate(doc["inflows"]):
        where = f"basin.inflows[{i}]"
        item = _as_mapping(raw, where)
        _check_keys(item, {"name", "monthly_mean", "monthly_cv", "mode", "trace"},
                    {"name", "monthly_mean", "monthly_cv"}, where)
        trace = item.get("trace")
        inflows.append(InflowModel(
            name=_as_str(item["name"], f"{where}.name"),
            monthly_mean=_as_float_tuple(item["monthly_mean"], f"{where}.monthly_mean"),
            monthly_cv=_as_float_tuple(item["monthly_cv"], f"{where}.monthly_cv"),
            mode=_as_str(item.get("mode", "stochastic-lognormal"), f"{where}.mode"),
            trace=None if trace is None else _as_float_tuple(trace, f"{where}.trace"),
        ))

    topology = []
    for i, raw in enumerate(doc["topology"]):
        where = f"basin.topology[{i}]"
        item = _as_mapping(raw, where)
        _check_keys(item, {"name", "kind", "downstream"}, {"name", "kind"}, where)
        downstream = item.get("downstream")
        topology.append(TopologyNode(
            name=_as_str(item["name"], f"{where}.name"),
            kind=_as_str(item["kind"], f"{where}.kind"),
            downstream=None if downstream is None else _as_str(downstream,
                                                               f"{where}.downstream"),
        ))

    return BasinConfig(reservoirs=tuple(reservoirs), plants=tuple(plants),
                       demands=tuple(demands), inflows=tuple(inflows),
                       topology=tuple(topology))


def build_env_config(section: Any, basin: BasinConfig) -> EnvConfig:
    doc = _as_mapping(section, "env")
    _check_keys(doc, {"horizon", "gamma", "initial_storages", "min_power_level_had",
                      "deficit_power"},
                {"initial_storages", "min_power_level_had"}, "env")

    storages_doc = _as_mapping(doc["initial_storages"], "env.initial_storages")
    order = basin.reservoir_order()
    if set(storages_doc) != set(order):
        raise ConfigurationError(
            f"env.initial_storages must name every reservoir exactly once; "
            f"expected {sorted(order)}, got {sorted(storages_doc)}")
    specs = {r.name: r for r in basin.reservoirs}
    storages = []
    for name in order:
        value = _as_float(storages_doc[name], f"env.initial_storages.{name}")
        if not 0.0 <= value <= specs[name].capacity:
            raise ConfigurationError(
                f"env.initial_storages.{name} must be within [0, capacity]")
        storages.append(value)

    return EnvConfig(
        horizon=_as_int(doc.get("horizon", 240), "env.horizon"),
        gamma=_as_float(doc.get("gamma", 1.0), "env.gamma"),
        initial_storages=tuple(storages),
        min_power_level_had=_as_float(doc["min_power_level_had"], "env.min_power_level_had"),
        deficit_power=_as_float(doc.get("deficit_power", 1.0), "env.deficit_power"),
    )


def build_moea_config(section: Any) -> MoeaConfig:
    if section is None:
        return MoeaConfig()
    doc = _as_mapping(section, "emodps")
    _check_keys(doc, {"n_rbf", "pop", "nfe", "eta_c", "eta_m"}, set(), "emodps")
    defaults = MoeaConfig()
    return MoeaConfig(
        n_rbf=_as_int(doc.get("n_rbf", defaults.n_rbf), "emodps.n_rbf"),
        pop=_as_int(doc.get("pop", defaults.pop), "emodps.pop"),
        nfe=_as_int(doc.get("nfe", defaults.nfe), "emodps.nfe"),
        eta_c=_as_float(doc.get("eta_c", defaults.eta_c), "emodps.eta_c"),
        eta_m=_as_float(doc.get("eta_m", defaults.eta_m), "emodps.eta_m"),
    )


def parse_config(document: Any, source: str = "<inline>") -> FullConfig:
    doc = _as_mapping(document, "configuration")
    _check_keys(doc, {"basin", "env", "emodps"}, {"basin", "env"}, "configuration")
    basin = build_basin_config(doc["basin"])
    env = build_env_config(doc["env"], basin)
    moea = build_moea_config(doc.get("emodps"))
    return FullConfig(basin=basin, env=env, moea=moea, source=source)


def default_config_text() -> str:
    return resources.files("nile_momdp").joinpath(
        "data", DEFAULT_CONFIG_RESOURCE).read_text(encoding="utf-8")


def resolve_config_path(path: Optional[str] = None) -> Optional[str]:
    """Explicit path wins, then $NILE_MOMDP_CONFIG; None means packaged default."""
    if path is not None:
        return path
    env_path = os.environ.get(ENV_CONFIG_VAR)
    if env_path:
        return env_path
    return None


def load_config(path: Optional[str] = None) -> FullConfig:
    resolved = resolve_config_path(path)
    if resolved is None:
        text = default_config_text()
        source = f"<packaged {DEFAULT_CONFIG_RESOURCE}>"
    else:
        try:
            with open(resolved, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise ConfigurationError(f"cannot read configuration {resolved!r}: {exc}") from exc
        source = resolved
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"invalid YAML in {source}: {exc}") from exc
    return parse_config(document, source=source)
