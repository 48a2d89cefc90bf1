"""The river cascade wrapped as a four-objective Markov decision process.

Observation (float vector, length = n_reservoirs + 1): each reservoir's
storage divided by its capacity, in topology order, then the calendar month
mapped to [0, 1] ((month - 1) / 11). Action (length = n_reservoirs): the
fraction of each dam's maximum monthly release to request, clipped to [0, 1].

Reward (length 4, all maximized, known bounds):

- ed: negative fractional supply deficit of the most downstream demand site,
  raised to ``deficit_power``; in [-1, 0]
- sd: the same for all remaining demand sites pooled; in [-1, 0]
- had: 1.0 when the most downstream reservoir ends the month at or above
  ``min_power_level_had``, else 0.0
- eh: hydropower energy from every plant not attached to that reservoir,
  divided by their joint installed capacity over a 31-day month; in [0, 1]

Episodes run a fixed horizon (``terminated`` is always False, ``truncated``
flips on the last step). Objectives of an episode are the per-step rewards
averaged with discounting: (1/H) * sum_t gamma^t r_t, which stays inside the
reward bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .basin import Basin, generate_inflows, month_of_step, seconds_in_month
from .config import EnvConfig, FullConfig
from .errors import ConfigurationError, UsageError

REWARD_NAMES = ("ed", "sd", "had", "eh")
SECONDS_31_DAYS = 31.0 * 86400.0


@dataclass
class EpisodeTotals:
    """Water accounting over the episode so far (all m^3)."""

    initial_storage: float = 0.0
    inflow: float = 0.0
    delivered: float = 0.0
    evaporated: float = 0.0
    sink_outflow: float = 0.0

    def closure_error(self, final_storage: float) -> float:
        """initial + inflow - delivered - evaporated - outflow - final; 0 if water is conserved."""
        return (self.initial_storage + self.inflow - self.delivered
                - self.evaporated - self.sink_outflow - final_storage)


class NileEnv:
    """Monthly multi-reservoir operation as a vector-reward MDP."""

    def __init__(self, config: FullConfig):
        self.basin = Basin(config.basin)
        self.env_config: EnvConfig = config.env
        self.config = config

        specs = self.basin.reservoir_specs
        if not specs:
            raise ConfigurationError("the basin needs at least one reservoir")
        if not self.basin.demand_specs:
            raise ConfigurationError("the basin needs at least one demand site")
        self._capacities = [s.capacity for s in specs]
        self._max_releases = [s.max_release for s in specs]
        self._had_slot = len(specs) - 1
        had_name = specs[self._had_slot].name

        demand_count = len(self.basin.demand_specs)
        self._ed_slot = demand_count - 1
        self._sd_slots = list(range(demand_count - 1))

        self._energy_slots = [i for i, spec in enumerate(specs)
                              if spec.name != had_name
                              and self.basin.plant_for(spec.name) is not None]
        installed = sum(self.basin.plant_for(specs[i].name).installed_capacity
                        for i in self._energy_slots)
        if installed <= 0.0:
            raise ConfigurationError(
                "no hydropower plant upstream of the most downstream reservoir; "
                "the energy objective would be identically zero")
        self._max_month_energy = installed * SECONDS_31_DAYS

        self.observation_dim = len(specs) + 1
        self.action_dim = len(specs)
        self.reward_dim = 4
        self.horizon = self.env_config.horizon

        self._storages: Optional[list[float]] = None
        self._inflow_volumes: Optional[list[np.ndarray]] = None
        self._t = 0
        self.totals = EpisodeTotals()

    # -- spaces ---------------------------------------------------------------

    def observation_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.zeros(self.observation_dim), np.ones(self.observation_dim))

    def action_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.zeros(self.action_dim), np.ones(self.action_dim))

    @staticmethod
    def reward_bounds() -> tuple[np.ndarray, np.ndarray]:
        return (np.array([-1.0, -1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0, 1.0]))

    # -- episode control ------------------------------------------------------

    def reset(self, seed: Optional[int] = None) -> tuple[np.ndarray, dict]:
        """Start a new episode; the seed fixes every inflow realization."""
        sources = np.random.SeedSequence(seed).spawn(len(self.basin.inflow_models))
        self._inflow_volumes = [
            generate_inflows(model, self.horizon, child)
            for model, child in zip(self.basin.inflow_models, sources)
        ]
        self._storages = list(self.env_config.initial_storages)
        self._t = 0
        self.totals = EpisodeTotals(initial_storage=float(sum(self._storages)))
        return self._observation(), {"month": month_of_step(0)}

    def step(self, action: Sequence[float]) -> tuple[np.ndarray, np.ndarray, bool, bool, dict]:
        """Advance one month; returns (obs, reward, terminated, truncated, info)."""
        if self._storages is None:
            raise UsageError("step() before reset()")
        if self._t >= self.horizon:
            raise UsageError("episode is over; call reset()")
        action = np.asarray(action, dtype=float)
        if action.shape != (self.action_dim,):
            raise UsageError(f"action must have shape ({self.action_dim},), "
                             f"got {action.shape}")
        if not np.all(np.isfinite(action)):
            raise UsageError("action values must be finite")

        t = self._t
        month = month_of_step(t)
        dt = seconds_in_month(month)
        requested = [min(max(float(a), 0.0), 1.0) * mr * dt
                     for a, mr in zip(action, self._max_releases)]
        source_volumes = [float(vol[t]) for vol in self._inflow_volumes]

        routing = self.basin.route_month(self._storages, requested, source_volumes, month)
        self._storages = routing.storages_after
        self._t = t + 1

        self.totals.inflow += routing.inflow_total
        self.totals.delivered += routing.delivered_total
        self.totals.evaporated += routing.evaporation_total
        self.totals.sink_outflow += routing.sink_outflow

        reward = self._reward(routing, month)
        truncated = self._t >= self.horizon
        info = {
            "t": t,
            "month": month,
            "storages": list(routing.storages_after),
            "levels": list(routing.levels_after),
            "releases": list(routing.releases),
            "spills": list(routing.spills),
            "evaporations": list(routing.evaporations),
            "energies": list(routing.energies),
            "supplies": list(routing.supplies),
            "deficits": list(routing.deficits),
            "inflow_volumes": source_volumes,
            "sink_outflow": routing.sink_outflow,
        }
        return self._observation(), reward, False, truncated, info

    # -- internals ------------------------------------------------------------

    def _observation(self) -> np.ndarray:
        obs = np.empty(self.observation_dim)
        for i, (s, cap) in enumerate(zip(self._storages, self._capacities)):
            value = s / cap
            obs[i] = 0.0 if value < 0.0 else (1.0 if value > 1.0 else value)
        obs[-1] = (month_of_step(self._t) - 1) / 11.0
        return obs

    def _deficit_ratio(self, routing, month: int, slots: Sequence[int]) -> float:
        demand = sum(self.basin.demand_specs[j].monthly_demand[month - 1] for j in slots)
        if demand <= 0.0:
            return 0.0
        deficit = sum(routing.deficits[j] for j in slots)
        ratio = deficit / demand
        return min(max(ratio, 0.0), 1.0)

    def _reward(self, routing, month: int) -> np.ndarray:
        p = self.env_config.deficit_power
        # the + 0.0 turns -0.0 into 0.0 when the deficit vanishes
        r_ed = -self._deficit_ratio(routing, month, [self._ed_slot]) ** p + 0.0
        r_sd = (-self._deficit_ratio(routing, month, self._sd_slots) ** p + 0.0
                if self._sd_slots else 0.0)
        r_had = 1.0 if routing.levels_after[self._had_slot] >= \
            self.env_config.min_power_level_had else 0.0
        energy = sum(routing.energies[i] for i in self._energy_slots)
        r_eh = energy / self._max_month_energy
        return np.array([r_ed, r_sd, r_had, min(r_eh, 1.0)])

    @property
    def current_step(self) -> int:
        return self._t

    def storage_total(self) -> float:
        if self._storages is None:
            raise UsageError("no episode in progress")
        return float(sum(self._storages))

    def inflow_volumes(self) -> list[np.ndarray]:
        """This episode's drawn inflow volumes (m^3), one array per source."""
        if self._inflow_volumes is None:
            raise UsageError("no episode in progress")
        return [v.copy() for v in self._inflow_volumes]


def rollout(env: NileEnv, policy, seed: Optional[int] = None,
            collect: bool = False):
    """Run one full episode under `policy` (a callable obs -> action).

    Returns (objectives, rows): objectives is the discounted average reward
    vector, rows is a list of per-step records (or None unless `collect`),
    each (t, storages_after, action, reward).
    """
    gamma = env.env_config.gamma
    obs, _ = env.reset(seed=seed)
    acc = np.zeros(env.reward_dim)
    discount = 1.0
    rows = [] if collect else None
    truncated = False
    t = 0
    while not truncated:
        action = np.asarray(policy(obs), dtype=float)
        obs, reward, _, truncated, info = env.step(action)
        acc += discount * reward
        discount *= gamma
        if collect:
            rows.append((t, list(info["storages"]), [float(a) for a in action],
                         [float(r) for r in reward]))
        t += 1
    return acc / env.horizon, rows
