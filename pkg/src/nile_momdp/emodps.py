"""Evolutionary multi-objective direct policy search.

A fixed-structure RBF policy (see policy.py) is tuned by NSGA-II over the
box genome [0, 1]^L: fast non-dominated sorting, crowding distance, binary
tournaments, simulated binary crossover, polynomial mutation, and (mu + lambda)
truncation. Every genome evaluation (one call of the objective function,
averaging one or more seeded episodes) counts as exactly one NFE; the run
stops before the budget would be exceeded, never after.

Determinism: all evolution randomness comes from a single generator seeded
from the run seed, and episode seeds are fixed up front, so results are
bit-identical across repeats and across worker counts. Parallel evaluation
only farms out the (pure) genome -> objectives map and merges results in
submission order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .config import FullConfig
from .env import NileEnv, rollout
from .errors import ConfigurationError, UsageError
from .metrics import hypervolume, pareto_indices
from .policy import decode_genome, genome_length

Evaluator = Callable[[np.ndarray], np.ndarray]

_WORKER_ENV: Optional[NileEnv] = None
_WORKER_SEEDS: Optional[tuple[int, ...]] = None
_WORKER_DIMS: Optional[tuple[int, int, int]] = None


def episode_seeds(seed: Optional[int], eval_episodes: int) -> tuple[int, ...]:
    """The fixed inflow-realization seeds every evaluation in a run shares."""
    root = np.random.SeedSequence(seed)
    _, eval_ss = root.spawn(2)
    return tuple(int(s) for s in eval_ss.generate_state(eval_episodes, dtype=np.uint64))


def evolution_rng(seed: Optional[int]) -> np.random.Generator:
    root = np.random.SeedSequence(seed)
    evo_ss, _ = root.spawn(2)
    return np.random.default_rng(evo_ss)


def _objectives_for_genome(env: NileEnv, genome: np.ndarray,
                           dims: tuple[int, int, int],
                           seeds: Sequence[int]) -> np.ndarray:
    n_rbf, obs_dim, action_dim = dims
    policy = decode_genome(genome, n_rbf, obs_dim, action_dim)
    acc = np.zeros(env.reward_dim)
    for s in seeds:
        objectives, _ = rollout(env, policy, seed=s)
        acc += objectives
    return acc / len(seeds)


def _init_worker(config: FullConfig, seeds: tuple[int, ...],
                 dims: tuple[int, int, int]) -> None:
    global _WORKER_ENV, _WORKER_SEEDS, _WORKER_DIMS
    _WORKER_ENV = NileEnv(config)
    _WORKER_SEEDS = seeds
    _WORKER_DIMS = dims


def _worker_evaluate(genome: np.ndarray) -> np.ndarray:
    return _objectives_for_genome(_WORKER_ENV, genome, _WORKER_DIMS, _WORKER_SEEDS)


class _EvaluationEngine:
    """Maps batches of genomes to objective vectors, counting every call."""

    def __init__(self, config: FullConfig, seed: Optional[int], eval_episodes: int,
                 workers: int, evaluate_fn: Optional[Evaluator]):
        if workers < 1:
            raise UsageError("workers must be >= 1")
        if eval_episodes < 1:
            raise UsageError("eval_episodes must be >= 1")
        if evaluate_fn is not None and workers > 1:
            raise UsageError("a custom evaluate_fn runs in-process; use workers=1")
        self.count = 0
        self._fn = evaluate_fn
        self._pool = None
        self._env = None
        self._workers = workers
        self._seeds = episode_seeds(seed, eval_episodes)
        moea = config.moea
        self._dims = (moea.n_rbf, 0, 0)
        if evaluate_fn is None:
            self._env = NileEnv(config)
            self._dims = (moea.n_rbf, self._env.observation_dim, self._env.action_dim)
            if workers > 1:
                self._pool = ProcessPoolExecutor(
                    max_workers=workers, initializer=_init_worker,
                    initargs=(config, self._seeds, self._dims))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self._dims

    def evaluate(self, genomes: list[np.ndarray]) -> np.ndarray:
        self.count += len(genomes)
        if self._fn is not None:
            results = [np.asarray(self._fn(g), dtype=float) for g in genomes]
        elif self._pool is not None:
            chunk = max(1, len(genomes) // (self._workers * 4))
            results = list(self._pool.map(_worker_evaluate, genomes, chunksize=chunk))
        else:
            results = [_objectives_for_genome(self._env, g, self._dims, self._seeds)
                       for g in genomes]
        return np.array(results)

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None


# -- NSGA-II machinery ---------------------------------------------------------


def fast_non_dominated_sort(objectives: np.ndarray) -> list[list[int]]:
    """Partition indices into fronts; front 0 is the non-dominated set."""
    n = len(objectives)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    domination_count = np.zeros(n, dtype=int)
    for i in range(n):
        oi = objectives[i]
        ge = np.all(objectives >= oi, axis=1)
        gt = np.any(objectives > oi, axis=1)
        le = np.all(objectives <= oi, axis=1)
        lt = np.any(objectives < oi, axis=1)
        dominators = np.nonzero(ge & gt)[0]
        dominated = np.nonzero(le & lt)[0]
        domination_count[i] = len(dominators)
        dominated_by[i] = list(dominated)
    fronts = []
    current = [i for i in range(n) if domination_count[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                domination_count[j] -= 1
                if domination_count[j] == 0:
                    nxt.append(j)
        current = sorted(nxt)
    return fronts


def crowding_distance(objectives: np.ndarray, front: Sequence[int]) -> np.ndarray:
    """Crowding distances of `front` members (aligned with `front` order)."""
    size = len(front)
    dist = np.zeros(size)
    if size <= 2:
        dist[:] = np.inf
        return dist
    values = objectives[list(front)]
    for j in range(values.shape[1]):
        order = np.argsort(values[:, j], kind="stable")
        col = values[order, j]
        span = col[-1] - col[0]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span <= 0.0:
            continue
        for pos in range(1, size - 1):
            if np.isinf(dist[order[pos]]):
                continue
            dist[order[pos]] += (col[pos + 1] - col[pos - 1]) / span
    return dist


def rank_and_crowding(objectives: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(objectives)
    ranks = np.empty(n, dtype=int)
    crowd = np.empty(n)
    for r, front in enumerate(fast_non_dominated_sort(objectives)):
        ranks[front] = r
        crowd[front] = crowding_distance(objectives, front)
    return ranks, crowd


def _tournament(rng: np.random.Generator, ranks: np.ndarray,
                crowd: np.ndarray) -> int:
    i, j = rng.integers(0, len(ranks), size=2)
    if ranks[i] < ranks[j]:
        return int(i)
    if ranks[j] < ranks[i]:
        return int(j)
    if crowd[j] > crowd[i]:
        return int(j)
    return int(i)


def sbx_crossover(rng: np.random.Generator, parent_a: np.ndarray,
                  parent_b: np.ndarray, eta: float) -> tuple[np.ndarray, np.ndarray]:
    """Bounded simulated binary crossover on [0, 1] genes (crossover rate 1)."""
    child_a = parent_a.copy()
    child_b = parent_b.copy()
    for i in range(len(parent_a)):
        if rng.random() > 0.5:
            continue
        x1, x2 = parent_a[i], parent_b[i]
        if abs(x1 - x2) < 1e-14:
            continue
        lo_x, hi_x = (x1, x2) if x1 < x2 else (x2, x1)
        rand = rng.random()
        exponent = 1.0 / (eta + 1.0)

        beta = 1.0 + 2.0 * lo_x / (hi_x - lo_x)
        alpha = 2.0 - beta ** -(eta + 1.0)
        if rand <= 1.0 / alpha:
            betaq = (rand * alpha) ** exponent
        else:
            betaq = (1.0 / (2.0 - rand * alpha)) ** exponent
        low_child = 0.5 * ((lo_x + hi_x) - betaq * (hi_x - lo_x))

        beta = 1.0 + 2.0 * (1.0 - hi_x) / (hi_x - lo_x)
        alpha = 2.0 - beta ** -(eta + 1.0)
        if rand <= 1.0 / alpha:
            betaq = (rand * alpha) ** exponent
        else:
            betaq = (1.0 / (2.0 - rand * alpha)) ** exponent
        high_child = 0.5 * ((lo_x + hi_x) + betaq * (hi_x - lo_x))

        low_child = min(max(low_child, 0.0), 1.0)
        high_child = min(max(high_child, 0.0), 1.0)
        if rng.random() <= 0.5:
            child_a[i], child_b[i] = high_child, low_child
        else:
            child_a[i], child_b[i] = low_child, high_child
    return child_a, child_b


def polynomial_mutation(rng: np.random.Generator, genome: np.ndarray,
                        eta: float, rate: float) -> np.ndarray:
    """Bounded polynomial mutation on [0, 1] genes."""
    child = genome.copy()
    exponent = 1.0 / (eta + 1.0)
    for i in range(len(child)):
        if rng.random() > rate:
            continue
        y = child[i]
        rand = rng.random()
        if rand < 0.5:
            xy = 1.0 - y
            val = 2.0 * rand + (1.0 - 2.0 * rand) * xy ** (eta + 1.0)
            delta = val ** exponent - 1.0
        else:
            xy = y
            val = 2.0 * (1.0 - rand) + 2.0 * (rand - 0.5) * xy ** (eta + 1.0)
            delta = 1.0 - val ** exponent
        child[i] = min(max(y + delta, 0.0), 1.0)
    return child


# -- archive and run -------------------------------------------------------------


@dataclass
class Archive:
    """All non-dominated (genome, objectives) pairs seen so far."""

    genomes: list[np.ndarray] = field(default_factory=list)
    objectives: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    def update(self, genomes: Sequence[np.ndarray], objectives: np.ndarray) -> None:
        if len(genomes) == 0:
            return
        if self.objectives.size == 0:
            combined_obj = np.asarray(objectives, dtype=float)
            combined_gen = list(genomes)
        else:
            combined_obj = np.vstack([self.objectives, objectives])
            combined_gen = self.genomes + list(genomes)
        keep = pareto_indices(combined_obj)
        self.genomes = [combined_gen[i] for i in keep]
        self.objectives = combined_obj[keep]


@dataclass
class EmodpsResult:
    """Outcome of one optimization run."""

    genomes: list[np.ndarray]
    objectives: np.ndarray
    convergence: list[tuple[int, float]]
    nfe_used: int
    seed: Optional[int]
    reference: tuple[float, ...]


def convergence_reference(env: NileEnv, margin: float = 0.01) -> np.ndarray:
    """Fixed reference below the theoretical reward lower bounds.

    Using known bounds (not the data) keeps the convergence series comparable
    across runs and guarantees it can never decrease as the archive grows.
    """
    lo, hi = env.reward_bounds()
    return lo - margin * (hi - lo)


def run_emodps(config: FullConfig, seed: Optional[int] = None, workers: int = 1,
               eval_episodes: int = 1, evaluate_fn: Optional[Evaluator] = None,
               reference: Optional[Sequence[float]] = None) -> EmodpsResult:
    """Optimize the configured basin's policy; see module docstring for scheme.

    `evaluate_fn` substitutes the genome -> objectives map (for testing or
    custom simulators); it must be pure for results to stay deterministic.
    """
    moea = config.moea
    engine = _EvaluationEngine(config, seed, eval_episodes, workers, evaluate_fn)
    try:
        if evaluate_fn is None:
            length = genome_length(*engine.dims)
        else:
            probe_env = NileEnv(config)
            length = genome_length(moea.n_rbf, probe_env.observation_dim,
                                   probe_env.action_dim)
        if reference is None:
            ref = convergence_reference(NileEnv(config))
        else:
            ref = np.asarray(reference, dtype=float)

        rng = evolution_rng(seed)
        pop_size = moea.pop
        budget = moea.nfe
        if budget < pop_size:
            raise ConfigurationError("NFE budget below one population")

        population = [rng.random(length) for _ in range(pop_size)]
        pop_objs = engine.evaluate(population)

        archive = Archive()
        archive.update(population, pop_objs)
        convergence = [(engine.count, hypervolume(archive.objectives, ref))]

        mutation_rate = 1.0 / length
        generations = (budget - pop_size) // pop_size
        for _ in range(generations):
            ranks, crowd = rank_and_crowding(pop_objs)
            offspring = []
            while len(offspring) < pop_size:
                pa = population[_tournament(rng, ranks, crowd)]
                pb = population[_tournament(rng, ranks, crowd)]
                ca, cb = sbx_crossover(rng, pa, pb, moea.eta_c)
                offspring.append(polynomial_mutation(rng, ca, moea.eta_m, mutation_rate))
                if len(offspring) < pop_size:
                    offspring.append(polynomial_mutation(rng, cb, moea.eta_m, mutation_rate))
            off_objs = engine.evaluate(offspring)
            archive.update(offspring, off_objs)

            merged = population + offspring
            merged_objs = np.vstack([pop_objs, off_objs])
            population, pop_objs = _select(merged, merged_objs, pop_size)
            convergence.append((engine.count, hypervolume(archive.objectives, ref)))

        return EmodpsResult(
            genomes=archive.genomes,
            objectives=archive.objectives,
            convergence=convergence,
            nfe_used=engine.count,
            seed=seed,
            reference=tuple(float(r) for r in ref),
        )
    finally:
        engine.close()


def _select(genomes: list[np.ndarray], objectives: np.ndarray,
            pop_size: int) -> tuple[list[np.ndarray], np.ndarray]:
    """(mu + lambda) truncation by front rank, then crowding within the cut front."""
    chosen: list[int] = []
    for front in fast_non_dominated_sort(objectives):
        if len(chosen) + len(front) <= pop_size:
            chosen.extend(front)
            if len(chosen) == pop_size:
                break
        else:
            crowd = crowding_distance(objectives, front)
            order = np.argsort(-crowd, kind="stable")
            need = pop_size - len(chosen)
            chosen.extend(front[i] for i in order[:need])
            break
    return [genomes[i] for i in chosen], objectives[chosen]


def evaluate_genomes(config: FullConfig, genomes: Sequence[np.ndarray],
                     seed: Optional[int] = None, eval_episodes: int = 1,
                     workers: int = 1) -> np.ndarray:
    """Objective vectors for explicit genomes, with the run's episode seeding."""
    engine = _EvaluationEngine(config, seed, eval_episodes, workers, None)
    try:
        return engine.evaluate(list(genomes))
    finally:
        engine.close()
