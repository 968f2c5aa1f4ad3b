"""Genetic algorithm for the interdiction game.

Fitness is an estimate of the follower's best prize: every pooled tour is
repaired and improved under the candidate ``z`` and the best prize wins.
Since the pool only grows, estimates are cached per ``z`` together with
the number of pooled tours already scanned, and a later request scans
only the newer tours. The result is the same as a full rescan.

Randomness comes from one ``numpy.random.Generator`` on the PCG64 bit
generator, seeded once per run.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .follower import primal_heuristic, root_relaxation, solve_follower
from .instance import Instance
from .tours import SolutionPool, Tour, improve


@dataclass(frozen=True)
class GaParams:
    k0: int = 10  # pool-seeding runs
    p0: int = 20  # initial individuals
    p_s: float = 0.4  # skipping probability in the greedy
    K: int = 3  # tournament size
    p_max: int = 100
    pool_cap: int = 2000
    n_max_iter: int = 5000
    reeval_period: int = 10
    reeval_k: int = 5
    final_rounds: int = 10  # exact follower solves at the end, at most
    seed: int = 0

    def __post_init__(self):
        for name in ("k0", "p0", "K", "p_max", "pool_cap", "reeval_period", "reeval_k", "final_rounds"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_max_iter < 0 or not 0.0 <= self.p_s <= 1.0:
            raise ValueError("n_max_iter must be >= 0 and p_s in [0, 1]")


@dataclass
class GaResult:
    z: np.ndarray
    estimate: int  # final fitness of z
    value: int  # exact follower optimum for z
    tour: Tour | None
    seconds: float
    seed: int
    pool_size: int
    iterations: int

    @property
    def interdicted(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.z)]

    def delta(self, exact: float) -> float:
        """Percent excess over the exact optimum (0 when both are 0)."""
        if exact == 0:
            return 0.0 if self.value == 0 else float("inf")
        return 100.0 * (self.value - exact) / exact


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class Estimator:
    """``estimate_objective`` with a per-``z`` cache over the growing pool."""

    def __init__(self, inst: Instance, pool: SolutionPool):
        self.inst = inst
        self.pool = pool
        self._cache: dict[bytes, tuple[int, Tour | None, int]] = {}
        self.calls = 0

    def __call__(self, z) -> tuple[int, Tour]:
        if not len(self.pool):
            raise ValueError("cannot estimate with an empty solution pool")
        z = np.asarray(z, dtype=np.int8)
        key = z.tobytes()
        best, tour, seen = self._cache.get(key, (-1, None, 0))
        stop = len(self.pool)
        if seen < stop:
            cand, prize = self.pool.scan(z, start=seen, stop=stop)
            if prize > best:
                best, tour = prize, cand
            self.pool.add(tour)
            self._cache[key] = (best, tour, stop)
        self.calls += 1
        return best, tour


def estimate_objective(z, pool: SolutionPool, inst: Instance) -> tuple[int, Tour]:
    """Best prize over all pooled tours after repair and improvement under ``z``."""
    return Estimator(inst, pool)(z)


# ---------------------------------------------------------------- seeding
def random_z(inst: Instance, rng: np.random.Generator) -> np.ndarray:
    cand = np.flatnonzero(inst.prizes > 0)
    k = min(inst.interdiction_budget, cand.size)
    z = np.zeros(inst.n, dtype=np.int8)
    z[rng.choice(cand, size=k, replace=False)] = 1
    return z


def init_pool(inst: Instance, k0: int, rng: np.random.Generator, cap: int = 2000) -> SolutionPool:
    """Tours from the follower's root LP under ``k0`` random interdictions, plus leave-one-out variants.

    For each variant one tour node is taken out and kept out while the
    rest is improved again; without that, insertion tends to put it back.
    """
    pool = SolutionPool(inst, capacity=cap)
    for _ in range(k0):
        z = random_z(inst, rng)
        x, y = root_relaxation(inst, z)
        tour = primal_heuristic(inst, x, y, z)
        if tour is None:
            continue
        tour, _ = improve(tour, inst, z)
        pool.add(tour)
        for v in tour.nodes[1:]:
            rest = [u for u in tour.nodes if u != v]
            if len(rest) < 3:
                continue
            zv = z.copy()
            zv[v] = 1
            again, _ = improve(Tour.of(rest, inst), inst, zv)
            pool.add(again)
    return pool


def greedy(inst: Instance, estimate: Estimator, p_s: float, rng: np.random.Generator) -> np.ndarray:
    """Lazy randomized greedy interdiction.

    Gains are estimate decreases from interdicting one more node. A stale
    head of the list is dropped with probability ``p_s`` and otherwise
    re-estimated; a fresh head is interdicted.
    """
    z = np.zeros(inst.n, dtype=np.int8)
    Q = inst.interdiction_budget
    if Q == 0:
        return z
    base, _ = estimate(z)
    gains = []  # (gain, node, round computed)
    for i in map(int, np.flatnonzero(inst.prizes > 0)):
        z[i] = 1
        gains.append((base - estimate(z)[0], i, 0))
        z[i] = 0
    gains.sort(key=lambda g: (-g[0], g[1]))
    chosen = 0
    while chosen < Q and gains:
        gain, i, when = gains[0]
        if when == chosen:
            z[i] = 1
            chosen += 1
            gains.pop(0)
            base, _ = estimate(z)
            continue
        if rng.random() < p_s:
            gains.pop(0)
            continue
        z[i] = 1
        gains[0] = (base - estimate(z)[0], i, chosen)
        z[i] = 0
        gains.sort(key=lambda g: (-g[0], g[1]))
    return z


# ---------------------------------------------------------------- operators
def tournament(fitness: list[int], K: int, rng: np.random.Generator) -> int:
    picks = rng.choice(len(fitness), size=min(K, len(fitness)), replace=False)
    return int(min(picks, key=lambda k: (fitness[k], k)))


def crossover(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cut = int(rng.integers(1, a.size)) if a.size > 1 else 0
    return np.concatenate([a[:cut], b[cut:]])


def mutate(z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    z = z.copy()
    flips = int(rng.integers(0, 3))
    if flips:
        pos = rng.choice(z.size, size=flips, replace=False)
        z[pos] ^= 1
    return z


def repair_budget(z: np.ndarray, inst: Instance) -> np.ndarray:
    """Clear set bits, cheapest prize first, until the budget holds."""
    z = z.copy()
    excess = int(z.sum()) - inst.interdiction_budget
    if excess > 0:
        on = np.flatnonzero(z)
        order = on[np.lexsort((on, inst.prizes[on]))]
        z[order[:excess]] = 0
    return z


# ---------------------------------------------------------------- main loop
def evolve(inst: Instance, params: GaParams = GaParams(), follower_time_limit: float | None = None,
           pool: SolutionPool | None = None) -> GaResult:
    start = time.monotonic()
    rng = make_rng(params.seed)
    if pool is None:
        pool = init_pool(inst, params.k0, rng, params.pool_cap)
    if not len(pool):
        # no feasible follower tour at all: nothing to interdict
        z = np.zeros(inst.n, dtype=np.int8)
        return GaResult(z, 0, 0, None, time.monotonic() - start, params.seed, 0, 0)
    est = Estimator(inst, pool)
    population: list[np.ndarray] = []
    fitness: list[int] = []
    for _ in range(params.p0):
        z = greedy(inst, est, params.p_s, rng)
        population.append(z)
        fitness.append(est(z)[0])
    for it in range(1, params.n_max_iter + 1):
        if it % params.reeval_period == 0:
            top = sorted(range(len(population)), key=lambda k: (fitness[k], k))[: params.reeval_k]
            for k in top:
                fitness[k] = est(population[k])[0]
        a = tournament(fitness, params.K, rng)
        b = tournament(fitness, params.K, rng)
        child = repair_budget(mutate(crossover(population[a], population[b], rng), rng), inst)
        f = est(child)[0]
        if len(population) == params.p_max:
            worst = max(range(len(population)), key=lambda k: (fitness[k], -k))
            population[worst], fitness[worst] = child, f
        else:
            population.append(child)
            fitness.append(f)
    # The fittest individual's exact reply may beat every pooled tour. Then
    # the reply joins the pool and the selection is repeated; the best exact
    # value seen is returned.
    result = None
    for _ in range(params.final_rounds):
        fitness = [est(z)[0] for z in population]
        best = min(range(len(population)), key=lambda k: (fitness[k], k))
        z_star = population[best]
        res = solve_follower(inst, z_star, time_limit=follower_time_limit)
        if result is None or res.value < result[2]:
            result = (z_star, fitness[best], res.value, res.tour)
        if res.value <= fitness[best] or not pool.add(res.tour):
            break
    return GaResult(*result, time.monotonic() - start, params.seed, len(pool), params.n_max_iter)
