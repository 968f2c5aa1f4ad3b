"""Exact leader solver: branch-and-cut over the interdiction vector.

The master problem is ``min t`` over ``z`` in the unit box with
``sum(z) <= Q``. Interdiction cuts ``t >= sum_i p_i (1 - z_i) y_i`` are
added lazily, one per follower tour ``y``. At integral ``z`` the cut comes
from an exact follower solve (optionally preceded by a pool heuristic);
at fractional ``z`` pooled tours are tried heuristically.

Settings switch features on cumulatively::

    I      exact separation of integral points only
    IF     + heuristic separation of fractional points
    IFH    + pool heuristic before exact integral separation
    IFHC   + follower cut pool shared across follower solves
    IFHCP  + follower preprocessing of interdicted nodes

Nodes with zero prize are never worth interdicting and their ``z`` is
fixed to 0.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .follower import CUTOFF_PRUNED, TIME_OUT, FollowerCutPool, solve_follower
from .instance import Instance
from .lp import CUTOFF, INFEASIBLE, OPTIMAL, LpModel
from .tours import SolutionPool, Tour, improve

SETTINGS = ("I", "IF", "IFH", "IFHC", "IFHCP")
MAX_FRACTIONAL_PASSES = 10
MAX_FRACTIONAL_CUTS = 10  # per pass, most violated first
VIOLATION_TOL = 1e-6
INT_TOL = 1e-6
PURGE_ABOVE = 400  # master rows beyond which slack cuts are parked in the store

STATUS_OPTIMAL = "optimal"
STATUS_TIME_OUT = "time_out"


class LeaderTimeout(Exception):
    pass


@dataclass(frozen=True)
class Features:
    fractional: bool
    heuristic: bool
    cut_pool: bool
    preprocess: bool

    @classmethod
    def of(cls, setting: str) -> "Features":
        if setting not in SETTINGS:
            raise ValueError(f"unknown setting {setting!r}; expected one of {', '.join(SETTINGS)}")
        k = SETTINGS.index(setting)
        return cls(fractional=k >= 1, heuristic=k >= 2, cut_pool=k >= 3, preprocess=k >= 4)

    @property
    def solution_pool(self) -> bool:
        return self.fractional or self.heuristic


@dataclass
class OigResult:
    z: np.ndarray
    value: float  # incumbent, an upper bound on the optimum
    bound: float  # proven lower bound
    status: str
    tour: Tour | None = None  # an optimal follower reply to z
    root_gap: float = 0.0
    nodes: int = 0
    int_cuts: int = 0
    frac_cuts: int = 0
    seconds: float = 0.0
    sep_seconds: float = 0.0
    setting: str = "IFHC"
    seed: int = 0
    events: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        return gap(self.value, self.bound)

    @property
    def interdicted(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.z > 0.5)]


def gap(upper: float, lower: float) -> float:
    """Relative gap in percent, 0 when the upper bound is 0."""
    if not math.isfinite(upper):
        return 100.0
    if upper <= 0:
        return 0.0
    return max(0.0, 100.0 * (upper - lower) / upper)


# ---------------------------------------------------------------- separation
def cut_value(inst: Instance, tour, z) -> float:
    """Right-hand side of the tour's interdiction cut at ``z``: sum p_i (1 - z_i)."""
    nodes = list(tour.nodes if isinstance(tour, Tour) else tour)
    z = np.asarray(z, dtype=float)
    return float(inst.prizes[nodes] @ (1.0 - z[nodes]))


def find_heuristic_fol_soln(inst: Instance, z, t: float, pool: SolutionPool):
    """First pooled tour that, once repaired and improved under ``z``, collects more than ``t``.

    ``z_i > 0.5`` counts as interdicted. Returns ``(tour, prize)`` or None.
    """
    if not len(pool):
        return None
    threshold = math.floor(t + VIOLATION_TOL)
    tour, prize = pool.scan(z, threshold=threshold)
    if tour is None or prize <= threshold:
        return None
    return tour, prize


def separate_fractional(inst: Instance, z, t: float, pool: SolutionPool, improved: bool = True,
                        limit: int = MAX_FRACTIONAL_CUTS) -> list[Tour]:
    """Pooled (and, with ``improved``, heuristically improved) tours whose cut is violated at ``(z, t)``."""
    if not len(pool):
        return []
    z = np.asarray(z, dtype=float)
    w = inst.prizes * (1.0 - z)
    scored: dict[tuple, tuple[float, Tour]] = {}
    vals = pool.incidence() @ w
    for k in np.flatnonzero(vals > t + VIOLATION_TOL):
        scored[pool.tours[k].nodes] = (float(vals[k]), pool.tours[k])
    if improved:
        blocked = z > 0.5
        for tour in pool:
            better, _ = improve(tour, inst, blocked)
            v = cut_value(inst, better, z)
            if v > t + VIOLATION_TOL and better.nodes not in scored:
                scored[better.nodes] = (v, better)
    ranked = sorted(scored.values(), key=lambda vt: (-vt[0], vt[1].nodes))
    return [tour for _, tour in ranked[:limit]]


# ---------------------------------------------------------------- master
class _Master:
    """The leader LP together with a store of every interdiction cut found."""

    def __init__(self, inst: Instance):
        self.inst = inst
        n = inst.n
        self.n = n
        self.t = n
        total = float(inst.prizes.sum())
        lp = self.lp = LpModel("min")
        lp.add_vars(np.zeros(n), np.where(inst.prizes > 0, 1.0, 0.0), np.zeros(n))
        lp.add_var(0.0, total, 1.0)
        lp.add_row(list(range(n)), [1.0] * n, "<=", float(inst.interdiction_budget), tag="budget")
        self.base_lo = np.array([lp.bounds(j)[0] for j in range(n)])
        self.base_hi = np.array([lp.bounds(j)[1] for j in range(n)])
        self.cur_lo, self.cur_hi = self.base_lo.copy(), self.base_hi.copy()
        self.store: dict[tuple, np.ndarray] = {}  # node set -> prize vector on those nodes
        self._store_keys: list[tuple] = []
        self._store_W = np.zeros((0, n))
        self._store_rhs = np.zeros(0)
        self.active: set[tuple] = set()

    def add(self, tour) -> bool:
        """Install the cut of ``tour``; False when it is already active."""
        nodes = tuple(sorted(i for i in (tour.nodes if isinstance(tour, Tour) else tour)
                             if self.inst.prizes[i] > 0))
        if nodes in self.active:
            return False
        if nodes not in self.store:
            w = np.zeros(self.n)
            w[list(nodes)] = self.inst.prizes[list(nodes)]
            self.store[nodes] = w
            self._store_keys.append(nodes)
            self._store_W = np.vstack([self._store_W, w])
            self._store_rhs = np.append(self._store_rhs, w.sum())
        self._activate(nodes)
        return True

    def _activate(self, nodes: tuple) -> None:
        w = self.store[nodes]
        idx = [self.t] + list(nodes)
        coef = [1.0] + [float(w[i]) for i in nodes]
        self.lp.add_row(idx, coef, ">=", float(w.sum()), tag=nodes)
        self.active.add(nodes)

    def restore_violated(self, z, t) -> int:
        """Re-install parked cuts violated at ``(z, t)``."""
        if not len(self._store_keys):
            return 0
        viol = self._store_rhs - self._store_W @ z - t
        k = 0
        for r in np.flatnonzero(viol > VIOLATION_TOL):
            key = self._store_keys[r]
            if key not in self.active:
                self._activate(key)
                k += 1
        return k

    def purge(self) -> None:
        if self.lp.n_rows <= PURGE_ABOVE:
            return
        slack_rows = [r for r in self.lp.basic_slack_rows() if self.lp.row_tags[r] != "budget"]
        slack = self.lp.slacks()
        loose = [r for r in slack_rows if abs(slack[r]) > 0.5]
        tags = [self.lp.row_tags[r] for r in loose]
        removed = set(self.lp.remove_rows(loose))
        for r, tag in zip(loose, tags):
            if r in removed:
                self.active.discard(tag)

    def apply(self, fixes: dict) -> None:
        lo, hi = self.base_lo.copy(), self.base_hi.copy()
        for j, v in fixes.items():
            lo[j] = hi[j] = v
        diff = np.flatnonzero((lo != self.cur_lo) | (hi != self.cur_hi))
        if diff.size:
            self.lp.set_bounds(diff, lo[diff], hi[diff])
        self.cur_lo, self.cur_hi = lo, hi


# ---------------------------------------------------------------- search
class _LeaderSearch:
    def __init__(self, inst, setting, time_limit, seed, log_events):
        self.inst = inst
        self.setting = setting
        self.feat = Features.of(setting)
        self.seed = seed
        self.start = time.monotonic()
        self.deadline = None if time_limit is None else self.start + time_limit
        self.master = _Master(inst)
        self.pool = SolutionPool(inst) if self.feat.solution_pool else None
        self.cut_pool = FollowerCutPool() if self.feat.cut_pool else None
        self.best_value = math.inf
        self.best_z = np.zeros(inst.n)
        self.best_tour: Tour | None = None
        self.nodes = 0
        self.int_cuts = 0
        self.frac_cuts = 0
        self.sep_seconds = 0.0
        self.root_gap = None
        self.events = [] if log_events else None

    # helpers -----------------------------------------------------------
    def _remaining(self):
        if self.deadline is None:
            return None
        left = self.deadline - time.monotonic()
        if left <= 0:
            raise LeaderTimeout
        return left

    def _log(self, *event) -> None:
        if self.events is not None:
            self.events.append(event)

    def _exact(self, z, lower=None):
        res = solve_follower(self.inst, z, lower_cutoff=lower, pool=self.cut_pool,
                             preprocess=self.feat.preprocess, time_limit=self._remaining())
        if res.status == TIME_OUT:
            raise LeaderTimeout
        if res.tour is not None and self.pool is not None:
            self.pool.add(res.tour)
        return res

    def _incumbent(self, z, value, tour=None) -> None:
        if value < self.best_value:
            self.best_value = value
            self.best_z = np.round(z).astype(float)
            self.best_tour = tour
            self._log("incumbent", value, tuple(int(i) for i in np.flatnonzero(self.best_z > 0.5)))

    # separation --------------------------------------------------------
    def separate_integer(self, z, t):
        """A tour whose cut is violated at integral ``(z, t)``, or None when ``t`` is exact."""
        t_int = math.floor(t + VIOLATION_TOL)
        if self.feat.heuristic and self.pool is not None:
            hit = find_heuristic_fol_soln(self.inst, z, t_int, self.pool)
            if hit is not None:
                return hit[0]
        res = self._exact(z, lower=t_int)
        if res.status == CUTOFF_PRUNED:
            self._incumbent(z, t_int, None)
            return None
        # exact optimum above the cutoff
        self._incumbent(z, res.value, res.tour)
        if res.value > t_int:
            return res.tour
        return None

    # node processing ---------------------------------------------------
    def _cutoff(self):
        return None if not math.isfinite(self.best_value) else self.best_value - 1 + 1e-6

    def process(self, fixes: dict, root: bool):
        m = self.master
        m.apply(fixes)
        passes = 0
        while True:
            self._remaining()
            sol = m.lp.solve(cutoff=self._cutoff())
            if sol.status in (INFEASIBLE, CUTOFF):
                return "prune", None
            if sol.status != OPTIMAL:
                raise RuntimeError(f"leader relaxation ended with status {sol.status}")
            z, t = sol.x[: m.n], sol.x[m.t]
            if math.ceil(t - 1e-6) >= self.best_value:
                return "prune", None
            if m.restore_violated(z, t):
                continue
            integral = np.all(np.abs(z - np.round(z)) <= INT_TOL)
            t0 = time.monotonic()
            try:
                if integral:
                    zr = np.round(z)
                    tour = self.separate_integer(zr, t)
                    if tour is not None:
                        m.add(tour)
                        self.int_cuts += 1
                        self._log("int_cut", tour.nodes)
                        continue
                    return "prune", None
                if self.feat.fractional and passes < MAX_FRACTIONAL_PASSES:
                    tours = separate_fractional(self.inst, z, t, self.pool)
                    added = sum(m.add(tr) for tr in tours)
                    if added:
                        self.frac_cuts += added
                        passes += 1
                        self._log("frac_cuts", added)
                        continue
            finally:
                self.sep_seconds += time.monotonic() - t0
            m.purge()
            return "branch", (self._branch_var(z), t)

    def _branch_var(self, z) -> int:
        frac = np.abs(z - np.round(z))
        cand = np.flatnonzero(frac > INT_TOL)
        p = self.inst.prizes
        return int(min(cand, key=lambda i: (abs(z[i] - 0.5), -p[i], i)))

    def bootstrap(self) -> None:
        t0 = time.monotonic()
        z0 = np.zeros(self.inst.n)
        res = self._exact(z0)
        self.sep_seconds += time.monotonic() - t0
        self._incumbent(z0, res.value, res.tour)
        if res.tour is not None:
            self.master.add(res.tour)

    def run(self):
        """Plunge into the up child, backtrack to the best bound.

        Returns ``(finished, lower_bound)``.
        """
        self.bootstrap()
        heap: list = []
        seq = 0
        current = ({}, True, 0.0)  # fixings, is-root, parent bound
        try:
            while True:
                if current is None:
                    while heap and math.ceil(heap[0][0] - 1e-6) >= self.best_value:
                        heapq.heappop(heap)
                    if not heap:
                        break
                    bound, _, fixes = heapq.heappop(heap)
                    current = (fixes, False, bound)
                fixes, root, _ = current
                self.nodes += 1
                kind, info = self.process(fixes, root)
                if root:
                    root_bound = self.best_value if kind == "prune" else info[1]
                    self.root_gap = gap(self.best_value, math.ceil(root_bound - 1e-6))
                if kind == "prune":
                    current = None
                    continue
                var, bound = info
                up, down = dict(fixes), dict(fixes)
                up[var], down[var] = 1.0, 0.0
                seq += 1
                heapq.heappush(heap, (bound, seq, down))
                current = (up, False, bound)
        except LeaderTimeout:
            pending = [h[0] for h in heap]
            if current is not None:
                pending.append(current[2])
            lower = min(pending, default=self.best_value)
            return False, min(math.ceil(lower - 1e-6), self.best_value)
        return True, self.best_value


def solve_oig(inst: Instance, setting: str = "IFHC", time_limit: float | None = None, seed: int = 0,
              log_events: bool = False) -> OigResult:
    """Minimize the follower's best prize over interdiction vectors with ``sum(z) <= Q``."""
    s = _LeaderSearch(inst, setting, time_limit, seed, log_events)
    try:
        finished, lower = s.run()
    except LeaderTimeout:  # during the bootstrap solve
        finished, lower = False, 0.0
    seconds = time.monotonic() - s.start
    status = STATUS_OPTIMAL if finished else STATUS_TIME_OUT
    z = s.best_z
    tour = s.best_tour
    if finished and tour is None and s.best_value > 0:
        # incumbent confirmed by a cutoff: recover a witness tour for the report
        res = solve_follower(inst, z, pool=s.cut_pool, preprocess=s.feat.preprocess)
        if res.value != s.best_value:
            raise AssertionError(f"incumbent {s.best_value} disagrees with exact follower value {res.value}")
        tour = res.tour
    value = s.best_value
    return OigResult(
        z=z, value=value, bound=float(lower), status=status, tour=tour,
        root_gap=s.root_gap if s.root_gap is not None else gap(value, lower),
        nodes=s.nodes, int_cuts=s.int_cuts, frac_cuts=s.frac_cuts, seconds=seconds,
        sep_seconds=s.sep_seconds, setting=setting, seed=seed, events=s.events or [],
    )
