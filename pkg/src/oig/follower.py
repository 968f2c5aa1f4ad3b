"""Exact orienteering under a fixed interdiction vector, by branch-and-cut.

The relaxation holds the degree equations, the depot fixing and the
distance budget over the reduced graph of ``FollowerGraph``. Subtour,
logical and cycle-cover inequalities are generated lazily. A lower
cutoff lets the search stop once it is clear the optimum cannot beat a
given value, which is all the leader needs.

Degenerate case: a tour needs three distinct nodes. When no such depot
cycle fits the budget the value is 0 and the tour is empty.
"""
from __future__ import annotations

import heapq
import math
import time
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .instance import Instance
from .lp import CUTOFF, INFEASIBLE, INT_TOL, OPTIMAL, LpModel
from .separation import (
    VIOLATION_TOL, Cut, FollowerGraph, separate_cycle_cover, separate_gsec, separate_logical,
)
from .tours import Tour, build_tour, tour_prize

POOL_CAPACITY = 5000
MAX_FRACTIONAL_ROUNDS = 20

OPTIMAL_STATUS = "optimal"
CUTOFF_PRUNED = "cutoff_pruned"
TIME_OUT = "time_out"


class FollowerCutPool:
    """Subtour and cycle-cover rows kept across follower solves on one instance.

    Rows are stored as ``a.v <= r`` over the follower variables. When full,
    the oldest row makes room.
    """

    def __init__(self, capacity: int = POOL_CAPACITY):
        self.capacity = capacity
        self._cuts: OrderedDict[tuple, Cut] = OrderedDict()
        self._matrix = None
        self._rhs = None
        self._keys: list[tuple] = []
        self.width = None

    def __len__(self) -> int:
        return len(self._cuts)

    def __contains__(self, key) -> bool:
        return key in self._cuts

    def add(self, cut: Cut) -> bool:
        if cut.kind not in ("gsec", "cc"):
            return False
        key = (cut.kind, cut.key)
        if key in self._cuts:
            return False
        self._cuts[key] = cut
        while len(self._cuts) > self.capacity:
            self._cuts.popitem(last=False)
        self._matrix = None
        return True

    def _compile(self, width: int) -> None:
        rows = list(self._cuts.values())
        M = np.zeros((len(rows), width))
        r = np.zeros(len(rows))
        for k, c in enumerate(rows):
            sign = 1.0 if c.sense == "<=" else -1.0
            np.add.at(M[k], c.idx, sign * c.coef)
            r[k] = sign * c.rhs
        self._matrix, self._rhs, self._keys, self.width = M, r, list(self._cuts), width

    def violated(self, v: np.ndarray, width: int, tol: float = VIOLATION_TOL) -> list[Cut]:
        if not self._cuts:
            return []
        if self._matrix is None or self.width != width:
            self._compile(width)
        viol = self._matrix @ v[:width] - self._rhs
        return [self._cuts[self._keys[k]] for k in np.flatnonzero(viol > tol)]


@dataclass
class FollowerResult:
    status: str
    value: int  # Phi(z) when optimal, else the best value found
    tour: Tour | None
    bound: float  # proven upper bound on Phi(z)
    nodes: int = 0
    cuts: dict = field(default_factory=dict)
    lp_iterations: int = 0
    seconds: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL_STATUS


# ---------------------------------------------------------------- preprocessing
def follower_preprocessing(inst: Instance, z, graph: FollowerGraph | None = None):
    """Fixings and selector constraints for interdicted nodes.

    Returns ``(fixed, groups)``: ``fixed`` lists interdicted nodes whose
    ``y`` can be set to 0 because no pair ``(a, b)`` has
    ``d(a,i) + d(i,b) < d(a,b)``; ``groups`` maps every other interdicted
    node to its shortcut pairs. Pairs using an edge absent from the
    reduced graph cannot occur in a feasible tour and are dropped.
    """
    g = FollowerGraph.of(inst) if graph is None else graph
    d = inst.dist
    z = np.asarray(z, dtype=float)
    fixed, groups = [], {}
    for i in map(int, np.flatnonzero(z > 0.5)):
        if i == inst.depot or g.pos[i] < 0:
            continue
        others = [int(v) for v in g.nodes if v != i]
        pairs = []
        for ia, a in enumerate(others):
            for b in others[ia + 1:]:
                if d[a, i] + d[i, b] < d[a, b] and g.x_var(a, i) >= 0 and g.x_var(i, b) >= 0:
                    pairs.append((a, b))
        if pairs:
            groups[i] = pairs
        else:
            fixed.append(i)
    return fixed, groups


# ---------------------------------------------------------------- heuristics
def primal_heuristic(inst: Instance, x: np.ndarray, y: np.ndarray, z=None,
                     graph: FollowerGraph | None = None) -> Tour | None:
    """A budget-feasible depot tour guided by a relaxation point (or None).

    An integral point that already is a feasible tour is returned as is.
    Otherwise nodes are inserted by decreasing ``y`` (ties: nearer to the
    depot first), then the tour is 2-opted and filled by insertion.
    """
    g = FollowerGraph.of(inst) if graph is None else graph
    direct = _integral_tour(g, x, y)
    if direct is not None:
        tour = Tour.of(direct, inst)
        if tour.feasible(inst):
            return tour
    dep = inst.depot
    cand = [k for k in range(1, g.nn) if y[k] > 1e-9]
    cand.sort(key=lambda k: (-y[k], inst.dist[dep, g.nodes[k]], k))
    return build_tour([int(g.nodes[k]) for k in cand], inst, z)


def best_triangle(inst: Instance, gain: np.ndarray, graph: FollowerGraph) -> tuple[int, list[int]]:
    """Most valuable feasible depot triangle: (value, nodes) or (-1, [])."""
    nodes = graph.nodes[1:]
    if nodes.size < 2:
        return -1, []
    d, dep = inst.dist, inst.depot
    L = d[dep, nodes][:, None] + d[np.ix_(nodes, nodes)] + d[nodes, dep][None, :]
    val = gain[nodes][:, None] + gain[nodes][None, :] + gain[dep]
    ok = (L <= inst.distance_budget) & np.triu(np.ones_like(L, dtype=bool), 1)
    if not ok.any():
        return -1, []
    val = np.where(ok, val, -1)
    a, b = np.unravel_index(int(np.argmax(val)), val.shape)
    return int(val[a, b]), [dep, int(nodes[a]), int(nodes[b])]


def _integral_tour(g: FollowerGraph, x: np.ndarray, y: np.ndarray) -> list[int] | None:
    """The depot cycle of an integral point, or None if not a single cycle."""
    if np.any(np.abs(x - np.round(x)) > INT_TOL) or np.any(np.abs(y - np.round(y)) > INT_TOL):
        return None
    used = np.flatnonzero(x > 0.5)
    adj: dict[int, list[int]] = {}
    for k in used:
        a, b = map(int, g.edges[k])
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    if 0 not in adj or any(len(v) != 2 for v in adj.values()):
        return None
    cycle, prev, cur = [0], -1, 0
    while True:
        nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        if nxt == 0:
            break
        cycle.append(nxt)
        prev, cur = cur, nxt
    if len(cycle) != len(adj) or len(cycle) < 3:
        return None
    return [int(g.nodes[k]) for k in cycle]


# ---------------------------------------------------------------- branch-and-cut
class _Search:
    def __init__(self, inst, z, lower_cutoff, pool, preprocess, time_limit, gsec_increasing,
                 max_rounds, deadline):
        self.inst = inst
        self.g = g = FollowerGraph.of(inst)
        self.z = np.zeros(inst.n) if z is None else np.asarray(z, dtype=float)
        self.gain_full = np.where(self.z > 0.5, 0, inst.prizes).astype(np.int64)
        self.lower = -math.inf if lower_cutoff is None else float(lower_cutoff)
        self.pool = pool
        self.gsec_increasing = gsec_increasing
        self.max_rounds = max_rounds
        self.deadline = deadline
        self.counts = {"gsec": 0, "logical": 0, "cc": 0, "pool": 0}
        self.nodes = 0

        lp = self.lp = LpModel("max")
        gy = g.gains(self.z)
        lp.add_vars(np.zeros(g.m), np.ones(g.m), np.zeros(g.m))
        lp.add_vars(np.zeros(g.nn), np.ones(g.nn), gy)
        self.base_lo = np.zeros(g.n_vars)
        self.base_hi = np.ones(g.n_vars)
        self.base_lo[g.m] = 1.0  # depot always visited
        groups = {}
        if preprocess:
            fixed, groups = follower_preprocessing(inst, self.z, g)
            for i in fixed:
                self.base_hi[g.y_var(i)] = 0.0
        sel_rows = []
        nsel = sum(len(p) + 1 for p in groups.values())
        if nsel:
            first = lp.n_vars
            lp.add_vars(np.zeros(nsel), np.ones(nsel), np.zeros(nsel))
            self.base_lo = np.concatenate([self.base_lo, np.zeros(nsel)])
            self.base_hi = np.concatenate([self.base_hi, np.ones(nsel)])
            k = first
            for i, pairs in groups.items():
                b0 = k
                sel_rows.append(([g.y_var(i), b0], [1.0, 1.0], "<=", 1.0))
                for a, b in pairs:
                    k += 1
                    sel_rows.append(([g.x_var(a, i), g.x_var(i, b), k], [1.0, 1.0, -2.0], ">=", 0.0))
                sel_rows.append((list(range(b0, k + 1)), [1.0] * (k + 1 - b0), "=", 1.0))
                k += 1
        lp.set_bounds(np.arange(lp.n_vars), self.base_lo, self.base_hi)
        rows = []
        for j in range(g.nn):
            inc = g.incident[j]
            rows.append((inc + [g.m + j], [1.0] * len(inc) + [-2.0], "=", 0.0))
        rows.append((list(range(g.m)), g.length.astype(float), "<=", float(inst.distance_budget)))
        lp.add_rows(rows + sel_rows)
        self.cur_lo = self.base_lo.copy()
        self.cur_hi = self.base_hi.copy()

        tri_value, tri = best_triangle(inst, self.gain_full, g)
        self.best_value, self.best_tour = -1, None
        if tri:
            self._offer(Tour.of(tri, inst))

    # incumbent ---------------------------------------------------------
    def _offer(self, tour: Tour | None) -> None:
        if tour is None:
            return
        v = tour_prize(tour, self.inst, self.z > 0.5)
        if v > self.best_value:
            self.best_value, self.best_tour = v, tour

    def _target(self) -> float:
        """Nodes whose bound cannot exceed this value are useless."""
        return max(self.best_value, self.lower)

    def _cutoff(self):
        t = self._target()
        return None if t == -math.inf else t + 1 - 1e-6

    # cuts --------------------------------------------------------------
    def _add(self, cuts: list[Cut]) -> None:
        self.lp.add_rows([c.row() for c in cuts], [c.kind for c in cuts])
        for c in cuts:
            self.counts[c.kind] += 1
            if self.pool is not None:
                self.pool.add(c)

    def _apply(self, fixes: dict) -> None:
        lo, hi = self.base_lo.copy(), self.base_hi.copy()
        for j, v in fixes.items():
            lo[j] = hi[j] = v
        diff = np.flatnonzero((lo != self.cur_lo) | (hi != self.cur_hi))
        if diff.size:
            self.lp.set_bounds(diff, lo[diff], hi[diff])
        self.cur_lo, self.cur_hi = lo, hi

    # node processing ---------------------------------------------------------
    def process(self, fixes: dict, root: bool):
        """Returns ("prune", None) or ("branch", (var, bound))."""
        g = self.g
        self._apply(fixes)
        rounds = 0
        while True:
            sol = self.lp.solve(cutoff=self._cutoff())
            if sol.status in (INFEASIBLE, CUTOFF):
                return "prune", None
            if sol.status != OPTIMAL:
                raise RuntimeError(f"follower relaxation ended with status {sol.status}")
            v = sol.x
            x, y = g.split(v)
            if root and self.pool is not None:
                hits = self.pool.violated(v, g.n_vars)
                if hits:
                    self.lp.add_rows([c.row() for c in hits], [c.kind for c in hits])
                    self.counts["pool"] += len(hits)
                    continue
            tour = _integral_tour(g, x, y)
            integral = tour is not None or (
                np.all(np.abs(x - np.round(x)) <= INT_TOL) and np.all(np.abs(y - np.round(y)) <= INT_TOL))
            if integral:
                cuts = separate_gsec(g, x, y, increasing=self.gsec_increasing)
                if cuts:
                    self._add(cuts)
                    continue
                if tour is None:
                    raise RuntimeError("integral relaxation point is not a tour")
                self._offer(Tour.of(tour, self.inst))
                return "prune", None
            if rounds < self.max_rounds:
                cuts = separate_logical(g, x, y)
                if not cuts:
                    cuts = separate_gsec(g, x, y, increasing=self.gsec_increasing)
                if not cuts:
                    cuts = separate_cycle_cover(g, x, y)
                if cuts:
                    self._add(cuts)
                    rounds += 1
                    continue
            self._offer(primal_heuristic(self.inst, x, y, self.z, g))
            bound = sol.objective
            if math.floor(bound + 1e-6) <= self._target():
                return "prune", None
            return "branch", (self._branch_var(v), bound)

    def _branch_var(self, v: np.ndarray) -> int:
        g = self.g
        groups = [np.arange(g.m, g.m + g.nn), np.arange(g.m), np.arange(g.n_vars, len(v))]
        for idx in groups:
            frac = np.abs(v[idx] - np.round(v[idx]))
            if idx.size and frac.max() > INT_TOL:
                score = np.abs(v[idx] - 0.5)
                return int(idx[int(np.argmin(score))])
        raise RuntimeError("no fractional variable to branch on")

    def run(self):
        heap: list = []
        seq = 0
        current = ({}, True)
        timed_out = False
        while True:
            if current is None:
                while heap and math.floor(-heap[0][0] + 1e-6) <= self._target():
                    heapq.heappop(heap)
                if not heap:
                    break
                _, _, fixes = heapq.heappop(heap)
                current = (fixes, False)
            if self.deadline is not None and time.monotonic() > self.deadline:
                timed_out = True
                break
            fixes, root = current
            self.nodes += 1
            kind, info = self.process(fixes, root)
            if kind == "prune":
                current = None
                continue
            var, bound = info
            up, down = dict(fixes), dict(fixes)
            up[var], down[var] = 1.0, 0.0
            seq += 1
            heapq.heappush(heap, (-bound, seq, down))
            current = (up, False)
        open_bound = max([-h[0] for h in heap], default=-math.inf)
        if timed_out and current is not None:
            open_bound = math.inf
        return timed_out, open_bound


def solve_follower(inst: Instance, z=None, lower_cutoff: float | None = None,
                   pool: FollowerCutPool | None = None, preprocess: bool = False,
                   time_limit: float | None = None, gsec_increasing: bool = True,
                   max_rounds: int = MAX_FRACTIONAL_ROUNDS) -> FollowerResult:
    """Solve the follower's orienteering problem for interdiction vector ``z``.

    With ``lower_cutoff`` the result is either optimal with value above the
    cutoff, or ``cutoff_pruned``: no tour beats the cutoff.
    """
    start = time.monotonic()
    deadline = None if time_limit is None else start + time_limit
    s = _Search(inst, z, lower_cutoff, pool, preprocess, time_limit, gsec_increasing, max_rounds, deadline)
    timed_out, open_bound = s.run()
    elapsed = time.monotonic() - start
    common = dict(nodes=s.nodes, cuts=s.counts, lp_iterations=s.lp.iterations, seconds=elapsed)
    if timed_out:
        return FollowerResult(TIME_OUT, max(s.best_value, 0), s.best_tour,
                              max(open_bound, s.best_value, 0), **common)
    if s.best_tour is not None and s.best_value > s.lower:
        return FollowerResult(OPTIMAL_STATUS, s.best_value, s.best_tour, s.best_value, **common)
    if lower_cutoff is not None:
        return FollowerResult(CUTOFF_PRUNED, max(s.best_value, 0), s.best_tour, float(lower_cutoff), **common)
    return FollowerResult(OPTIMAL_STATUS, 0, None, 0, **common)


def root_relaxation(inst: Instance, z=None, logical: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Optimal ``(x, y)`` of the follower's root LP: degree, depot and budget rows.

    With ``logical`` the violated logical cuts are added until none is left.
    Returns zero vectors when the relaxation is infeasible.
    """
    s = _Search(inst, z, None, None, False, None, True, 0, None)
    g = s.g
    while True:
        sol = s.lp.solve()
        if sol.status != OPTIMAL:
            return np.zeros(g.m), np.zeros(g.nn)
        x, y = g.split(sol.x)
        cuts = separate_logical(g, x, y) if logical else []
        if not cuts:
            return x, y
        s.lp.add_rows([c.row() for c in cuts])
