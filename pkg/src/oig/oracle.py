"""Brute-force ground truth by subset dynamic programming.

Everything here is deliberately plain: one Held-Karp table over the
non-depot nodes, cycle lengths read off its closure, and leader vectors
enumerated exhaustively. Nothing is shared with the branch-and-cut code.

Above ``MAX_NODES`` the full table is out of reach, but the follower's
budget keeps tours short. ``op_exact`` then grows depot paths label by
label, keeping the shortest path per (node set, end node) and dropping
any path that cannot get back to the depot within the budget.

The cycle table does not depend on the interdiction vector, so it is
computed once per instance and cached on the instance's ``meta`` dict.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from numba import njit

from .instance import Instance

MAX_NODES = 20
MAX_TSP_NODES = 18
MAX_SPARSE_NODES = 40  # bitmasks must fit in an int64 with room for the dedup key
MAX_SPARSE_STATES = 6 * 10**7
DEFAULT_WORK_LIMIT = 2 * 10**10
INF = np.iinfo(np.int64).max // 4


class OracleRefusal(ValueError):
    """The instance is too large for exhaustive computation."""


@njit(cache=True)
def _held_karp(d, depot_dist):
    """path[S, e]: shortest depot path covering exactly S (bitmask) and ending at e."""
    m = d.shape[0]
    full = 1 << m
    path = np.full((full, m), INF, dtype=np.int64)
    for e in range(m):
        path[1 << e, e] = depot_dist[e]
    for S in range(1, full):
        for e in range(m):
            if not (S >> e) & 1:
                continue
            cur = path[S, e]
            if cur >= INF:
                continue
            for f in range(m):
                if (S >> f) & 1:
                    continue
                T = S | (1 << f)
                v = cur + d[e, f]
                if v < path[T, f]:
                    path[T, f] = v
    return path


@njit(cache=True)
def _close_cycles(path, depot_dist):
    full, m = path.shape
    cyc = np.full(full, INF, dtype=np.int64)
    for S in range(full):
        # at least two non-depot nodes: a cycle with three distinct nodes
        if S & (S - 1) == 0:
            continue
        best = INF
        for e in range(m):
            if (S >> e) & 1 and path[S, e] < INF:
                v = path[S, e] + depot_dist[e]
                if v < best:
                    best = v
        cyc[S] = best
    return cyc


@njit(cache=True)
def _maximal_feasible(cyc, budget):
    full = cyc.shape[0]
    m = 0
    while (1 << m) < full:
        m += 1
    feas = cyc <= budget
    keep = np.zeros(full, dtype=np.bool_)
    for S in range(full):
        if not feas[S]:
            continue
        maximal = True
        for f in range(m):
            if not (S >> f) & 1 and feas[S | (1 << f)]:
                maximal = False
                break
        keep[S] = maximal
    return np.flatnonzero(keep)


@njit(cache=True)
def _subset_sums(w):
    m = w.shape[0]
    out = np.zeros(1 << m, dtype=np.int64)
    for S in range(1, 1 << m):
        low = S & -S
        b = 0
        while (1 << b) != low:
            b += 1
        out[S] = out[S ^ low] + w[b]
    return out


@njit(cache=True)
def _best_over(masks, psum, blocked):
    best = 0
    arg = -1
    for k in range(masks.shape[0]):
        v = psum[masks[k] & ~blocked]
        if v > best:
            best = v
            arg = masks[k]
    return best, arg


@njit(cache=True)
def _enumerate_leader(masks, psum, m, size):
    """Minimise the follower value over all blocked sets of exactly ``size`` bits.

    Bits index non-depot nodes. Returns (value, blocked mask).
    """
    comb = np.arange(size)
    best = INF
    best_mask = 0
    while True:
        blocked = 0
        for k in range(size):
            blocked |= 1 << comb[k]
        v, _ = _best_over(masks, psum, blocked)
        if v < best:
            best = v
            best_mask = blocked
        # next combination in lexicographic order
        i = size - 1
        while i >= 0 and comb[i] == m - size + i:
            i -= 1
        if i < 0:
            break
        comb[i] += 1
        for k in range(i + 1, size):
            comb[k] = comb[k - 1] + 1
    return best, best_mask


@njit(cache=True)
def _sparse_cycles(d, depot_dist, back, budget, max_states):
    """Node sets (bitmasks) with a budget-feasible depot cycle through exactly them.

    ``back[e]`` is a lower bound on the distance from ``e`` back to the
    depot. Returns (masks, overflow); masks repeat.
    """
    m = d.shape[0]
    masks = np.empty(m, dtype=np.int64)
    ends = np.empty(m, dtype=np.int64)
    lens = np.empty(m, dtype=np.int64)
    cnt = 0
    for e in range(m):
        if depot_dist[e] + back[e] <= budget:
            masks[cnt], ends[cnt], lens[cnt] = 1 << e, e, depot_dist[e]
            cnt += 1
    found = np.empty(0, dtype=np.int64)
    total = cnt
    while cnt > 0:
        nc = 0
        for k in range(cnt):
            for f in range(m):
                if not (masks[k] >> f) & 1 and lens[k] + d[ends[k], f] + back[f] <= budget:
                    nc += 1
        total += nc
        if total > max_states:
            return found, True
        key = np.empty(nc, dtype=np.int64)
        clen = np.empty(nc, dtype=np.int64)
        c = 0
        for k in range(cnt):
            for f in range(m):
                if not (masks[k] >> f) & 1:
                    v = lens[k] + d[ends[k], f]
                    if v + back[f] <= budget:
                        key[c] = (masks[k] | (1 << f)) * 64 + f
                        clen[c] = v
                        c += 1
        order = np.argsort(key, kind="mergesort")
        masks = np.empty(nc, dtype=np.int64)
        ends = np.empty(nc, dtype=np.int64)
        lens = np.empty(nc, dtype=np.int64)
        cnt = 0
        for i in range(nc):
            kk = key[order[i]]
            if cnt > 0 and masks[cnt - 1] * 64 + ends[cnt - 1] == kk:
                if clen[order[i]] < lens[cnt - 1]:
                    lens[cnt - 1] = clen[order[i]]
                continue
            masks[cnt], ends[cnt], lens[cnt] = kk // 64, kk % 64, clen[order[i]]
            cnt += 1
        closed = np.empty(cnt, dtype=np.int64)
        nf = 0
        for i in range(cnt):
            if lens[i] + depot_dist[ends[i]] <= budget:
                closed[nf] = masks[i]
                nf += 1
        found = np.concatenate((found, closed[:nf]))
    return found, False


@njit(cache=True)
def _maximal_sparse(masks, m):
    """Sorted unique masks without a feasible one-node extension."""
    u = np.unique(masks)
    keep = np.ones(u.shape[0], dtype=np.bool_)
    for k in range(u.shape[0]):
        S = u[k]
        for f in range(m):
            if not (S >> f) & 1:
                T = S | (1 << f)
                j = np.searchsorted(u, T)
                if j < u.shape[0] and u[j] == T:
                    keep[k] = False
                    break
    return u[keep]


@njit(cache=True)
def _best_over_bits(masks, w, blocked):
    best = 0
    arg = -1
    for k in range(masks.shape[0]):
        S = masks[k] & ~blocked
        v = 0
        b = 0
        while S:
            if S & 1:
                v += w[b]
            S >>= 1
            b += 1
        if v > best:
            best = v
            arg = masks[k]
    return best, arg


class _Tables:
    def __init__(self, inst: Instance):
        n = inst.n
        if n > MAX_NODES:
            raise OracleRefusal(f"{inst.name}: {n} nodes exceeds the oracle limit of {MAX_NODES}")
        others = np.array([i for i in range(n) if i != inst.depot], dtype=np.int64)
        self.others = others
        self.d = np.ascontiguousarray(inst.dist[np.ix_(others, others)])
        self.dd = np.ascontiguousarray(inst.dist[inst.depot, others])
        self.path = _held_karp(self.d, self.dd)
        self.cyc = _close_cycles(self.path, self.dd)
        self.budget = inst.distance_budget
        self.masks = _maximal_feasible(self.cyc, self.budget)
        self.psum = _subset_sums(inst.prizes[others].astype(np.int64))

    def to_mask(self, z) -> int:
        z = np.asarray(z)
        return int(sum(1 << k for k, i in enumerate(self.others) if z[i] > 0.5))

    def best(self, blocked: int) -> tuple[int, int]:
        return _best_over(self.masks, self.psum, blocked)

    def from_mask(self, mask: int, n: int) -> np.ndarray:
        z = np.zeros(n, dtype=np.int64)
        for k, i in enumerate(self.others):
            if (mask >> k) & 1:
                z[i] = 1
        return z

    def cycle_through(self, S: int, depot: int) -> list[int]:
        """Recover the shortest cycle through exactly S from the DP table."""
        m = len(self.others)
        best_e = min((e for e in range(m) if (S >> e) & 1),
                     key=lambda e: (self.path[S, e] + self.dd[e], e))
        order = [best_e]
        while S & (S - 1):
            e = order[-1]
            R = S ^ (1 << e)
            target = self.path[S, e]
            f = next(f for f in range(m) if (R >> f) & 1 and self.path[R, f] + self.d[f, e] == target)
            order.append(f)
            S = R
        return [depot] + [int(self.others[k]) for k in reversed(order)]


class _SparseTables:
    """Feasible node sets found by budget-pruned labels, for instances above ``MAX_NODES``."""

    def __init__(self, inst: Instance):
        n = inst.n
        if n > MAX_SPARSE_NODES:
            raise OracleRefusal(f"{inst.name}: {n} nodes exceeds the oracle limit of {MAX_SPARSE_NODES}")
        others = np.array([i for i in range(n) if i != inst.depot], dtype=np.int64)
        self.others = others
        self.d = np.ascontiguousarray(inst.dist[np.ix_(others, others)]).astype(np.int64)
        self.dd = np.ascontiguousarray(inst.dist[inst.depot, others]).astype(np.int64)
        sp = inst.dist.astype(np.int64)
        for k in range(n):
            sp = np.minimum(sp, sp[:, k, None] + sp[None, k, :])
        back = np.ascontiguousarray(sp[others, inst.depot])
        found, overflow = _sparse_cycles(self.d, self.dd, back, int(inst.distance_budget), MAX_SPARSE_STATES)
        if overflow:
            raise OracleRefusal(f"{inst.name}: more than {MAX_SPARSE_STATES} path labels")
        # single-node sets never close into a three-node cycle
        found = found[(found & (found - 1)) != 0]
        self.masks = _maximal_sparse(found, len(others)) if found.size else found
        self.w = inst.prizes[others].astype(np.int64)

    to_mask = _Tables.to_mask
    from_mask = _Tables.from_mask

    def best(self, blocked: int) -> tuple[int, int]:
        return _best_over_bits(self.masks, self.w, blocked)

    def cycle_through(self, S: int, depot: int) -> list[int]:
        idx = [k for k in range(len(self.others)) if (S >> k) & 1]
        if len(idx) > MAX_NODES:
            raise OracleRefusal(f"optimal tour visits {len(idx)} nodes, too many to order exactly")
        d = np.ascontiguousarray(self.d[np.ix_(idx, idx)])
        dd = np.ascontiguousarray(self.dd[idx])
        sub = _Tables.__new__(_Tables)
        sub.others, sub.d, sub.dd = self.others[idx], d, dd
        sub.path = _held_karp(d, dd)
        return sub.cycle_through((1 << len(idx)) - 1, depot)


def _tables(inst: Instance, sparse_ok: bool = False):
    key = ("oracle_tables", inst.distance_budget)
    tab = inst.meta.get(key)
    if tab is None:
        if inst.n > MAX_NODES and sparse_ok:
            tab = _SparseTables(inst)
        else:
            tab = _Tables(inst)
        inst.meta[key] = tab
    if not sparse_ok and isinstance(tab, _SparseTables):
        raise OracleRefusal(f"{inst.name}: {inst.n} nodes exceeds the oracle limit of {MAX_NODES}")
    return tab


def cycle_lengths(inst: Instance) -> np.ndarray:
    """Shortest depot cycle length for every subset (bitmask over non-depot nodes)."""
    return _tables(inst).cyc


def op_exact(inst: Instance, z=None) -> tuple[int, list[int]]:
    """Optimal follower value and tour for interdiction vector ``z``.

    Returns ``(0, [])`` when no three-node depot cycle fits the budget.
    Instances above ``MAX_NODES`` use the budget-pruned label search.
    """
    tab = _tables(inst, sparse_ok=True)
    z = np.zeros(inst.n) if z is None else z
    if tab.masks.size == 0:
        return 0, []
    value, S = tab.best(tab.to_mask(z))
    if S < 0:
        # every reachable prize is blocked: any feasible cycle is optimal
        S = int(tab.masks[0])
    value += _depot_gain(inst, z)
    return int(value), tab.cycle_through(int(S), inst.depot)


def _depot_gain(inst: Instance, z) -> int:
    return 0 if np.asarray(z)[inst.depot] > 0.5 else int(inst.prizes[inst.depot])


def oig_exact(inst: Instance, Q: int | None = None, full: bool = False,
              work_limit: float = DEFAULT_WORK_LIMIT) -> tuple[int, np.ndarray]:
    """Optimal leader value and an optimal interdiction vector.

    The depot lies on every tour, so interdicting it just removes its
    prize; with the usual zero depot prize vectors range over the other
    nodes. By monotonicity some optimum uses all available interdictions;
    ``full=True`` also scans every smaller cardinality, which the tests use
    to confirm that shortcut.
    """
    Q = inst.interdiction_budget if Q is None else Q
    if Q < 0:
        raise ValueError("Q must be nonnegative")
    tab = _tables(inst)
    m = len(tab.others)
    k = min(Q, m)
    sizes = range(0, k + 1) if full else [k]
    work = sum(math.comb(m, s) for s in sizes) * max(1, tab.masks.size)
    if work > work_limit:
        raise OracleRefusal(f"{inst.label()}: {work:.3g} evaluations exceed the work limit {work_limit:.3g}")
    if tab.masks.size == 0:
        return 0, np.zeros(inst.n, dtype=np.int64)
    p_depot = int(inst.prizes[inst.depot])
    best, best_mask, depot_hit = None, 0, False
    for s in sizes:
        options = [(s, False)]
        if p_depot > 0 and 0 < s:
            options.append((s - 1, True))
        for size, hit in options:
            if size == 0:
                v, mask = _best_over(tab.masks, tab.psum, 0)[0], 0
            else:
                v, mask = _enumerate_leader(tab.masks, tab.psum, m, size)
            v = int(v) + (0 if hit else p_depot)
            if best is None or v < best:
                best, best_mask, depot_hit = v, int(mask), hit
    z = tab.from_mask(best_mask, inst.n)
    z[inst.depot] = int(depot_hit)
    return best, z


def tsp_exact(inst: Instance) -> int:
    """Held-Karp optimal tour length."""
    if inst.n > MAX_TSP_NODES:
        raise OracleRefusal(f"{inst.name}: {inst.n} nodes exceeds the TSP oracle limit of {MAX_TSP_NODES}")
    others = np.array([i for i in range(inst.n) if i != inst.depot], dtype=np.int64)
    d = np.ascontiguousarray(inst.dist[np.ix_(others, others)])
    dd = np.ascontiguousarray(inst.dist[inst.depot, others])
    path = _held_karp(d, dd)
    full = (1 << len(others)) - 1
    return int(min(path[full, e] + dd[e] for e in range(len(others))))


def feasible_tours(inst: Instance, max_nodes: int = 10):
    """Every budget-feasible depot cycle, each given once (for exhaustive checks)."""
    if inst.n > max_nodes:
        raise OracleRefusal(f"tour enumeration is limited to {max_nodes} nodes")
    others = [i for i in range(inst.n) if i != inst.depot]
    dist = inst.dist
    for r in range(2, len(others) + 1):
        for subset in itertools.combinations(others, r):
            for order in itertools.permutations(subset):
                if order[0] > order[-1]:
                    continue  # the reverse orientation is produced as well
                t = (inst.depot,) + order
                length = sum(int(dist[a, b]) for a, b in zip(t, t[1:] + t[:1]))
                if length <= inst.distance_budget:
                    yield t
