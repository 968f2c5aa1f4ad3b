"""Depot tours and the local moves used by the heuristics.

A tour is stored with the depot in position 0. Every kernel below keeps
that invariant: 2-opt reverses interior segments only and insertion never
places a node in front of the depot. The numba kernels work on a
fixed-capacity int64 buffer plus a live length ``L``.

Prizes enter the kernels as a ``gain`` vector, ``p_i * (1 - z_i)``, so a
fractional or binary interdiction vector is handled the same way.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .instance import Instance

NO_THRESHOLD = np.iinfo(np.int64).max // 4


@dataclass(frozen=True)
class Tour:
    """A cycle through the depot, stored in canonical orientation.

    Canonical means: depot first, then whichever direction puts the smaller
    neighbour of the depot second. Two tours compare equal iff they are the
    same cycle.
    """

    nodes: tuple[int, ...]
    length: int

    @classmethod
    def of(cls, nodes: Sequence[int], inst: Instance) -> "Tour":
        nodes = canonical(nodes, inst.depot)
        return cls(nodes, tour_length(nodes, inst))

    @property
    def size(self) -> int:
        return len(self.nodes)

    def incidence(self, n: int) -> np.ndarray:
        y = np.zeros(n, dtype=np.int64)
        y[list(self.nodes)] = 1
        return y

    def edges(self) -> list[tuple[int, int]]:
        t = self.nodes
        return [(min(a, b), max(a, b)) for a, b in zip(t, t[1:] + t[:1])]

    def depot_present(self, depot: int) -> bool:
        return depot in self.nodes

    def feasible(self, inst: Instance) -> bool:
        return (self.size >= 3 and self.depot_present(inst.depot)
                and len(set(self.nodes)) == self.size and self.length <= inst.distance_budget)


def canonical(nodes: Sequence[int], depot: int) -> tuple[int, ...]:
    t = [int(v) for v in nodes]
    if len(set(t)) != len(t):
        raise ValueError("a tour may not repeat nodes")
    if depot in t:
        k = t.index(depot)
        t = t[k:] + t[:k]
    elif t:
        k = t.index(min(t))
        t = t[k:] + t[:k]
    if len(t) > 2 and t[-1] < t[1]:
        t = t[:1] + t[:0:-1]
    return tuple(t)


def _as_nodes(tour) -> np.ndarray:
    nodes = tour.nodes if isinstance(tour, Tour) else tour
    return np.asarray(nodes, dtype=np.int64)


def gain_vector(inst: Instance, z=None) -> np.ndarray:
    """Collectable prize per node: ``p * (1 - z)``, with ``z > 0.5`` read as interdicted."""
    if z is None:
        return inst.prizes.astype(np.int64)
    z = np.asarray(z, dtype=float)
    return np.where(z > 0.5, 0, inst.prizes).astype(np.int64)


# ---------------------------------------------------------------- public API
def tour_length(tour, inst: Instance) -> int:
    t = _as_nodes(tour)
    if t.size < 3:
        raise ValueError("a tour needs at least 3 nodes")
    if t.min() < 0 or t.max() >= inst.n:
        raise ValueError("tour node out of range")
    return int(inst.dist[t, np.roll(t, -1)].sum())


def tour_prize(tour, inst: Instance, z=None) -> int:
    t = _as_nodes(tour)
    if z is None:
        return int(inst.prizes[t].sum())
    z = np.asarray(z)
    return int((inst.prizes[t] * (1 - z[t])).sum())


def two_opt(tour, inst: Instance) -> Tour:
    """Best-improvement 2-opt until no segment reversal shortens the tour."""
    t = np.array(canonical(_as_nodes(tour), inst.depot), dtype=np.int64)
    if t.size >= 4:
        _two_opt(t, t.size, inst.dist)
    return Tour.of(t, inst)


def insert(tour, inst: Instance, z=None) -> tuple[Tour, int]:
    """Greedy insertion of collectable nodes while the distance budget allows."""
    t0 = canonical(_as_nodes(tour), inst.depot)
    buf = np.full(inst.n, -1, dtype=np.int64)
    buf[: len(t0)] = t0
    gain = gain_vector(inst, z)
    L, length = _insert(buf, len(t0), inst.dist, gain, inst.distance_budget)
    out = Tour.of(buf[:L], inst)
    return out, int(gain[buf[:L]].sum())


def repair(tour, inst: Instance, z) -> Tour:
    """Drop interdicted nodes whose removal does not lengthen the tour."""
    t0 = canonical(_as_nodes(tour), inst.depot)
    buf = np.array(t0, dtype=np.int64)
    blocked = np.asarray(z, dtype=float) > 0.5
    L = _repair(buf, len(t0), inst.dist, blocked)
    return Tour.of(buf[:L], inst)


def improve(tour, inst: Instance, z=None, threshold: int | None = None) -> tuple[Tour, int]:
    """Repair, then alternate 2-opt and insertion while the prize grows.

    With a ``threshold`` the loop stops as soon as the prize exceeds it.
    """
    gain = gain_vector(inst, z)
    blocked = np.zeros(inst.n, dtype=bool) if z is None else np.asarray(z, dtype=float) > 0.5
    t0 = canonical(_as_nodes(tour), inst.depot)
    buf = np.full(inst.n, -1, dtype=np.int64)
    buf[: len(t0)] = t0
    thr = NO_THRESHOLD if threshold is None else int(threshold)
    L, prize = _improve(buf, len(t0), inst.dist, gain, blocked, inst.distance_budget, thr)
    return Tour.of(buf[:L], inst), int(prize)


# ---------------------------------------------------------------- kernels
@njit(cache=True)
def _length(t, L, dist):
    s = 0
    for k in range(L - 1):
        s += dist[t[k], t[k + 1]]
    return s + dist[t[L - 1], t[0]]


@njit(cache=True)
def _two_opt(t, L, dist):
    if L < 4:
        return
    while True:
        best = 0
        bi = -1
        bj = -1
        for i in range(L - 2):
            a = t[i]
            b = t[i + 1]
            dab = dist[a, b]
            for j in range(i + 2, L):
                if i == 0 and j == L - 1:
                    continue
                c = t[j]
                d = t[j + 1] if j + 1 < L else t[0]
                delta = dist[a, c] + dist[b, d] - dab - dist[c, d]
                if delta < best:
                    best = delta
                    bi = i
                    bj = j
        if bi < 0:
            return
        lo = bi + 1
        hi = bj
        while lo < hi:
            tmp = t[lo]
            t[lo] = t[hi]
            t[hi] = tmp
            lo += 1
            hi -= 1


@njit(cache=True)
def _insert(t, L, dist, gain, budget):
    n = dist.shape[0]
    on = np.zeros(n, dtype=np.bool_)
    for k in range(L):
        on[t[k]] = True
    length = _length(t, L, dist)
    while L < n:
        best_j = -1
        best_pos = -1
        best_inc = 0
        best_gain = 0
        for j in range(n):
            g = gain[j]
            if on[j] or g <= 0:
                continue
            inc = -1
            pos = -1
            for k in range(L):
                a = t[k]
                b = t[k + 1] if k + 1 < L else t[0]
                v = dist[a, j] + dist[j, b] - dist[a, b]
                if pos < 0 or v < inc:
                    inc = v
                    pos = k
            if length + inc > budget:
                continue
            if best_j < 0:
                better = True
            elif inc <= 0 or best_inc <= 0:
                # non-positive increases rank first, then by gain, then by increase
                if (inc <= 0) != (best_inc <= 0):
                    better = inc <= 0
                elif g != best_gain:
                    better = g > best_gain
                else:
                    better = inc < best_inc
            else:
                better = g * best_inc > best_gain * inc
            if better:
                best_j = j
                best_pos = pos
                best_inc = inc
                best_gain = g
        if best_j < 0:
            break
        for k in range(L, best_pos + 1, -1):
            t[k] = t[k - 1]
        t[best_pos + 1] = best_j
        L += 1
        on[best_j] = True
        length += best_inc
    return L, length


@njit(cache=True)
def _repair(t, L, dist, blocked):
    k = 1
    while k < L:
        i = t[k]
        if blocked[i] and L > 3:
            a = t[k - 1]
            b = t[k + 1] if k + 1 < L else t[0]
            if dist[a, b] <= dist[a, i] + dist[i, b]:
                for m in range(k, L - 1):
                    t[m] = t[m + 1]
                L -= 1
                continue
        k += 1
    return L


@njit(cache=True)
def _prize(t, L, gain):
    s = 0
    for k in range(L):
        s += gain[t[k]]
    return s


@njit(cache=True)
def _improve(t, L, dist, gain, blocked, budget, threshold):
    L = _repair(t, L, dist, blocked)
    if _length(t, L, dist) > budget:
        return L, -1
    p1 = _prize(t, L, gain)
    p2 = -1
    while p2 < p1 <= threshold:
        p2 = p1
        _two_opt(t, L, dist)
        L, _ = _insert(t, L, dist, gain, budget)
        p1 = _prize(t, L, gain)
    return L, p1


@njit(cache=True)
def _scan_pool(pool, sizes, start, stop, dist, gain, blocked, budget, threshold, out):
    """Improve pool tours ``start..stop-1`` under ``gain``.

    Returns (index, size, prize) of the best result, or of the first one
    whose prize exceeds ``threshold``. The winning tour is left in ``out``.
    """
    buf = np.empty(dist.shape[0], dtype=np.int64)
    best_i = -1
    best_L = 0
    best_p = -1
    for i in range(start, stop):
        L = sizes[i]
        for k in range(L):
            buf[k] = pool[i, k]
        L, p = _improve(buf, L, dist, gain, blocked, budget, threshold)
        if p > best_p:
            best_p = p
            best_i = i
            best_L = L
            for k in range(L):
                out[k] = buf[k]
            if p > threshold:
                break
    return best_i, best_L, best_p


@njit(cache=True)
def _build(order, t, dist, budget):
    """Cheapest-insertion of ``order`` into the depot-only tour ``t[:1]``, skipping misfits."""
    L = 1
    length = 0
    for idx in range(order.shape[0]):
        j = order[idx]
        inc = -1
        pos = -1
        for k in range(L):
            a = t[k]
            b = t[k + 1] if k + 1 < L else t[0]
            v = dist[a, j] + dist[j, b] - dist[a, b]
            if pos < 0 or v < inc:
                inc = v
                pos = k
        if length + inc > budget:
            continue
        for k in range(L, pos + 1, -1):
            t[k] = t[k - 1]
        t[pos + 1] = j
        L += 1
        length += inc
    return L, length


def build_tour(order, inst: Instance, z=None) -> Tour | None:
    """Insert ``order`` greedily from the depot, then 2-opt and fill by insertion.

    If fewer than three nodes fit, the nearest collectable nodes are tried
    as seeds. Returns None when no depot cycle with three nodes fits.
    """
    dep = inst.depot
    order = np.asarray([v for v in order if v != dep], dtype=np.int64)
    buf = np.full(inst.n, -1, dtype=np.int64)
    buf[0] = dep
    L, _ = _build(order, buf, inst.dist, inst.distance_budget)
    gain = gain_vector(inst, z)
    if L < 3:
        near = np.argsort(inst.dist[dep], kind="stable")
        near = [int(v) for v in near if v != dep and gain[v] > 0 and v not in buf[:L]]
        near += [int(v) for v in np.argsort(inst.dist[dep], kind="stable") if v != dep and v not in near
                 and v not in buf[:L]]
        seed = np.array(buf[1:L].tolist() + near[: 3 - L], dtype=np.int64)
        buf[:] = -1
        buf[0] = dep
        L, _ = _build(seed, buf, inst.dist, inst.distance_budget)
        if L < 3:
            return None
    _two_opt(buf, L, inst.dist)
    L, _ = _insert(buf, L, inst.dist, gain, inst.distance_budget)
    return Tour.of(buf[:L], inst)


class SolutionPool:
    """Distinct feasible tours, kept in insertion order.

    The pool only grows (up to ``capacity`` when one is given), so callers
    may remember how far they have scanned and look only at newer tours.
    """

    def __init__(self, inst: Instance, capacity: int | None = None):
        self.inst = inst
        self.capacity = capacity
        self.tours: list[Tour] = []
        self._seen: set[tuple[int, ...]] = set()
        self._mat = np.zeros((16, inst.n), dtype=np.int64)
        self._sizes = np.zeros(16, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.tours)

    def __iter__(self):
        return iter(self.tours)

    def __contains__(self, tour) -> bool:
        return canonical(_as_nodes(tour), self.inst.depot) in self._seen

    @property
    def full(self) -> bool:
        return self.capacity is not None and len(self.tours) >= self.capacity

    def add(self, tour) -> bool:
        """Store ``tour`` unless it is a duplicate, infeasible or the pool is full."""
        if tour is None or self.full:
            return False
        t = tour if isinstance(tour, Tour) else Tour.of(tour, self.inst)
        if t.nodes in self._seen or not t.feasible(self.inst):
            return False
        k = len(self.tours)
        if k == len(self._sizes):
            self._mat = np.vstack([self._mat, np.zeros_like(self._mat)])
            self._sizes = np.concatenate([self._sizes, np.zeros_like(self._sizes)])
        self._mat[k, : t.size] = t.nodes
        self._sizes[k] = t.size
        self._seen.add(t.nodes)
        self.tours.append(t)
        return True

    def incidence(self) -> np.ndarray:
        """0/1 matrix with one row per pooled tour."""
        Y = np.zeros((len(self.tours), self.inst.n), dtype=np.int64)
        for k, t in enumerate(self.tours):
            Y[k, list(t.nodes)] = 1
        return Y

    def scan(self, z=None, threshold: int | None = None, start: int = 0,
             stop: int | None = None) -> tuple[Tour | None, int]:
        """Improve pooled tours under ``z`` and return the best result.

        With a ``threshold`` the scan stops at the first tour whose improved
        prize exceeds it. Returns ``(None, -1)`` when there is nothing to scan.
        """
        stop = len(self.tours) if stop is None else stop
        if start >= stop:
            return None, -1
        inst = self.inst
        gain = gain_vector(inst, z)
        blocked = np.zeros(inst.n, dtype=bool) if z is None else np.asarray(z, dtype=float) > 0.5
        thr = NO_THRESHOLD if threshold is None else int(threshold)
        out = np.empty(inst.n, dtype=np.int64)
        i, L, p = _scan_pool(self._mat, self._sizes, start, stop, inst.dist, gain, blocked,
                             inst.distance_budget, thr, out)
        if i < 0:
            return None, -1
        return Tour.of(out[:L], inst), int(p)
