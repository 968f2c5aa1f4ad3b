"""Max-flow/min-cut and maximum-weight spanning trees on small dense graphs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

FLOW_EPS = 1e-12


@dataclass
class FlowNetwork:
    """Arc capacities as a dense ``(n, n)`` matrix; ``cap[u, v]`` is the arc u -> v."""

    cap: np.ndarray
    source: int
    sink: int

    def __post_init__(self):
        self.cap = np.asarray(self.cap, dtype=float)
        if self.cap.ndim != 2 or self.cap.shape[0] != self.cap.shape[1]:
            raise ValueError("capacities must be a square matrix")
        if np.any(self.cap < 0) or not np.all(np.isfinite(self.cap)):
            raise ValueError("capacities must be finite and nonnegative")
        if self.source == self.sink:
            raise ValueError("source and sink coincide")

    @classmethod
    def undirected(cls, n: int, edges, weights, source: int, sink: int) -> "FlowNetwork":
        """Each undirected edge becomes two opposite arcs of the same capacity."""
        cap = np.zeros((n, n))
        for (u, v), w in zip(edges, weights):
            cap[u, v] += w
            cap[v, u] += w
        return cls(cap, source, sink)


def max_flow_min_cut(net: FlowNetwork) -> tuple[float, np.ndarray]:
    """Edmonds-Karp. Returns the flow value and the sorted source side of a minimum cut."""
    value, side = _edmonds_karp(net.cap.copy(), net.source, net.sink)
    return float(value), np.flatnonzero(side)


def cut_capacity(cap: np.ndarray, side) -> float:
    mask = np.zeros(len(cap), dtype=bool)
    mask[np.asarray(side, dtype=int)] = True
    return float(cap[np.ix_(mask, ~mask)].sum())


@njit(cache=True)
def _edmonds_karp(res, s, t):
    n = res.shape[0]
    flow = 0.0
    parent = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    while True:
        parent[:] = -1
        parent[s] = s
        head = 0
        tail = 1
        queue[0] = s
        while head < tail and parent[t] < 0:
            u = queue[head]
            head += 1
            for v in range(n):
                if parent[v] < 0 and res[u, v] > FLOW_EPS:
                    parent[v] = u
                    queue[tail] = v
                    tail += 1
        if parent[t] < 0:
            side = parent >= 0
            return flow, side
        push = np.inf
        v = t
        while v != s:
            u = parent[v]
            if res[u, v] < push:
                push = res[u, v]
            v = u
        v = t
        while v != s:
            u = parent[v]
            res[u, v] -= push
            res[v, u] += push
            v = u
        flow += push


class _DisjointSets:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def max_weight_spanning_tree(n: int, edges, weights) -> list[int]:
    """Kruskal on descending weight, ties by edge index.

    Returns indices into ``edges``. On a disconnected graph the result is a
    maximum spanning forest.
    """
    weights = np.asarray(weights, dtype=float)
    order = np.argsort(-weights, kind="stable")
    ds = _DisjointSets(n)
    tree = []
    for k in order.tolist():
        u, v = edges[k]
        if ds.union(int(u), int(v)):
            tree.append(k)
            if len(tree) == n - 1:
                break
    return sorted(tree)


def tree_path(n: int, tree_edges, a: int, b: int) -> list[int] | None:
    """Node sequence from ``a`` to ``b`` along a forest given as (u, v) pairs."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in tree_edges:
        adj[u].append(v)
        adj[v].append(u)
    prev = {a: a}
    stack = [a]
    while stack:
        u = stack.pop()
        if u == b:
            break
        for v in adj[u]:
            if v not in prev:
                prev[v] = u
                stack.append(v)
    if b not in prev:
        return None
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return path[::-1]
