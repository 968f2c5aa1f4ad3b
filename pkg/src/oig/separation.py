"""The follower's reduced graph and its three cut families.

A ``FollowerGraph`` keeps only what a budget-feasible tour can use: node
``i`` survives when ``2 * sp(depot, i) <= B`` and edge ``uv`` when
``sp(depot, u) + d(u, v) + sp(v, depot) <= B`` in some orientation, with
``sp`` the shortest-path distances. Both tests are necessary conditions
for membership in a feasible cycle, so dropping the rest changes nothing.

Model variables are laid out as ``x`` (one per kept edge) followed by
``y`` (one per kept node, depot first). Cuts are returned as ``Cut``
records over those indices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import FlowNetwork, max_flow_min_cut, max_weight_spanning_tree
from .instance import Instance

VIOLATION_TOL = 1e-6
SUPPORT_EPS = 1e-9


@dataclass(frozen=True)
class Cut:
    kind: str  # "gsec", "logical", "cc"
    key: tuple
    idx: np.ndarray
    coef: np.ndarray
    sense: str
    rhs: float

    def row(self):
        return self.idx, self.coef, self.sense, self.rhs

    def activity(self, v: np.ndarray) -> float:
        return float(self.coef @ v[self.idx])

    def violation(self, v: np.ndarray) -> float:
        a = self.activity(v)
        return a - self.rhs if self.sense == "<=" else self.rhs - a


def shortest_paths(dist: np.ndarray) -> np.ndarray:
    sp = np.array(dist, dtype=np.int64)
    for k in range(len(sp)):
        np.minimum(sp, sp[:, k, None] + sp[None, k, :], out=sp)
    return sp


class FollowerGraph:
    def __init__(self, inst: Instance):
        self.inst = inst
        B, dep = inst.distance_budget, inst.depot
        sp = shortest_paths(inst.dist)
        self.sp = sp
        reach = 2 * sp[dep] <= B
        order = [dep] + [i for i in range(inst.n) if i != dep and reach[i]]
        self.nodes = np.array(order, dtype=np.int64)
        self.pos = np.full(inst.n, -1, dtype=np.int64)
        self.pos[self.nodes] = np.arange(len(order))
        edges = []
        for a in range(len(order)):
            for b in range(a + 1, len(order)):
                u, v = order[a], order[b]
                lo = min(sp[dep, u] + sp[v, dep], sp[dep, v] + sp[u, dep])
                if lo + inst.dist[u, v] <= B:
                    edges.append((a, b))
        self.edges = np.array(edges, dtype=np.int64).reshape(-1, 2)  # model node positions
        self.m = len(edges)
        self.nn = len(order)
        self.length = inst.dist[self.nodes[self.edges[:, 0]], self.nodes[self.edges[:, 1]]].astype(np.int64)
        self.edge_id = {(int(a), int(b)): k for k, (a, b) in enumerate(self.edges)}
        self.incident: list[list[int]] = [[] for _ in range(self.nn)]
        for k, (a, b) in enumerate(self.edges):
            self.incident[a].append(k)
            self.incident[b].append(k)

    @classmethod
    def of(cls, inst: Instance) -> "FollowerGraph":
        key = ("follower_graph", inst.distance_budget)
        g = inst.meta.get(key)
        if g is None:
            g = inst.meta[key] = cls(inst)
        return g

    @property
    def n_vars(self) -> int:
        return self.m + self.nn

    def y_var(self, node: int) -> int:
        """Variable index of original node ``node`` (-1 when pruned)."""
        p = int(self.pos[node])
        return -1 if p < 0 else self.m + p

    def x_var(self, u: int, v: int) -> int:
        a, b = int(self.pos[u]), int(self.pos[v])
        if a < 0 or b < 0:
            return -1
        return self.edge_id.get((min(a, b), max(a, b)), -1)

    def point(self, tour) -> np.ndarray | None:
        """Model vector of a tour, or None if the tour uses a pruned node or edge."""
        v = np.zeros(self.n_vars)
        t = list(tour)
        for a, b in zip(t, t[1:] + t[:1]):
            k = self.x_var(a, b)
            if k < 0:
                return None
            v[k] = 1
        for i in t:
            v[self.y_var(i)] = 1
        return v

    def gains(self, z=None) -> np.ndarray:
        p = self.inst.prizes[self.nodes].astype(float)
        if z is not None:
            p = np.where(np.asarray(z, dtype=float)[self.nodes] > 0.5, 0.0, p)
        return p

    def split(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return v[: self.m], v[self.m: self.m + self.nn]

    # ------------------------------------------------------------ cut builders
    def gsec(self, side: np.ndarray, j: int) -> Cut:
        """sum of x over delta(S) >= 2 y_j, S given as model node positions."""
        inside = np.zeros(self.nn, dtype=bool)
        inside[side] = True
        cross = np.flatnonzero(inside[self.edges[:, 0]] != inside[self.edges[:, 1]])
        idx = np.concatenate([cross, [self.m + j]])
        coef = np.concatenate([np.ones(len(cross)), [-2.0]])
        key = (tuple(int(self.nodes[s]) for s in np.sort(side)), int(self.nodes[j]))
        return Cut("gsec", key, idx, coef, ">=", 0.0)

    def logical(self, e: int, j: int) -> Cut:
        key = (tuple(int(self.nodes[s]) for s in self.edges[e]), int(self.nodes[j]))
        return Cut("logical", key, np.array([e, self.m + j]), np.array([1.0, -1.0]), "<=", 0.0)

    def cycle_cover(self, cycle_nodes: list[int], cycle_edges: list[int]) -> Cut:
        idx = np.concatenate([np.asarray(cycle_edges, dtype=np.int64), self.m + np.asarray(cycle_nodes)])
        coef = np.concatenate([np.ones(len(cycle_edges)), -np.ones(len(cycle_nodes))])
        key = tuple(sorted(int(self.nodes[j]) for j in cycle_nodes))
        return Cut("cc", key, idx, coef, "<=", -1.0)


# ---------------------------------------------------------------- separators
def separate_logical(g: FollowerGraph, x: np.ndarray, y: np.ndarray,
                     tol: float = VIOLATION_TOL) -> list[Cut]:
    """x_e <= y_j for every violated node-edge pair."""
    cuts = []
    for side in (0, 1):
        ends = g.edges[:, side]
        for e in np.flatnonzero(x > y[ends] + tol):
            cuts.append(g.logical(int(e), int(ends[e])))
    return cuts


def separate_gsec(g: FollowerGraph, x: np.ndarray, y: np.ndarray, tol: float = VIOLATION_TOL,
                  increasing: bool = True) -> list[Cut]:
    """Max-flow separation of generalized subtour elimination constraints.

    Non-depot nodes are visited by ``y`` (non-decreasing by default, ties
    by position) and each gets a depot-to-node min cut on the support graph.
    """
    support = np.flatnonzero(x > SUPPORT_EPS)
    cap = np.zeros((g.nn, g.nn))
    a, b = g.edges[support, 0], g.edges[support, 1]
    cap[a, b] = x[support]
    cap[b, a] = x[support]
    cand = [j for j in range(1, g.nn) if y[j] > SUPPORT_EPS]
    cand.sort(key=lambda j: (y[j] if increasing else -y[j], j))
    cuts, seen = [], set()
    for j in cand:
        value, side = max_flow_min_cut(FlowNetwork(cap, 0, j))
        if value < 2 * y[j] - tol:
            cut = g.gsec(side, j)
            if cut.key not in seen:
                seen.add(cut.key)
                cuts.append(cut)
    return cuts


def separate_cycle_cover(g: FollowerGraph, x: np.ndarray, y: np.ndarray,
                         tol: float = VIOLATION_TOL) -> list[Cut]:
    """Cycle-cover cuts from over-budget cycles closed by non-tree support edges."""
    support = np.flatnonzero(x > SUPPORT_EPS)
    if support.size == 0:
        return []
    pairs = [tuple(map(int, g.edges[k])) for k in support]
    tree = set(max_weight_spanning_tree(g.nn, pairs, x[support]))
    # root the forest at the depot
    adj: list[list[tuple[int, int]]] = [[] for _ in range(g.nn)]
    for t in tree:
        u, v = pairs[t]
        adj[u].append((v, int(support[t])))
        adj[v].append((u, int(support[t])))
    parent = np.full(g.nn, -1)
    pedge = np.full(g.nn, -1)
    branch = np.full(g.nn, -1)  # child of the depot whose subtree holds the node
    parent[0] = 0
    stack = [0]
    while stack:
        u = stack.pop()
        for v, e in adj[u]:
            if parent[v] < 0:
                parent[v], pedge[v] = u, e
                branch[v] = v if u == 0 else branch[u]
                stack.append(v)
    B = g.inst.distance_budget
    cuts = []
    for t, (u, v) in enumerate(pairs):
        if t in tree or parent[u] < 0 or parent[v] < 0:
            continue
        if u != 0 and v != 0 and branch[u] == branch[v]:
            continue  # the closed cycle avoids the depot
        nodes, edges = [], [int(support[t])]
        for w in (u, v):
            while w != 0:
                nodes.append(w)
                edges.append(int(pedge[w]))
                w = parent[w]
        nodes.append(0)
        if g.length[edges].sum() <= B:
            continue
        cut = g.cycle_cover(nodes, edges)
        if cut.violation(np.concatenate([x, y])) > tol:
            cuts.append(cut)
    return cuts
