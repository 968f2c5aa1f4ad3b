import itertools

import numpy as np
import pytest

from oig.graphs import FlowNetwork, cut_capacity, max_flow_min_cut, max_weight_spanning_tree, tree_path


def test_single_arc():
    net = FlowNetwork(np.array([[0, 3.0], [0, 0]]), 0, 1)
    value, side = max_flow_min_cut(net)
    assert value == 3 and side.tolist() == [0]


def test_parallel_paths():
    cap = np.zeros((4, 4))
    cap[0, 1] = cap[1, 3] = 1
    cap[0, 2] = cap[2, 3] = 2
    assert max_flow_min_cut(FlowNetwork(cap, 0, 3))[0] == pytest.approx(3)


def test_invalid_networks():
    with pytest.raises(ValueError):
        FlowNetwork(np.array([[0, -1.0], [0, 0]]), 0, 1)
    with pytest.raises(ValueError):
        FlowNetwork(np.zeros((2, 2)), 1, 1)


@pytest.mark.parametrize("seed", range(60))
def test_random_networks_against_cut_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    cap = rng.integers(0, 6, size=(n, n)).astype(float) * (rng.random((n, n)) < 0.6)
    if seed % 2:
        cap = cap / 4.0 + np.triu(cap).T / 3.0
    np.fill_diagonal(cap, 0)
    s, t = 0, n - 1
    value, side = max_flow_min_cut(FlowNetwork(cap, s, t))
    inner = [v for v in range(n) if v not in (s, t)]
    best = min(
        cut_capacity(cap, [s, *chosen])
        for r in range(len(inner) + 1)
        for chosen in itertools.combinations(inner, r)
    )
    assert value == pytest.approx(best, abs=1e-9)
    assert s in side and t not in side
    assert cut_capacity(cap, side) == pytest.approx(value, abs=1e-9)


def test_undirected_network_builder():
    net = FlowNetwork.undirected(3, [(0, 1), (1, 2)], [0.5, 0.7], 0, 2)
    assert max_flow_min_cut(net)[0] == pytest.approx(0.5)


def test_triangle_tree():
    edges = [(0, 1), (1, 2), (0, 2)]
    assert max_weight_spanning_tree(3, edges, [1.0, 0.8, 0.1]) == [0, 1]


def test_equal_weights_tree_size():
    edges = list(itertools.combinations(range(5), 2))
    tree = max_weight_spanning_tree(5, edges, [0.5] * len(edges))
    assert len(tree) == 4


def is_spanning_tree(n, edges):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return len(edges) == n - 1


@pytest.mark.parametrize("seed", range(15))
def test_random_trees_against_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = 8
    edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.45]
    # keep it connected with a random spanning path
    perm = rng.permutation(n)
    edges = sorted(set(edges) | {tuple(sorted((int(a), int(b)))) for a, b in zip(perm, perm[1:])})
    w = np.round(rng.random(len(edges)), 2)
    tree = max_weight_spanning_tree(n, edges, w)
    assert is_spanning_tree(n, [edges[k] for k in tree])
    best = max(
        w[list(c)].sum() for c in itertools.combinations(range(len(edges)), n - 1)
        if is_spanning_tree(n, [edges[k] for k in c])
    )
    assert w[tree].sum() == pytest.approx(best)


def test_tree_path():
    assert tree_path(4, [(0, 1), (1, 2), (1, 3)], 2, 3) == [2, 1, 3]
    assert tree_path(4, [(0, 1)], 0, 3) is None
