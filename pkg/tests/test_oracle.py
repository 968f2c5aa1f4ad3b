import itertools

import numpy as np
import pytest

from oig.instance import Instance, load_bundled, random_instance
from oig.oracle import OracleRefusal, _SparseTables, _Tables, cycle_lengths, feasible_tours, oig_exact, op_exact, tsp_exact
from oig.tours import tour_length, tour_prize


def brute_op(inst, z):
    best = 0
    for t in feasible_tours(inst):
        best = max(best, tour_prize(t, inst, z))
    return best


@pytest.mark.parametrize("seed", range(6))
def test_op_matches_tour_enumeration(seed):
    inst = random_instance(8, seed, "r", euclidean=seed % 2 == 0)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        z = rng.integers(0, 2, inst.n)
        value, tour = op_exact(inst, z)
        assert value == brute_op(inst, z)
        if tour:
            assert tour_length(tour, inst) <= inst.distance_budget
            assert tour_prize(tour, inst, z) == value


@pytest.mark.parametrize("scheme,q,expected", [("u", 5, 6), ("u", 8, 3), ("r", 5, 194), ("r", 8, 118)])
def test_gr17_leader_optimum(scheme, q, expected):
    inst = load_bundled("gr17", scheme, q)
    value, z = oig_exact(inst)
    assert value == expected
    assert z.sum() == q and op_exact(inst, z)[0] == expected


def test_q0_is_plain_op():
    inst = load_bundled("gr17", "r", 0)
    assert oig_exact(inst)[0] == op_exact(inst)[0]


def test_all_interdicted_and_tiny_budget():
    inst = random_instance(8, 1)
    assert op_exact(inst, np.ones(8))[0] == 0
    d = inst.dist
    cheapest = min(d[0, a] + d[a, b] + d[b, 0] for a in range(1, 8) for b in range(a + 1, 8))
    tight = Instance("t", d, inst.prizes, 0, int(cheapest) - 1, 0, inst.tsp_optimum)
    assert op_exact(tight) == (0, [])


@pytest.mark.parametrize("seed", range(10))
def test_restricted_enumeration_equals_full(seed):
    inst = random_instance(int(7 + seed % 4), seed, "ur"[seed % 2], euclidean=seed % 3 != 0)
    for q in range(0, 5):
        assert oig_exact(inst, q)[0] == oig_exact(inst, q, full=True)[0]


def test_monotone_in_z():
    inst = random_instance(10, 4, "r")
    rng = np.random.default_rng(2)
    for _ in range(100):
        z = rng.integers(0, 2, 10)
        z2 = z | rng.integers(0, 2, 10)
        assert op_exact(inst, z2)[0] <= op_exact(inst, z)[0]


def test_bellman_recurrence_spot_check():
    inst = random_instance(9, 7, euclidean=False)
    cyc = cycle_lengths(inst)
    others = list(range(1, 9))
    rng = np.random.default_rng(0)
    for mask in rng.integers(3, 1 << 8, 40):
        nodes = [others[k] for k in range(8) if (int(mask) >> k) & 1]
        if len(nodes) < 2:
            continue
        best = min(tour_length([0, *p], inst) for p in itertools.permutations(nodes))
        assert cyc[int(mask)] == best


def test_tsp_exact_small_cases():
    assert tsp_exact(Instance("k4", 1 - np.eye(4, dtype=int), np.ones(4), 0, 0, 0, 1)) == 4
    assert tsp_exact(load_bundled("gr17")) == 2085
    with pytest.raises(OracleRefusal):
        tsp_exact(load_bundled("fri26"))


def test_size_and_work_guards():
    with pytest.raises(OracleRefusal):
        oig_exact(load_bundled("gr21", "u", 5))
    with pytest.raises(OracleRefusal):
        op_exact(load_bundled("eil51"))
    with pytest.raises(OracleRefusal):
        oig_exact(load_bundled("gr17", "u", 8), work_limit=10)


def test_depot_prize_is_supported():
    base = random_instance(8, 3, "r")
    prizes = base.prizes.copy()
    prizes[0] = 40
    inst = Instance("d", base.dist, prizes, 0, base.distance_budget, 2, base.tsp_optimum)
    value, z = oig_exact(inst, full=True)
    best = min(op_exact(inst, np.isin(np.arange(8), c).astype(int))[0]
               for r in range(3) for c in itertools.combinations(range(8), r))
    assert value == best == op_exact(inst, z)[0]


@pytest.mark.parametrize("seed", range(6))
def test_label_search_matches_full_table(seed):
    inst = random_instance(11, seed, "r", euclidean=seed % 2 == 0)
    sparse, dense = _SparseTables(inst), _Tables(inst)
    rng = np.random.default_rng(seed)
    for _ in range(30):
        blocked = dense.to_mask(rng.integers(0, 2, inst.n))
        assert sparse.best(blocked)[0] == dense.best(blocked)[0]
    S = int(sparse.best(0)[1])
    assert tour_length(sparse.cycle_through(S, 0), inst) == dense.cyc[S]


def test_label_search_on_gr21():
    inst = load_bundled("gr21", "u")
    value, tour = op_exact(inst)
    assert value == tour_prize(tour, inst) and tour_length(tour, inst) <= inst.distance_budget
