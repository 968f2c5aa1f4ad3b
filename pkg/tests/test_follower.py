import numpy as np
import pytest

from oig.follower import (
    CUTOFF_PRUNED, FollowerCutPool, follower_preprocessing, root_relaxation, solve_follower,
)
from oig.instance import load_bundled, random_instance
from oig.oracle import op_exact
from oig.separation import FollowerGraph
from oig.tours import tour_length, tour_prize


def check(inst, z, res):
    assert res.optimal
    assert res.value == op_exact(inst, z)[0]
    if res.value:
        assert tour_length(res.tour, inst) <= inst.distance_budget
        assert tour_prize(res.tour, inst, z) == res.value


@pytest.mark.parametrize("seed", range(10))
def test_matches_oracle_on_random_z(seed):
    inst = random_instance(10, seed, "r" if seed % 2 else "u", euclidean=seed % 3 != 0)
    rng = np.random.default_rng(100 + seed)
    pool = FollowerCutPool()
    for k in range(4):
        z = (rng.random(inst.n) < 0.3).astype(int)
        z[0] = 0
        check(inst, z, solve_follower(inst, z, pool=pool, preprocess=k % 2 == 1,
                                      gsec_increasing=k < 2))


def test_gr17_uninterdicted():
    inst = load_bundled("gr17", "u")
    res = solve_follower(inst)
    assert res.optimal and res.value == 11 == op_exact(inst)[0]


def test_lower_cutoff():
    inst = random_instance(9, 4, "r")
    phi = op_exact(inst)[0]
    above = solve_follower(inst, lower_cutoff=phi - 1)
    assert above.optimal and above.value == phi
    pruned = solve_follower(inst, lower_cutoff=phi)
    assert pruned.status == CUTOFF_PRUNED and pruned.bound == phi


def test_everything_interdicted_gives_zero():
    inst = random_instance(8, 1)
    res = solve_follower(inst, np.ones(inst.n))
    assert res.optimal and res.value == 0


def test_preprocessing_fixes_nodes_without_shortcuts():
    inst = random_instance(9, 5)
    g = FollowerGraph.of(inst)
    z = np.zeros(inst.n)
    z[1:5] = 1
    fixed, groups = follower_preprocessing(inst, z, g)
    d = inst.dist
    for i in fixed:
        assert not any(d[a, i] + d[i, b] < d[a, b] for a in range(inst.n) for b in range(inst.n)
                       if len({a, b, i}) == 3 and g.pos[a] >= 0 and g.pos[b] >= 0
                       and g.x_var(a, i) >= 0 and g.x_var(i, b) >= 0)
    assert set(fixed) | set(groups) <= {1, 2, 3, 4}


def test_root_relaxation_bounds_the_optimum():
    inst = random_instance(10, 2, "r")
    x, y = root_relaxation(inst)
    g = FollowerGraph.of(inst)
    assert g.gains() @ y >= op_exact(inst)[0] - 1e-6
    assert g.length @ x <= inst.distance_budget + 1e-6
