import math

import numpy as np
import pytest

from oig.follower import solve_follower
from oig.instance import load_bundled, random_instance
from oig.leader import (
    SETTINGS, Features, cut_value, find_heuristic_fol_soln, gap, separate_fractional, solve_oig,
)
from oig.oracle import oig_exact, op_exact
from oig.tours import SolutionPool


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("setting", SETTINGS)
def test_matches_oracle(seed, setting):
    inst = random_instance(9, seed, "r" if seed % 2 else "u", interdiction_budget=1 + seed % 3,
                           euclidean=seed % 3 != 2)
    expected, _ = oig_exact(inst)
    res = solve_oig(inst, setting)
    assert res.status == "optimal"
    assert res.value == expected
    assert res.bound == pytest.approx(expected)
    assert res.z.sum() <= inst.interdiction_budget
    assert op_exact(inst, res.z)[0] == expected


def test_gr17_unit_q5_all_settings_agree():
    inst = load_bundled("gr17", "u", 5)
    values = {s: solve_oig(inst, s).value for s in SETTINGS}
    assert set(values.values()) == {6}


def test_zero_budget_is_plain_orienteering():
    inst = random_instance(9, 3, "r", interdiction_budget=0)
    res = solve_oig(inst)
    assert res.value == op_exact(inst)[0] and res.z.sum() == 0


def test_time_limit_reports_consistent_bounds():
    inst = load_bundled("gr21", "r", 8)
    res = solve_oig(inst, "IFHC", time_limit=0.5)
    assert res.status in ("optimal", "time_out")
    assert res.bound <= res.value + 1e-6
    if res.status == "time_out":
        assert res.gap > 0
    if math.isfinite(res.value):
        assert solve_follower(inst, res.z).value == res.value
    else:  # stopped before the first follower solve finished
        assert res.status == "time_out"


def test_features_are_cumulative():
    flags = [Features.of(s) for s in SETTINGS]
    assert not flags[0].solution_pool
    assert [f.fractional for f in flags] == [False, True, True, True, True]
    assert [f.preprocess for f in flags] == [False] * 4 + [True]
    with pytest.raises(ValueError):
        Features.of("X")


def test_gap():
    assert gap(10, 8) == pytest.approx(20)
    assert gap(0, 0) == 0
    assert gap(float("inf"), 3) == 100


def test_pool_heuristics():
    inst = random_instance(9, 1, "r")
    phi, tour = op_exact(inst)
    pool = SolutionPool(inst)
    pool.add(tour)
    z = np.zeros(inst.n)
    assert find_heuristic_fol_soln(inst, z, phi - 1, pool)[1] == phi
    assert find_heuristic_fol_soln(inst, z, phi, pool) is None
    zf = np.full(inst.n, 0.25)
    zf[0] = 0
    t = cut_value(inst, tour, zf) - 1
    found = separate_fractional(inst, zf, t, pool)
    assert found and all(cut_value(inst, c, zf) > t for c in found)
    assert separate_fractional(inst, zf, phi, pool) == []
