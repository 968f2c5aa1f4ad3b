import numpy as np
import pytest

from oig.ga import (
    Estimator, GaParams, crossover, estimate_objective, evolve, greedy, init_pool, make_rng, mutate,
    repair_budget, tournament,
)
from oig.follower import solve_follower
from oig.instance import load_bundled, random_instance
from oig.oracle import oig_exact, op_exact
from oig.tours import SolutionPool


@pytest.fixture(scope="module")
def inst():
    return random_instance(10, 7, "r", interdiction_budget=3)


def test_rng_is_pcg64():
    assert isinstance(make_rng(1).bit_generator, np.random.PCG64)
    assert make_rng(5).random() == make_rng(5).random()


def test_estimator_cache_matches_full_rescan(inst):
    rng = make_rng(0)
    pool = init_pool(inst, 3, rng)
    est = Estimator(inst, pool)
    zs = [(rng.random(inst.n) < 0.3).astype(np.int8) for _ in range(8)]
    for z in zs:
        est(z)
    for z in zs:  # pool has grown since the first call
        fresh = SolutionPool(inst)
        for t in pool:
            fresh.add(t)
        assert est(z)[0] == fresh.scan(z)[1]


def test_estimate_is_a_lower_bound(inst):
    pool = init_pool(inst, 3, make_rng(1))
    rng = np.random.default_rng(3)
    for _ in range(5):
        z = (rng.random(inst.n) < 0.3).astype(np.int8)
        assert estimate_objective(z, pool, inst)[0] <= op_exact(inst, z)[0]


def test_greedy_respects_budget(inst):
    rng = make_rng(2)
    est = Estimator(inst, init_pool(inst, 3, rng))
    for _ in range(5):
        z = greedy(inst, est, 0.4, rng)
        assert z.sum() <= inst.interdiction_budget
        assert not z[inst.prizes == 0].any()


def test_operators():
    rng = make_rng(4)
    a, b = np.zeros(8, np.int8), np.ones(8, np.int8)
    for _ in range(20):
        c = crossover(a, b, rng)
        cut = int(np.argmax(c)) if c.any() else 8
        assert 1 <= cut <= 7 and (c[:cut] == 0).all() and (c[cut:] == 1).all()
        assert (mutate(a, rng) != a).sum() in (0, 1, 2)
    assert tournament([5, 3, 3, 9], 4, rng) == 1


def test_repair_budget_drops_cheapest_first(inst):
    z = np.ones(inst.n, np.int8)
    out = repair_budget(z, inst)
    assert out.sum() == inst.interdiction_budget
    kept = inst.prizes[out == 1]
    dropped = inst.prizes[(z == 1) & (out == 0)]
    assert kept.min() >= dropped.max()


def test_evolve_is_deterministic_and_sound(inst):
    p = GaParams(n_max_iter=150, seed=11)
    r1, r2 = evolve(inst, p), evolve(inst, p)
    assert np.array_equal(r1.z, r2.z) and r1.value == r2.value
    assert r1.z.sum() <= inst.interdiction_budget
    assert r1.value == op_exact(inst, r1.z)[0]
    assert r1.estimate <= r1.value
    exact = oig_exact(inst)[0]
    assert r1.value >= exact and r1.delta(exact) >= 0


def test_final_rounds_feed_exact_replies_back():
    gr17 = load_bundled("gr17", "u", 5)
    one = evolve(gr17, GaParams(seed=0, final_rounds=1))
    more = evolve(gr17, GaParams(seed=0))
    assert more.value <= one.value
    assert more.value == solve_follower(gr17, more.z).value
    assert more.value == 6


def test_params_validation():
    with pytest.raises(ValueError):
        GaParams(K=0)
    with pytest.raises(ValueError):
        GaParams(p_s=1.5)
