import numpy as np
import pytest

from oig.lp import CUTOFF, INFEASIBLE, OPTIMAL, UNBOUNDED, LpModel
from lp_oracle import random_model, vertex_optimum


def build(sense, c, lo, hi, rows):
    m = LpModel(sense)
    for j in range(len(c)):
        m.add_var(lo[j], hi[j], c[j])
    for a, s, b in rows:
        m.add_row(np.arange(len(c)), a, s, b)
    return m


def test_bound_attained():
    m = LpModel("max")
    m.add_var(0, 1, 1.0)
    sol = m.solve()
    assert sol.status == OPTIMAL and sol.objective == 1.0 and sol.x[0] == 1.0


def test_single_binding_row():
    m = LpModel("max")
    x, y = m.add_var(0, 1, 1), m.add_var(0, 1, 1)
    m.add_row([x, y], [1, 1], "<=", 1.5)
    assert m.solve().objective == pytest.approx(1.5)


def test_two_variable_vertex():
    # vertices of {x+y<=4, x+3y<=6, 0<=x,y<=4}: (0,0) (4,0) (3,1) (0,2) -> 3x+2y max 12 at (4,0)
    m = build("max", np.array([3.0, 2.0]), np.zeros(2), np.full(2, 4.0),
              [(np.array([1.0, 1.0]), "<=", 4), (np.array([1.0, 3.0]), "<=", 6)])
    sol = m.solve()
    assert sol.objective == pytest.approx(12.0)
    np.testing.assert_allclose(sol.x, [4.0, 0.0], atol=1e-9)


def test_redundant_row_keeps_optimum():
    m = build("max", np.array([3.0, 2.0]), np.zeros(2), np.full(2, 4.0),
              [(np.array([1.0, 1.0]), "<=", 4)])
    before = m.solve().objective
    m.add_row([0, 1], [1, 1], "<=", 10)
    assert m.solve().objective == pytest.approx(before)


def test_binding_cut_after_solve():
    m = LpModel("max")
    m.add_var(0, 1, 1)
    m.add_var(0, 1, 1)
    assert m.solve().objective == pytest.approx(2.0)
    m.add_row([0, 1], [1, 1], "<=", 1)
    assert m.solve().objective == pytest.approx(1.0)


def test_contradictory_rows_infeasible():
    m = LpModel("max")
    m.add_var(0, 1, 1)
    m.solve()
    m.add_rows([([0], [1], ">=", 0.8), ([0], [1], "<=", 0.2)])
    assert m.solve().status == INFEASIBLE


def test_cutoff():
    m = LpModel("max")
    m.add_var(0, 1, 1)
    m.add_var(0, 1, 1)
    m.add_row([0, 1], [1, 1], "<=", 1.5)
    assert m.solve(cutoff=1.6).status == CUTOFF
    m2 = LpModel("max")
    m2.add_var(0, 1, 1)
    m2.add_var(0, 1, 1)
    m2.add_row([0, 1], [1, 1], "<=", 1.5)
    assert m2.solve(cutoff=1.4).status == OPTIMAL


def test_unbounded_reported():
    m = LpModel("max")
    m.add_var(0, np.inf, 1.0)
    m.add_var(0, 1, 0.0)
    m.add_row([0, 1], [1, -1], ">=", 0)
    assert m.solve().status == UNBOUNDED


def test_bound_change_and_objective_change_warm():
    rng = np.random.default_rng(3)
    for _ in range(60):
        sense, c, lo, hi, rows = random_model(rng)
        m = build(sense, c, lo, hi, rows)
        m.solve()
        j = int(rng.integers(len(c)))
        new_lo, new_hi = lo.copy(), hi.copy()
        new_lo[j] = new_hi[j] = float(rng.integers(lo[j], hi[j] + 1))
        m.set_bounds(j, new_lo[j], new_hi[j])
        c2 = rng.integers(-5, 6, size=len(c)).astype(float)
        m.set_objective(c2)
        sol = m.solve()
        ref = vertex_optimum(sense, c2, new_lo, new_hi, rows)
        if ref is None:
            assert sol.status == INFEASIBLE
        else:
            assert sol.status == OPTIMAL and sol.objective == pytest.approx(ref, abs=1e-6)


def test_remove_nonbinding_rows():
    m = LpModel("max")
    m.add_var(0, 1, 1)
    m.add_var(0, 1, 1)
    m.add_row([0, 1], [1, 1], "<=", 1.0)
    m.add_row([0, 1], [1, 1], "<=", 5.0, )
    m.solve()
    removed = m.remove_rows([0, 1])
    assert removed == [1] and m.n_rows == 1
    assert m.solve().objective == pytest.approx(1.0)


def test_deterministic():
    rng = np.random.default_rng(11)
    model = random_model(rng)
    a, b = build(*model).solve(), build(*model).solve()
    assert a.status == b.status and np.array_equal(a.x, b.x)


@pytest.mark.parametrize("seed", range(5))
def test_adding_rows_never_improves(seed):
    rng = np.random.default_rng(100 + seed)
    for _ in range(30):
        sense, c, lo, hi, rows = random_model(rng)
        m = build(sense, c, lo, hi, rows)
        prev = m.solve()
        for _ in range(3):
            a = rng.integers(-3, 4, size=len(c)).astype(float)
            m.add_row(np.arange(len(c)), a, "<=", float(rng.integers(-2, 6)))
            cur = m.solve()
            if prev.status != OPTIMAL:
                assert cur.status == INFEASIBLE
                continue
            if cur.status == OPTIMAL:
                if sense == "max":
                    assert cur.objective <= prev.objective + 1e-6
                else:
                    assert cur.objective >= prev.objective - 1e-6
            prev = cur
