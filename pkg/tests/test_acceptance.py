"""Acceptance criteria 1 to 9, one verdict line each (see the terminal summary).

These runs take a while (the full file is on the order of an hour on one
core). Deselect them with ``-m "not acceptance"``.
"""
import itertools
import time

import numpy as np
import pytest
from acceptance_report import report
from lp_oracle import random_model, vertex_optimum

from oig import leader as leader_mod
from oig.bench import csv_text, run
from oig.follower import solve_follower
from oig.ga import GaParams, evolve
from oig.instance import load_bundled, random_instance
from oig.leader import SETTINGS, solve_oig
from oig.lp import LpModel
from oig.oracle import feasible_tours, oig_exact, op_exact
from oig.separation import FollowerGraph, separate_cycle_cover, separate_gsec, separate_logical
from oig.tours import tour_length

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

# exact optima by (instance, scheme): values for Q = 5 and Q = 8
TABLE = {
    ("gr17", "u"): (6, 3), ("gr17", "r"): (194, 118),
    ("gr21", "u"): (7, 5), ("gr21", "r"): (303, 191),
    ("gr24", "u"): (8, 6), ("gr24", "r"): (430, 304),
    ("bays29", "u"): (13, 11),
    ("fri26", "u"): (9, 7), ("fri26", "r"): (410, 301),
}
GA_REFERENCE = dict(TABLE)
GA_REFERENCE.update({("bayg29", "u"): (12, 11), ("bayg29", "r"): (603, 474), ("bays29", "r"): (630, 463)})
# the table's 301 is beaten: interdicting 0-based nodes 2 4 9 11 13 14 16 18 leaves 293,
# and every setting proves 293 optimal, so the GA is measured against that
GA_REFERENCE[("fri26", "r")] = (410, 293)
TIME_LIMIT = 600.0


def table_runs():
    for (name, scheme), values in TABLE.items():
        for q, expected in zip((5, 8), values):
            yield name, scheme, q, expected


@pytest.fixture(scope="module")
def matrix():
    """Every criterion-2 instance under every setting: {(name, scheme, q): {setting: record}}."""
    for s in SETTINGS:  # load every compiled kernel before timing anything
        solve_oig(load_bundled("gr17", "r", 5), s)
    out = {}
    for name, scheme, q, _ in table_runs():
        inst = load_bundled(name, scheme, q)
        out[name, scheme, q] = {s: run(inst, "exact", s, TIME_LIMIT) for s in SETTINGS}
    return out


def test_criterion_1_bayg29_figure():
    got, slow = [], []
    for q, expected in ((0, 16), (5, 12), (8, 11)):
        res = solve_oig(load_bundled("bayg29", "u", q), "IFHC")
        got.append((q, res.value, expected, round(res.seconds, 1)))
        if res.seconds > 300:
            slow.append(q)
    ok = all(v == e for _, v, e, _ in got) and not slow
    report(1, ok, "bayg29/u (Q, value, expected, s): " + ", ".join(map(str, got)))


def test_criterion_2_table_values(matrix):
    bad = []
    for name, scheme, q, expected in table_runs():
        rec = matrix[name, scheme, q]["IFHC"]
        if rec.status != "optimal" or rec.value != expected or rec.t > TIME_LIMIT:
            bad.append(f"{name}/{scheme}/Q={q}: {rec.value} ({rec.status}) vs {expected}")
    worst = max(r["IFHC"].t for r in matrix.values())
    report(2, not bad, f"{len(matrix) - len(bad)}/{len(matrix)} match, slowest {worst:.1f}s " + "; ".join(bad))


def test_criterion_3_oracle_equivalence():
    bad, count = [], 0
    for scheme in "ur":
        base = load_bundled("gr17", scheme)
        for q in range(9):
            inst = base.with_budget(q)
            expected = oig_exact(inst)[0]
            value = solve_oig(inst, "IFHC").value
            count += 1
            if value != expected:
                bad.append(f"gr17/{scheme}/Q={q}: {value} vs {expected}")
    rng = np.random.default_rng(2024)
    for k in range(20):
        n = int(rng.integers(8, 15))
        inst = random_instance(n, 1000 + k, "ur"[k % 2], interdiction_budget=int(rng.integers(1, 5)),
                               euclidean=k % 3 != 0)
        expected = oig_exact(inst)[0]
        value = solve_oig(inst, "IFHC").value
        count += 1
        if value != expected:
            bad.append(f"{inst.label()}: {value} vs {expected}")
    report(3, not bad, f"{count - len(bad)}/{count} agree " + "; ".join(bad))


def test_criterion_4_follower_exactness():
    start = time.monotonic()
    bad, count = [], 0
    rng = np.random.default_rng(4)
    for name in ("gr17", "gr21", "gr24", "fri26"):
        inst = load_bundled(name, "r")
        for _ in range(50):
            z = (rng.random(inst.n) < rng.uniform(0.05, 0.5)).astype(int)
            count += 1
            got, expected = solve_follower(inst, z).value, op_exact(inst, z)[0]
            if got != expected:
                bad.append(f"{name}: {got} vs {expected}")
    elapsed = time.monotonic() - start
    report(4, not bad and elapsed < 600, f"{count - len(bad)}/{count} agree in {elapsed:.1f}s " + "; ".join(bad))


def test_criterion_5_setting_consistency(matrix):
    split, faster, compared = [], 0, 0
    for key, recs in matrix.items():
        done = {s: r for s, r in recs.items() if r.status == "optimal"}
        if len({r.value for r in done.values()}) > 1:
            split.append(f"{key}: " + ", ".join(f"{s}={r.value}" for s, r in done.items()))
        if "IFHC" in done and "I" in recs:
            compared += 1
            faster += recs["I"].status != "optimal" or done["IFHC"].t <= recs["I"].t
    share = faster / compared if compared else 0.0
    report(5, not split and share >= 0.8,
           f"values agree on {len(matrix) - len(split)}/{len(matrix)}, IFHC no later than I on "
           f"{faster}/{compared} ({100 * share:.0f}%) " + "; ".join(split))


def test_criterion_6_cut_validity(monkeypatch):
    emitted = []
    real_add = leader_mod._Master.add

    def spy(self, tour):
        emitted.append((self.inst.name, tuple(tour.nodes)))
        return real_add(self, tour)

    monkeypatch.setattr(leader_mod._Master, "add", spy)
    violations, checked = 0, 0
    for k in range(12):
        n = 6 + k % 5
        inst = random_instance(n, 600 + k, "ur"[k % 2], interdiction_budget=1 + k % 3, euclidean=k % 3 != 1)
        tours = list(feasible_tours(inst))
        g = FollowerGraph.of(inst)
        pts = np.array([g.point(list(t)) for t in tours]).reshape(len(tours), g.n_vars)
        # follower cuts at random points
        rng = np.random.default_rng(k)
        probes = [rng.uniform(0, 1, g.n_vars) for _ in range(30)] if tours else []
        for v in probes:
            x, y = g.split(v)
            for c in separate_logical(g, x, y) + separate_gsec(g, x, y) + separate_cycle_cover(g, x, y):
                act = pts[:, c.idx] @ c.coef
                ok = act <= c.rhs + 1e-9 if c.sense == "<=" else act >= c.rhs - 1e-9
                violations += int((~ok).sum())
                checked += len(pts)
        # interdiction cuts against every (z, Phi(z)) with |z| <= Q
        start = len(emitted)
        for setting in SETTINGS:
            solve_oig(inst, setting)
        cut_tours = {t for name, t in emitted[start:]}
        zs = [np.isin(np.arange(n), c).astype(int) for r in range(inst.interdiction_budget + 1)
              for c in itertools.combinations(range(1, n), r)]
        phi = [op_exact(inst, z)[0] for z in zs]
        for t in cut_tours:
            idx = list(t)
            for z, f in zip(zs, phi):
                checked += 1
                violations += int(inst.prizes[idx] @ (1 - z[idx]) > f)
            violations += int(tour_length(t, inst) > inst.distance_budget)
    report(6, violations == 0 and checked > 0, f"{violations} violations in {checked} checks")


def test_criterion_7_ga_quality():
    worst, over, slow, zero_misses = 0.0, [], [], []
    for (name, scheme), values in GA_REFERENCE.items():
        for q, ref in zip((5, 8), values):
            inst = load_bundled(name, scheme, q)
            exact_hits = 0
            for seed in range(3):
                res = evolve(inst, GaParams(seed=seed))
                d = res.delta(ref)
                worst = max(worst, d)
                if d > 15:
                    over.append(f"{inst.label()} s{seed} {d:.1f}%")
                if res.seconds > 180:
                    slow.append(f"{inst.label()} s{seed} {res.seconds:.0f}s")
                exact_hits += d == 0
            if scheme == "u" and name in ("gr17", "gr21") and exact_hits < 2:
                zero_misses.append(f"{inst.label()} {exact_hits}/3")
    ok = not over and not slow and not zero_misses
    report(7, ok, f"max delta {worst:.2f}% " + " ".join(over + slow + zero_misses))


def test_criterion_8_lp_engine():
    rng = np.random.default_rng(8)
    bad = 0
    for _ in range(500):
        sense, c, lo, hi, rows = random_model(rng)
        m = LpModel(sense)
        m.add_vars(lo, hi, c)
        for a, s, b in rows:
            m.add_row(list(range(len(c))), a, s, b)
        sol = m.solve()
        ref = vertex_optimum(sense, c, lo, hi, rows)
        if sol.status == "iteration_limit":
            bad += 1
        elif ref is None:
            bad += sol.status != "infeasible"
        else:
            bad += sol.status != "optimal" or abs(sol.objective - ref) > 1e-6
    report(8, bad == 0, f"{500 - bad}/500 models agree with vertex enumeration")


def test_criterion_9_determinism(matrix):
    differ = []
    for name, scheme, q, _ in table_runs():
        first = csv_text([matrix[name, scheme, q]["IFHC"]], times=False)
        again = csv_text([run(load_bundled(name, scheme, q), "exact", "IFHC", TIME_LIMIT)], times=False)
        if first != again:
            differ.append(f"{name}/{scheme}/Q={q}")
    inst = load_bundled("gr21", "r", 8)
    ga = [csv_text([run(inst, "ga", seed=3)], times=False) for _ in range(2)]
    if ga[0] != ga[1]:
        differ.append("GA gr21/r/Q=8")
    report(9, not differ, f"{len(TABLE) * 2 + 1 - len(differ)}/{len(TABLE) * 2 + 1} CSVs byte-identical "
           + " ".join(differ))
