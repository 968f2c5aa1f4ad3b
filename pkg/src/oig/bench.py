"""Run records, dispatch to the solvers, and CSV reports.

One ``RunRecord`` per solver run. Aggregate rows average a group of runs
with the same leader budget and method and count how many were solved to
optimality. Rounding to two decimals happens only when writing.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .follower import solve_follower
from .ga import GaParams, evolve
from .instance import Instance
from .leader import SETTINGS, solve_oig
from .oracle import oig_exact

MODES = ("exact", "ga", "oracle")

COLUMNS = [
    ("instance", "instance"), ("scheme", "scheme"), ("Q", "Q"), ("method", "method"), ("seed", "seed"),
    ("status", "status"), ("value", "value"), ("bound", "bound"), ("t", "t(s)"), ("t_sep", "t_SEP(s)"),
    ("gap", "Gap(%)"), ("rgap", "rGap(%)"), ("nodes", "nBBnode"), ("int_cuts", "intCuts"),
    ("frac_cuts", "fracCuts"), ("n_opt", "nOpt"), ("delta", "delta(%)"), ("z", "z"),
]
TIME_COLUMNS = ("t", "t_sep")
ROUNDED = ("t", "t_sep", "gap", "rgap", "bound", "delta")


@dataclass
class RunRecord:
    instance: str
    scheme: str
    Q: int
    method: str  # a setting, "GA" or "oracle"
    seed: int = 0
    status: str = "optimal"
    value: float | None = None
    bound: float | None = None
    t: float = 0.0
    t_sep: float | None = None
    gap: float | None = None
    rgap: float | None = None
    nodes: float | None = None
    int_cuts: float | None = None
    frac_cuts: float | None = None
    n_opt: int | None = None  # aggregate rows only
    delta: float | None = None  # GA rows, when an exact value is known
    z: str = ""  # interdicted nodes, 1-based, space separated
    solution: dict = field(default_factory=dict, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def z_label(z) -> str:
    return " ".join(str(int(i) + 1) for i in np.flatnonzero(np.asarray(z) > 0.5))


# ---------------------------------------------------------------- runners
def run_exact(inst: Instance, setting: str = "IFHC", time_limit: float | None = None,
              seed: int = 0) -> RunRecord:
    res = solve_oig(inst, setting, time_limit=time_limit, seed=seed)
    phi = None
    if res.status == "optimal":
        phi = solve_follower(inst, res.z).value
    rec = RunRecord(
        inst.name, inst.scheme, inst.interdiction_budget, setting, seed, res.status,
        value=res.value, bound=res.bound, t=res.seconds, t_sep=res.sep_seconds, gap=res.gap,
        rgap=res.root_gap, nodes=res.nodes, int_cuts=res.int_cuts, frac_cuts=res.frac_cuts,
        z=z_label(res.z),
    )
    rec.solution = solution_dict(inst, rec, res.z, res.tour, value=res.value, phi=phi)
    return rec


def run_ga(inst: Instance, seed: int = 0, params: GaParams | None = None,
           time_limit: float | None = None) -> RunRecord:
    params = GaParams(seed=seed) if params is None else params
    res = evolve(inst, params, follower_time_limit=time_limit)
    rec = RunRecord(inst.name, inst.scheme, inst.interdiction_budget, "GA", params.seed, "optimal",
                    value=res.value, bound=None, t=res.seconds, z=z_label(res.z))
    rec.solution = solution_dict(inst, rec, res.z, res.tour, value=res.estimate, phi=res.value)
    return rec


def run_oracle(inst: Instance) -> RunRecord:
    start = time.monotonic()
    value, z = oig_exact(inst)
    res = solve_follower(inst, z)
    rec = RunRecord(inst.name, inst.scheme, inst.interdiction_budget, "oracle", 0, "optimal",
                    value=value, bound=value, t=time.monotonic() - start, gap=0.0, z=z_label(z))
    rec.solution = solution_dict(inst, rec, z, res.tour, value=value, phi=res.value)
    return rec


def run(inst: Instance, mode: str, setting: str = "IFHC", time_limit: float | None = None,
        seed: int = 0) -> RunRecord:
    if mode == "exact":
        return run_exact(inst, setting, time_limit, seed)
    if mode == "ga":
        return run_ga(inst, seed, time_limit=time_limit)
    if mode == "oracle":
        return run_oracle(inst)
    raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")


def solution_dict(inst: Instance, rec: RunRecord, z, tour, value, phi) -> dict:
    """Everything needed to check a run: z, a follower reply, and both objective values.

    ``value`` is what the method reports (incumbent or estimate); ``phi``
    is the exact follower optimum for ``z``.
    """
    z = np.asarray(z)
    return {
        "instance": inst.name, "scheme": inst.scheme, "Q": inst.interdiction_budget,
        "method": rec.method, "seed": rec.seed, "status": rec.status,
        "interdicted": [int(i) + 1 for i in np.flatnonzero(z > 0.5)],
        "tour": [int(v) + 1 for v in tour.nodes] if tour is not None else [],
        "value": _plain(value),
        "phi": phi,
    }


def _plain(v):
    if v is None:
        return None
    v = float(v)
    return int(v) if v.is_integer() else v


# ---------------------------------------------------------------- reports
def add_deltas(records: list[RunRecord]) -> None:
    """Fill ``delta`` on GA rows from an optimal exact or oracle row of the same instance."""
    exact = {}
    for r in records:
        if r.method != "GA" and r.optimal and r.value is not None:
            exact[(r.instance, r.scheme, r.Q)] = r.value
    for r in records:
        ref = exact.get((r.instance, r.scheme, r.Q))
        if r.method != "GA" or ref is None or r.value is None:
            continue
        if ref == 0:
            r.delta = 0.0 if r.value == 0 else math.inf
        else:
            r.delta = 100.0 * (r.value - ref) / ref


def aggregate(records: list[RunRecord]) -> list[RunRecord]:
    """One mean row per (Q, method), in first-seen order."""
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.Q, r.method), []).append(r)
    out = []
    for (Q, method), rows in groups.items():
        agg = RunRecord("AVG", "", Q, method, seed=0, status="", t=_mean(r.t for r in rows))
        for name in ("value", "bound", "t_sep", "gap", "rgap", "nodes", "int_cuts", "frac_cuts", "delta"):
            setattr(agg, name, _mean(getattr(r, name) for r in rows))
        agg.n_opt = sum(r.optimal for r in rows)
        out.append(agg)
    return out


def _mean(values):
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def _fmt(name: str, v) -> str:
    if v is None:
        return ""
    if name in ROUNDED:
        if isinstance(v, float) and math.isinf(v):
            return "inf"
        return f"{v:.2f}"
    if isinstance(v, float):
        return str(int(v)) if v.is_integer() else f"{v:.2f}"
    return str(v)


def write_csv(records: list[RunRecord], out, times: bool = True) -> None:
    """Write records to a path or text stream. ``times=False`` blanks wall-clock columns."""
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            return write_csv(records, fh, times)
    w = csv.writer(out, lineterminator="\n")
    w.writerow([head for _, head in COLUMNS])
    for r in records:
        w.writerow(["" if (not times and name in TIME_COLUMNS) else _fmt(name, getattr(r, name))
                    for name, _ in COLUMNS])


def csv_text(records: list[RunRecord], times: bool = True) -> str:
    buf = io.StringIO()
    write_csv(records, buf, times)
    return buf.getvalue()


def write_solution(rec: RunRecord, path) -> None:
    Path(path).write_text(json.dumps(rec.solution, indent=2) + "\n")


def bench(instances: list[Instance], modes: list[str], settings: list[str], seeds: list[int],
          time_limit: float | None = None, on_row=None) -> list[RunRecord]:
    """Every (instance, method, seed) run followed by the aggregate rows.

    Exact runs are deterministic, so they use the first seed only. A run
    that raises is recorded with an ``error`` status and the bench goes on.
    """
    for s in settings:
        if s not in SETTINGS:
            raise ValueError(f"unknown setting {s!r}")
    rows = []
    for inst in instances:
        jobs = []
        for mode in modes:
            if mode == "exact":
                jobs += [("exact", s, seeds[0]) for s in settings]
            elif mode == "ga":
                jobs += [("ga", None, seed) for seed in seeds]
            else:
                jobs.append((mode, None, 0))
        for mode, setting, seed in jobs:
            try:
                rec = run(inst, mode, setting or "IFHC", time_limit, seed)
            except Exception as exc:  # recorded, the bench continues
                method = setting if mode == "exact" else ("GA" if mode == "ga" else mode)
                rec = RunRecord(inst.name, inst.scheme, inst.interdiction_budget, method, seed,
                                f"error: {type(exc).__name__}: {exc}")
            rows.append(rec)
            if on_row is not None:
                on_row(rec)
    add_deltas(rows)
    return rows + aggregate(rows)


def record_dict(rec: RunRecord) -> dict:
    d = asdict(rec)
    d.pop("solution")
    return d
