"""Command-line entry point: ``oig gen``, ``oig solve`` and ``oig bench``.

Every flag can also come from an environment variable named ``OIG_`` plus
the flag in upper case with dashes as underscores (``--time-limit`` is
``OIG_TIME_LIMIT``). A flag given on the command line wins.

Exit codes: 0 success, 2 bad input or configuration, 3 time-out (the
row is still written), 1 when a bench row failed with an error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .bench import MODES, bench, run, write_csv, write_solution
from .instance import (
    Instance, TsplibError, build_instance, bundled_names, load, load_raw, read_nu_table, read_tsplib, save,
)
from .leader import SETTINGS
from .oracle import OracleRefusal

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_TIMEOUT = 0, 1, 2, 3


class ConfigError(Exception):
    pass


def _env(flag: str, default=None):
    return os.environ.get("OIG_" + flag.upper().replace("-", "_"), default)


def _split(value):
    if value is None or isinstance(value, list):
        return value
    return value.replace(",", " ").split()


# ---------------------------------------------------------------- instances
def resolve_instance(spec: str, scheme: str = "u", q: int = 0, depot: int = 1,
                     nu_table: str | None = None) -> Instance:
    """An instance from a saved file, a TSPLIB file or a bundled name.

    ``depot`` is a 1-based TSPLIB node number. Scheme, ``q`` and ``depot``
    are ignored for saved instance files, which carry their own.
    """
    path = Path(spec)
    if path.is_file() and path.suffix != ".tsp":
        try:
            inst = load(path)
        except (ValueError, KeyError, IndexError) as exc:
            raise ConfigError(f"{spec}: {exc}") from exc
        return inst
    if path.is_file():
        raw = read_tsplib(path)
    elif spec in bundled_names():
        raw = load_raw(spec)
    else:
        raise ConfigError(f"{spec!r} is neither a file nor a bundled instance")
    try:
        table = read_nu_table(nu_table)
    except OSError as exc:
        raise ConfigError(f"cannot read nu table {nu_table}: {exc}") from exc
    table_name = nu_table or "the bundled nu table"
    if raw.name not in table:
        raise ConfigError(f"no optimal tour length for {raw.name!r} in {table_name}")
    if not 1 <= depot <= raw.dimension:
        raise ConfigError(f"depot {depot} outside 1..{raw.dimension}")
    if q < 0:
        raise ConfigError("--q must be nonnegative")
    return build_instance(raw, scheme, q, depot=depot - 1, tsp_optimum=table[raw.name])


# ---------------------------------------------------------------- commands
def cmd_gen(args) -> int:
    inst = resolve_instance(args.instance, args.scheme, args.q, args.depot, args.nu_table)
    out = args.out or f"{inst.name}-{inst.scheme}-Q{inst.interdiction_budget}.oig"
    save(inst, out)
    print(f"wrote {out}: n={inst.n} B_f={inst.distance_budget} Q={inst.interdiction_budget}")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = resolve_instance(args.instance, args.scheme, args.q, args.depot, args.nu_table)
    rec = run(inst, args.mode, args.setting, args.time_limit, args.seed)
    out = args.out or "-"
    if out == "-":
        write_csv([rec], sys.stdout, times=not args.no_times)
    else:
        write_csv([rec], out, times=not args.no_times)
    solution = args.solution or (None if out == "-" else str(Path(out).with_suffix(".solution.json")))
    if solution:
        write_solution(rec, solution)
    print(f"{inst.label()} {rec.method}: value {rec.value} ({rec.status})", file=sys.stderr)
    return EXIT_TIMEOUT if rec.status == "time_out" else EXIT_OK


def cmd_bench(args) -> int:
    instances = []
    for spec in args.instance:
        for scheme in args.scheme:
            for q in args.q:
                instances.append(resolve_instance(spec, scheme, q, args.depot, args.nu_table))

    def progress(rec):
        print(f"{rec.instance}/{rec.scheme}/Q={rec.Q} {rec.method} seed={rec.seed}: "
              f"{rec.value} ({rec.status}, {rec.t:.2f}s)", file=sys.stderr)

    rows = bench(instances, args.mode, args.setting, args.seed, args.time_limit, on_row=progress)
    write_csv(rows, sys.stdout if args.out in (None, "-") else args.out, times=not args.no_times)
    if args.solutions:
        folder = Path(args.solutions)
        folder.mkdir(parents=True, exist_ok=True)
        for r in rows:
            if r.solution:
                write_solution(r, folder / f"{r.instance}-{r.scheme}-Q{r.Q}-{r.method}-s{r.seed}.json")
    statuses = [r.status for r in rows if r.instance != "AVG"]
    if any(s.startswith("error") for s in statuses):
        return EXIT_FAILED
    return EXIT_TIMEOUT if "time_out" in statuses else EXIT_OK


# ---------------------------------------------------------------- parser
def _common(p: argparse.ArgumentParser, many: bool = False) -> None:
    nargs = "+" if many else None
    p.add_argument("--instance", nargs=nargs, default=_split(_env("instance")) if many else _env("instance"),
                   help="instance file, TSPLIB .tsp file or bundled name")
    p.add_argument("--scheme", nargs=nargs, choices=("u", "r"),
                   default=_split(_env("scheme", "u")) if many else _env("scheme", "u"),
                   help="prize scheme: unit (u) or pseudo-random (r)")
    p.add_argument("--q", nargs=nargs, type=int,
                   default=[int(v) for v in _split(_env("q", "5"))] if many else int(_env("q", "0")),
                   help="leader interdiction budget")
    p.add_argument("--depot", type=int, default=int(_env("depot", "1")), help="depot, 1-based TSPLIB node")
    p.add_argument("--nu-table", default=_env("nu-table"), help="file of 'name optimal_tour_length' lines")
    p.add_argument("--out", default=_env("out"), help="output path ('-' for stdout)")


def _solver_flags(p: argparse.ArgumentParser, many: bool = False) -> None:
    nargs = "+" if many else None
    p.add_argument("--mode", nargs=nargs, choices=MODES,
                   default=_split(_env("mode", "exact")) if many else _env("mode", "exact"))
    p.add_argument("--setting", nargs=nargs, choices=SETTINGS,
                   default=_split(_env("setting", "IFHC")) if many else _env("setting", "IFHC"))
    p.add_argument("--time-limit", type=float,
                   default=float(_env("time-limit")) if _env("time-limit") else None, help="seconds per run")
    p.add_argument("--seed", nargs=nargs, type=int,
                   default=[int(v) for v in _split(_env("seed", "0"))] if many else int(_env("seed", "0")))
    p.add_argument("--no-times", action="store_true", default=_env("no-times") not in (None, "", "0"),
                   help="leave wall-clock columns empty (byte-stable output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oig", description="Orienteering interdiction game solvers")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write an instance file")
    _common(gen)
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", help="solve one instance, print its CSV row")
    _common(solve)
    _solver_flags(solve)
    solve.add_argument("--solution", default=_env("solution"), help="solution JSON path")
    solve.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a grid of instances and methods")
    _common(b, many=True)
    _solver_flags(b, many=True)
    b.add_argument("--solutions", default=_env("solutions"), help="folder for solution JSON files")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.instance:
        parser.error("--instance is required (or set OIG_INSTANCE)")
    try:
        return args.func(args)
    except (ConfigError, TsplibError, OracleRefusal, OSError) as exc:
        print(f"oig: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
