"""TSPLIB ingestion and orienteering-interdiction instances.

Node indices are 0-based everywhere in the library. TSPLIB numbering is
1-based, so TSPLIB node ``k`` is index ``k - 1`` here; the random prize
formula is evaluated on the 1-based number.

>>> inst = load_bundled("gr17", scheme="u", interdiction_budget=5)
>>> inst.n, inst.distance_budget, int(inst.prizes.sum())
(17, 1042, 16)
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

WEIGHT_KINDS = ("EUC_2D", "ATT", "EXPLICIT", "GEO")
EXPLICIT_FORMATS = ("FULL_MATRIX", "UPPER_ROW", "LOWER_ROW", "LOWER_DIAG_ROW", "UPPER_DIAG_ROW")

DATA_DIR = "data"


class TsplibError(ValueError):
    """Malformed or unsupported TSPLIB input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class RawTsp:
    name: str
    dimension: int
    weight_kind: str
    explicit_format: str | None = None
    coords: np.ndarray | None = None  # (dimension, 2) float
    weights: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.dimension < 3:
            raise TsplibError(f"DIMENSION must be at least 3, got {self.dimension}")
        if self.weight_kind == "EXPLICIT":
            if self.weights is None or len(self.weights) != _explicit_count(self.explicit_format, self.dimension):
                raise TsplibError("EXPLICIT weight count inconsistent with format and dimension")
        elif self.coords is None or len(self.coords) != self.dimension:
            raise TsplibError("coordinate count differs from DIMENSION")


def _explicit_count(fmt: str | None, n: int) -> int:
    if fmt == "FULL_MATRIX":
        return n * n
    if fmt in ("UPPER_ROW", "LOWER_ROW"):
        return n * (n - 1) // 2
    if fmt in ("LOWER_DIAG_ROW", "UPPER_DIAG_ROW"):
        return n * (n + 1) // 2
    raise TsplibError(f"unsupported EDGE_WEIGHT_FORMAT {fmt!r}")


_SECTIONS = {"NODE_COORD_SECTION", "EDGE_WEIGHT_SECTION", "DISPLAY_DATA_SECTION",
             "FIXED_EDGES_SECTION", "TOUR_SECTION", "DEMAND_SECTION", "DEPOT_SECTION"}


def parse_tsplib(text: str) -> RawTsp:
    """Parse the contents of a symmetric TSPLIB95 ``.tsp`` file."""
    header: dict[str, str] = {}
    sections: dict[str, list[tuple[int, list[str]]]] = {}
    current = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            continue
        head = line.split(":", 1)[0].strip().upper()
        if head == "EOF":
            break
        if head in _SECTIONS:
            current = head
            sections[current] = []
            continue
        if current is not None and not line[0].isalpha():
            sections[current].append((lineno, line.split()))
            continue
        if ":" not in line:
            raise TsplibError(f"expected 'KEY : VALUE', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split(":", 1))
        header[key.upper()] = value
        current = None

    name = header.get("NAME", "unnamed")
    kind = header.get("TYPE", "TSP").upper()
    if kind != "TSP":
        raise TsplibError(f"only symmetric TSP instances are supported, got TYPE {kind}")
    try:
        n = int(header["DIMENSION"])
    except KeyError:
        raise TsplibError("missing DIMENSION") from None
    except ValueError:
        raise TsplibError(f"DIMENSION is not an integer: {header['DIMENSION']!r}") from None
    wtype = header.get("EDGE_WEIGHT_TYPE", "").upper()
    if wtype not in WEIGHT_KINDS:
        raise TsplibError(f"unsupported EDGE_WEIGHT_TYPE {wtype!r}")

    if wtype == "EXPLICIT":
        fmt = header.get("EDGE_WEIGHT_FORMAT", "").upper()
        if fmt not in EXPLICIT_FORMATS:
            raise TsplibError(f"unsupported EDGE_WEIGHT_FORMAT {fmt!r}")
        rows = sections.get("EDGE_WEIGHT_SECTION")
        if rows is None:
            raise TsplibError("missing EDGE_WEIGHT_SECTION")
        values = []
        for lineno, toks in rows:
            try:
                values.extend(int(float(t)) for t in toks)
            except ValueError:
                raise TsplibError(f"non-numeric edge weight in {toks}", lineno) from None
        expected = _explicit_count(fmt, n)
        if len(values) != expected:
            last = rows[-1][0] if rows else None
            raise TsplibError(f"EDGE_WEIGHT_SECTION holds {len(values)} values, "
                              f"{fmt} with DIMENSION {n} needs {expected}", last)
        return RawTsp(name, n, wtype, fmt, weights=tuple(values))

    rows = sections.get("NODE_COORD_SECTION")
    if rows is None:
        raise TsplibError("missing NODE_COORD_SECTION")
    coords = np.zeros((n, 2))
    seen = set()
    for lineno, toks in rows:
        if len(toks) < 3:
            raise TsplibError(f"expected 'index x y', got {' '.join(toks)!r}", lineno)
        try:
            k = int(toks[0])
            x, y = float(toks[1]), float(toks[2])
        except ValueError:
            raise TsplibError(f"bad coordinate line {' '.join(toks)!r}", lineno) from None
        if not 1 <= k <= n or k in seen:
            raise TsplibError(f"node index {k} out of range or repeated", lineno)
        seen.add(k)
        coords[k - 1] = (x, y)
    if len(seen) != n:
        last = rows[-1][0] if rows else None
        raise TsplibError(f"DIMENSION is {n} but {len(seen)} coordinate lines were given", last)
    return RawTsp(name, n, wtype, coords=coords)


def _nint(x):
    return np.floor(np.asarray(x) + 0.5).astype(np.int64)


def _geo_radians(v: np.ndarray) -> np.ndarray:
    deg = np.trunc(v)
    return 3.141592 * (deg + 5.0 * (v - deg) / 3.0) / 180.0


def distance_matrix(raw: RawTsp) -> np.ndarray:
    """Full symmetric integer distance matrix under the TSPLIB rounding rules."""
    n = raw.dimension
    if raw.weight_kind == "EXPLICIT":
        w = np.asarray(raw.weights, dtype=np.int64)
        d = np.zeros((n, n), dtype=np.int64)
        fmt = raw.explicit_format
        if fmt == "FULL_MATRIX":
            d[:] = w.reshape(n, n)
        else:
            if fmt == "UPPER_ROW":
                r, c = np.triu_indices(n, 1)
            elif fmt == "UPPER_DIAG_ROW":
                r, c = np.triu_indices(n, 0)
            elif fmt == "LOWER_ROW":
                r, c = np.tril_indices(n, -1)
            else:
                r, c = np.tril_indices(n, 0)
            d[r, c] = w
            d[c, r] = w
        np.fill_diagonal(d, 0)
        if not np.array_equal(d, d.T):
            raise TsplibError(f"{raw.name}: explicit matrix is not symmetric")
        return d
    xy = raw.coords
    dx = xy[:, None, 0] - xy[None, :, 0]
    dy = xy[:, None, 1] - xy[None, :, 1]
    if raw.weight_kind == "EUC_2D":
        d = _nint(np.hypot(dx, dy))
    elif raw.weight_kind == "ATT":
        r = np.sqrt((dx * dx + dy * dy) / 10.0)
        t = _nint(r)
        d = np.where(t < r, t + 1, t)
    else:  # GEO
        lat, lon = _geo_radians(xy[:, 0]), _geo_radians(xy[:, 1])
        q1 = np.cos(lon[:, None] - lon[None, :])
        q2 = np.cos(lat[:, None] - lat[None, :])
        q3 = np.cos(lat[:, None] + lat[None, :])
        arg = np.clip(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3), -1.0, 1.0)
        d = (6378.388 * np.arccos(arg) + 1.0).astype(np.int64)
    d = d.astype(np.int64)
    np.fill_diagonal(d, 0)
    return d


def edge_weight(raw: RawTsp, i: int, j: int) -> int:
    """TSPLIB distance between nodes ``i`` and ``j`` (0-based, ``i != j``)."""
    n = raw.dimension
    if i == j:
        raise ValueError("edge_weight needs two distinct nodes")
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"node index out of range for dimension {n}")
    if raw.weight_kind == "EXPLICIT":
        a, b = min(i, j), max(i, j)
        fmt = raw.explicit_format
        if fmt == "FULL_MATRIX":
            k = a * n + b
        elif fmt == "UPPER_ROW":
            k = a * n - a * (a + 1) // 2 + (b - a - 1)
        elif fmt == "UPPER_DIAG_ROW":
            k = a * n - a * (a - 1) // 2 + (b - a)
        elif fmt == "LOWER_ROW":
            k = b * (b - 1) // 2 + a
        else:
            k = b * (b + 1) // 2 + a
        return int(raw.weights[k])
    sub = RawTsp(raw.name, 3, raw.weight_kind, coords=raw.coords[[i, j, j]])
    return int(distance_matrix(sub)[0, 1])


def random_prize(k: int) -> int:
    """Pseudorandom prize of TSPLIB node number ``k`` (1-based)."""
    return 1 + (7141 * k + 73) % 100


@dataclass(eq=False)
class Instance:
    """An orienteering interdiction game on a complete graph.

    ``dist`` is the full symmetric distance matrix; the edge set is implicit.
    """

    name: str
    dist: np.ndarray
    prizes: np.ndarray
    depot: int
    distance_budget: int
    interdiction_budget: int
    tsp_optimum: int
    scheme: str = "u"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dist = np.asarray(self.dist, dtype=np.int64)
        self.prizes = np.asarray(self.prizes, dtype=np.int64)
        n = len(self.dist)
        if self.dist.shape != (n, n) or n < 3:
            raise ValueError("dist must be a square matrix with at least 3 nodes")
        if np.any(np.diag(self.dist) != 0) or not np.array_equal(self.dist, self.dist.T) or self.dist.min() < 0:
            raise ValueError("dist must be symmetric, nonnegative and zero on the diagonal")
        if self.prizes.shape != (n,) or self.prizes.min() < 0:
            raise ValueError("need one nonnegative prize per node")
        if not 0 <= self.depot < n:
            raise ValueError(f"depot {self.depot} is not a node")
        if self.distance_budget < 0 or self.interdiction_budget < 0:
            raise ValueError("budgets must be nonnegative")
        self.dist.setflags(write=False)
        self.prizes.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.dist)

    def with_budget(self, interdiction_budget: int) -> "Instance":
        return Instance(self.name, self.dist, self.prizes, self.depot, self.distance_budget,
                        interdiction_budget, self.tsp_optimum, self.scheme, dict(self.meta))

    def label(self) -> str:
        return f"{self.name}/{self.scheme}/Q={self.interdiction_budget}"

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.name == other.name and self.depot == other.depot
                and self.distance_budget == other.distance_budget
                and self.interdiction_budget == other.interdiction_budget
                and self.tsp_optimum == other.tsp_optimum and self.scheme == other.scheme
                and np.array_equal(self.dist, other.dist) and np.array_equal(self.prizes, other.prizes))

    __hash__ = None


def build_instance(raw: RawTsp, prize_scheme: str = "u", Q: int = 0,
                   budget_factor: Fraction | float | str = Fraction(1, 2), depot: int = 0,
                   tsp_optimum: int | None = None, depot_prize: bool = False) -> Instance:
    """Turn a parsed TSPLIB instance into an interdiction game.

    ``prize_scheme`` is ``"u"``/``"unit"`` or ``"r"``/``"random"``. The depot is
    always on the follower's tour, and by the benchmark convention its prize
    is 0 unless ``depot_prize`` is set.
    """
    if tsp_optimum is None or tsp_optimum <= 0:
        raise ValueError("tsp_optimum must be a positive integer")
    factor = Fraction(budget_factor)
    if Q < 0 or factor <= 0:
        raise ValueError("need Q >= 0 and budget_factor > 0")
    scheme = {"unit": "u", "random": "r"}.get(prize_scheme, prize_scheme)
    n = raw.dimension
    if scheme == "u":
        prizes = np.ones(n, dtype=np.int64)
    elif scheme == "r":
        prizes = np.array([random_prize(k) for k in range(1, n + 1)], dtype=np.int64)
    else:
        raise ValueError(f"unknown prize scheme {prize_scheme!r}")
    if not depot_prize:
        prizes[depot] = 0
    budget = math.floor(factor * tsp_optimum)
    return Instance(raw.name, distance_matrix(raw), prizes, depot, budget, Q, tsp_optimum, scheme)


# ---------------------------------------------------------------- bundled data

def _data_path(*parts: str):
    return resources.files("oig").joinpath(DATA_DIR, *parts)


def bundled_names() -> list[str]:
    return sorted(p.name[:-4] for p in _data_path("tsplib").iterdir() if p.name.endswith(".tsp"))


def read_nu_table(path: str | Path | None = None) -> dict[str, int]:
    """Read a two-column ``name value`` table of optimal TSP tour lengths."""
    text = _data_path("nu.txt").read_text() if path is None else Path(path).read_text()
    table = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"nu table line {lineno}: expected 'name value'")
        table[parts[0]] = int(parts[1])
    return table


def read_tsplib(path: str | Path) -> RawTsp:
    return parse_tsplib(Path(path).read_text())


def load_raw(name: str) -> RawTsp:
    return parse_tsplib(_data_path("tsplib", f"{name}.tsp").read_text())


def load_opt_tour(name: str) -> list[int] | None:
    """0-based optimal TSP tour shipped next to some bundled instances."""
    res = _data_path("tsplib", f"{name}.opt.tour")
    if not res.is_file():
        return None
    nodes, reading = [], False
    for line in res.read_text().splitlines():
        s = line.strip()
        if s == "TOUR_SECTION":
            reading = True
        elif reading:
            for tok in s.split():
                if int(tok) == -1:
                    return nodes
                nodes.append(int(tok) - 1)
    return nodes


def load_bundled(name: str, scheme: str = "u", interdiction_budget: int = 0,
                 depot: int = 0, budget_factor=Fraction(1, 2)) -> Instance:
    nu = read_nu_table()[name]
    return build_instance(load_raw(name), scheme, interdiction_budget, budget_factor, depot, nu)


def random_instance(n: int, seed: int, scheme: str = "u", interdiction_budget: int = 0,
                    euclidean: bool = True) -> Instance:
    """A small synthetic instance with an exactly computed TSP optimum.

    ``euclidean`` instances round points in a 100 x 100 square with the
    EUC_2D rule (rounding may break the triangle inequality slightly);
    otherwise distances are independent integers in [1, 100].
    """
    from .oracle import tsp_exact

    rng = np.random.default_rng(seed)
    if euclidean:
        raw = RawTsp(f"rand{n}e-{seed}", n, "EUC_2D", coords=rng.uniform(0, 100, size=(n, 2)))
        dist = distance_matrix(raw)
    else:
        upper = np.triu(rng.integers(1, 101, size=(n, n)), 1)
        dist = upper + upper.T
    name = f"rand{n}{'e' if euclidean else 'x'}-{seed}"
    probe = Instance(name, dist, np.ones(n, dtype=np.int64), 0, 0, 0, 1)
    nu = tsp_exact(probe)
    prizes = np.ones(n, dtype=np.int64) if scheme == "u" else np.array(
        [random_prize(k) for k in range(1, n + 1)], dtype=np.int64)
    prizes[0] = 0
    return Instance(name, dist, prizes, 0, nu // 2, interdiction_budget, nu, scheme)


# ---------------------------------------------------------------- serialization

FORMAT_TAG = "OIG_INSTANCE 1"


def dumps(inst: Instance) -> str:
    """Serialize to the flat text format (see README, "Instance file format")."""
    out = io.StringIO()
    out.write(f"{FORMAT_TAG}\n")
    out.write(f"NAME {inst.name}\nSCHEME {inst.scheme}\nN {inst.n}\nDEPOT {inst.depot}\n")
    out.write(f"DISTANCE_BUDGET {inst.distance_budget}\nINTERDICTION_BUDGET {inst.interdiction_budget}\n")
    out.write(f"TSP_OPTIMUM {inst.tsp_optimum}\nPRIZES\n")
    out.write(" ".join(map(str, inst.prizes.tolist())) + "\nDISTANCES\n")
    for row in inst.dist.tolist():
        out.write(" ".join(map(str, row)) + "\n")
    out.write("END\n")
    return out.getvalue()


def loads(text: str) -> Instance:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != FORMAT_TAG:
        raise ValueError(f"not an instance file (expected first line {FORMAT_TAG!r})")
    fields: dict[str, str] = {}
    i = 1
    while lines[i] != "PRIZES":
        key, _, value = lines[i].partition(" ")
        fields[key] = value.strip()
        i += 1
    n = int(fields["N"])
    prizes = [int(v) for v in lines[i + 1].split()]
    if lines[i + 2] != "DISTANCES":
        raise ValueError("missing DISTANCES block")
    dist = [[int(v) for v in lines[i + 3 + r].split()] for r in range(n)]
    if lines[i + 3 + n] != "END":
        raise ValueError("missing END marker")
    return Instance(fields["NAME"], np.array(dist), np.array(prizes), int(fields["DEPOT"]),
                    int(fields["DISTANCE_BUDGET"]), int(fields["INTERDICTION_BUDGET"]),
                    int(fields["TSP_OPTIMUM"]), fields.get("SCHEME", "u"))


def save(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps(inst))


def load(path: str | Path) -> Instance:
    return loads(Path(path).read_text())
