"""Exhaustive vertex enumeration for tiny boxed LPs (test oracle)."""
from __future__ import annotations

import itertools

import numpy as np


def random_model(rng: np.random.Generator):
    """A random boxed LP with at most 4 variables and 6 rows, integer data."""
    n = int(rng.integers(1, 5))
    m = int(rng.integers(0, 7))
    lo = rng.integers(-3, 2, size=n).astype(float)
    hi = lo + rng.integers(0, 5, size=n)
    c = rng.integers(-5, 6, size=n).astype(float)
    rows = []
    for _ in range(m):
        a = rng.integers(-3, 4, size=n).astype(float)
        sense = ["<=", ">=", "="][int(rng.choice(3, p=[0.5, 0.35, 0.15]))]
        b = float(rng.integers(-4, 8))
        rows.append((a, sense, b))
    sense = "max" if rng.random() < 0.5 else "min"
    return sense, c, lo, hi, rows


def vertex_optimum(sense, c, lo, hi, rows, tol=1e-7):
    """Best objective over all basic feasible points, or None if infeasible."""
    n = len(c)
    planes = []  # (normal, rhs)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        planes.append((e, lo[j]))
        planes.append((e, hi[j]))
    for a, _, b in rows:
        planes.append((a, b))

    def feasible(x):
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            return False
        for a, s, b in rows:
            v = a @ x
            if s == "<=" and v > b + tol or s == ">=" and v < b - tol or s == "=" and abs(v - b) > tol:
                return False
        return True

    best = None
    for combo in itertools.combinations(range(len(planes)), n):
        M = np.array([planes[k][0] for k in combo])
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        x = np.linalg.solve(M, np.array([planes[k][1] for k in combo]))
        if feasible(x):
            v = float(c @ x)
            if best is None or (v > best if sense == "max" else v < best):
                best = v
    return best
