"""Bounded-variable simplex on a dense tableau.

Rows are stored as ``a.x + s = b`` with one slack per row whose bounds
encode the sense (``<=``: s >= 0, ``>=``: s <= 0, ``=``: s = 0), so the
all-slack basis is always available. Structural variables are boxed;
an infinite bound (structural or slack) is replaced by an artificial box
of ``BIG`` and a solution that ends on it is reported as unbounded.

The dual simplex does most of the work: the all-slack start is dual
feasible once every nonbasic variable sits on the bound its cost prefers,
and both row additions and bound changes keep dual feasibility, which is
what branch-and-cut re-solves need. After an objective change the old
basis is still primal feasible and the primal simplex takes over.

>>> m = LpModel("max")
>>> x, y = m.add_var(0, 4, 3.0), m.add_var(0, 4, 2.0)
>>> m.add_row([x, y], [1, 1], "<=", 4); m.add_row([x, y], [1, 3], "<=", 6)
0
1
>>> sol = m.solve()
>>> sol.status, round(sol.objective, 9), sol.x.tolist()
('optimal', 12.0, [4.0, 0.0])
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

FEAS_TOL = 1e-6
DUAL_TOL = 1e-7
PIVOT_TOL = 1e-9
INT_TOL = 1e-6
BIG = 1e9
REFACTOR_EVERY = 300
DEGENERATE_SWITCH = 400
PERTURB_AFTER = 50  # consecutive degenerate dual pivots before the costs are perturbed
PERTURB = 1e-6  # relative size of the cost perturbation applied when the dual simplex stalls
MAX_PERTURBATIONS = 3  # per solve; after that a stall falls back to Bland's rule

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
CUTOFF = "cutoff_exceeded"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

_SENSES = ("<=", ">=", "=")


@dataclass
class LpSolution:
    status: str
    objective: float
    x: np.ndarray
    iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class LpModel:
    """A linear program that can grow rows and change bounds between solves."""

    def __init__(self, sense: str = "max"):
        if sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        self.sense = sense
        self._c: list[float] = []
        self._lo: list[float] = []
        self._hi: list[float] = []
        self.A = np.zeros((0, 0))
        self.b = np.zeros(0)
        self.row_sense: list[str] = []
        self.row_tags: list = []
        self._pending: list[tuple[np.ndarray, str, float]] = []
        self._T = None  # tableau B^-1 [A | I], present once factorized
        self.iterations = 0

    # ------------------------------------------------------------ building
    @property
    def n_vars(self) -> int:
        return len(self._c)

    @property
    def n_rows(self) -> int:
        return len(self.row_sense)

    def add_var(self, lo: float = 0.0, hi: float = 1.0, obj: float = 0.0) -> int:
        if self._T is not None or self.n_rows:
            raise RuntimeError("declare all variables before adding rows")
        if lo > hi:
            raise ValueError(f"empty bounds [{lo}, {hi}]")
        self._c.append(float(obj))
        self._lo.append(float(lo))
        self._hi.append(float(hi))
        return len(self._c) - 1

    def add_vars(self, lo, hi, obj) -> np.ndarray:
        lo, hi, obj = np.broadcast_arrays(np.asarray(lo, float), np.asarray(hi, float), np.asarray(obj, float))
        return np.array([self.add_var(a, b, c) for a, b, c in zip(lo.ravel(), hi.ravel(), obj.ravel())], dtype=int)

    def add_row(self, idx, coef, sense: str, rhs: float, tag=None) -> int:
        """Add ``sum(coef * x[idx]) (sense) rhs`` and return its row index."""
        return self.add_rows([(idx, coef, sense, rhs)], [tag])[0]

    def add_rows(self, rows, tags=None) -> list[int]:
        """Add rows given as ``(idx, coef, sense, rhs)`` tuples."""
        n = self.n_vars
        if not rows:
            return []
        dense = np.zeros((len(rows), n))
        senses, rhs = [], np.zeros(len(rows))
        for k, (idx, coef, sense, b) in enumerate(rows):
            if sense not in _SENSES:
                raise ValueError(f"unknown row sense {sense!r}")
            idx = np.asarray(idx, dtype=int)
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise IndexError("row references an undeclared variable")
            np.add.at(dense[k], idx, np.asarray(coef, dtype=float))
            senses.append(sense)
            rhs[k] = b
        first = self.n_rows
        if self._T is not None:
            self._append_to_tableau(dense, senses, rhs)
        self.A = dense if self.A.size == 0 and first == 0 else np.vstack([self.A.reshape(first, n), dense])
        self.b = np.concatenate([self.b, rhs])
        self.row_sense.extend(senses)
        self.row_tags.extend(tags if tags is not None else [None] * len(rows))
        return list(range(first, first + len(rows)))

    def bounds(self, j: int) -> tuple[float, float]:
        return self._lo[j], self._hi[j]

    def set_bounds(self, idx, lo, hi) -> None:
        idx = np.atleast_1d(np.asarray(idx, dtype=int))
        lo = np.broadcast_to(np.asarray(lo, float), idx.shape)
        hi = np.broadcast_to(np.asarray(hi, float), idx.shape)
        if np.any(lo > hi):
            raise ValueError("empty bounds")
        for j, a, b in zip(idx.tolist(), lo.tolist(), hi.tolist()):
            self._lo[j], self._hi[j] = a, b
        if self._T is not None:
            self._lo_all[idx] = np.maximum(lo, -BIG)
            self._hi_all[idx] = np.minimum(hi, BIG)
            nb = ~self._is_basic[idx]
            for j in idx[nb]:
                self._place_nonbasic(j)

    def set_objective(self, obj) -> None:
        obj = np.asarray(obj, dtype=float)
        if obj.shape != (self.n_vars,):
            raise ValueError("objective needs one coefficient per variable")
        self._c = obj.tolist()
        if self._T is not None:
            self._cost[: self.n_vars] = obj if self.sense == "max" else -obj
            self._shift[:] = 0.0
            self._recompute_duals()

    def remove_rows(self, rows) -> list[int]:
        """Drop rows whose slack is basic (non-binding). Returns the rows removed."""
        rows = sorted(set(int(r) for r in rows))
        if not rows:
            return []
        if self._T is not None:
            n = self.n_vars
            keep_rows = [r for r in rows if self._is_basic[n + r]]
            rows = keep_rows
            if not rows:
                return []
            slack_cols = [n + r for r in rows]
            tab_rows = [int(np.flatnonzero(self._basis == col)[0]) for col in slack_cols]
            self._T = np.delete(np.delete(self._T, tab_rows, axis=0), slack_cols, axis=1)
            self._Tb = np.delete(self._Tb, tab_rows)
            self._basis = np.delete(self._basis, tab_rows)
            shift = np.zeros(n + self.n_rows, dtype=int)
            for col in slack_cols:
                shift[col:] += 1
            self._basis = self._basis - shift[self._basis]
            for name in ("_lo_all", "_hi_all", "_cost", "_x", "_d", "_shift"):
                setattr(self, name, np.delete(getattr(self, name), slack_cols))
            self._is_basic = np.delete(self._is_basic, slack_cols)
        keep = np.ones(self.n_rows, dtype=bool)
        keep[rows] = False
        self.A = self.A[keep]
        self.b = self.b[keep]
        self.row_sense = [s for s, k in zip(self.row_sense, keep) if k]
        self.row_tags = [t for t, k in zip(self.row_tags, keep) if k]
        return rows

    # ------------------------------------------------------------ tableau state
    def _slack_bounds(self, senses):
        lo = np.array([0.0 if s != ">=" else -BIG for s in senses])
        hi = np.array([0.0 if s != "<=" else BIG for s in senses])
        return lo, hi

    def _factor_fresh(self) -> None:
        n, m = self.n_vars, self.n_rows
        slo, shi = self._slack_bounds(self.row_sense)
        self._lo_all = np.concatenate([np.maximum(self._lo, -BIG), slo])
        self._hi_all = np.concatenate([np.minimum(self._hi, BIG), shi])
        c = np.asarray(self._c, float)
        self._cost = np.concatenate([c if self.sense == "max" else -c, np.zeros(m)])
        self._basis = np.arange(n, n + m)
        self._is_basic = np.zeros(n + m, dtype=bool)
        self._is_basic[n:] = True
        self._T = np.hstack([self.A.reshape(m, n), np.eye(m)])
        self._Tb = self.b.astype(float).copy()
        self._d = self._cost.copy()
        self._x = np.zeros(n + m)
        self._shift = np.zeros(n + m)  # cost shifts absorbing tolerance-level dual infeasibility
        self._degenerate = np.zeros(2, dtype=np.int64)  # stall length, perturbations this solve
        for j in range(n):
            self._place_nonbasic(j)
        self._since_refactor = 0

    def _place_nonbasic(self, j: int) -> None:
        """Put nonbasic ``j`` on the bound its reduced cost prefers."""
        lo, hi = self._lo_all[j], self._hi_all[j]
        d = self._d[j]
        if d > DUAL_TOL:
            self._x[j] = hi
        elif d < -DUAL_TOL:
            self._x[j] = lo
        else:
            x = self._x[j]
            self._x[j] = lo if abs(x - lo) <= abs(x - hi) else hi

    def _append_to_tableau(self, dense, senses, rhs) -> None:
        n, m, k = self.n_vars, self.n_rows, len(senses)
        full = np.hstack([dense, np.zeros((k, m)), np.eye(k)])
        T = np.hstack([self._T, np.zeros((m, k))])
        coef_b = full[:, self._basis]
        new_rows = full - coef_b @ T
        new_b = rhs - coef_b @ self._Tb
        self._T = np.vstack([T, new_rows])
        self._Tb = np.concatenate([self._Tb, new_b])
        slo, shi = self._slack_bounds(senses)
        self._lo_all = np.concatenate([self._lo_all, slo])
        self._hi_all = np.concatenate([self._hi_all, shi])
        self._cost = np.concatenate([self._cost, np.zeros(k)])
        self._d = np.concatenate([self._d, np.zeros(k)])
        self._shift = np.concatenate([self._shift, np.zeros(k)])
        self._x = np.concatenate([self._x, np.zeros(k)])
        self._basis = np.concatenate([self._basis, np.arange(n + m, n + m + k)])
        self._is_basic = np.concatenate([self._is_basic, np.ones(k, dtype=bool)])

    def _refactor(self) -> None:
        n, m = self.n_vars, self.n_rows
        full = np.hstack([self.A.reshape(m, n), np.eye(m)])
        B = full[:, self._basis]
        try:
            sol = np.linalg.solve(B, np.hstack([full, self.b.reshape(m, 1)]))
        except np.linalg.LinAlgError:
            self._factor_fresh()
            return
        self._T, self._Tb = np.ascontiguousarray(sol[:, :-1]), sol[:, -1].copy()
        self._T[np.abs(self._T) < 1e-12] = 0.0
        self._T[np.arange(m), self._basis] = 1.0
        self._recompute_duals()
        self._since_refactor = 0

    def _recompute_duals(self) -> None:
        c = self._cost + self._shift
        self._d = c - c[self._basis] @ self._T
        self._d[self._basis] = 0.0

    def _basic_values(self) -> np.ndarray:
        xn = self._x.copy()
        xn[self._basis] = 0.0
        return self._Tb - self._T @ xn

    def _dual_infeasible(self) -> np.ndarray:
        x, lo, hi, d = self._x, self._lo_all, self._hi_all, self._d
        can_inc = x < hi - FEAS_TOL
        can_dec = x > lo + FEAS_TOL
        bad = (can_inc & (d > DUAL_TOL)) | (can_dec & (d < -DUAL_TOL))
        bad[self._basis] = False
        return bad

    def _run(self, kernel, *args) -> str:
        """Drive a simplex kernel, refactorizing whenever it asks to."""
        while True:
            budget = REFACTOR_EVERY - self._since_refactor
            code, its = kernel(self._T, self._Tb, self._basis, self._is_basic, self._lo_all, self._hi_all,
                               self._x, self._d, self._shift, self._degenerate, *args, max(budget, 0))
            self._since_refactor += its
            self.iterations += its
            args = args[:-1] + (args[-1] - its,)
            if code == _REFACTOR:
                self._refactor()
                continue
            return _CODES[code]

    def _objective(self) -> float:
        n = self.n_vars
        return float(self._cost[:n] @ self._x[:n])

    def _consistent(self) -> bool:
        """Cheap stand-in for a refactorization: row residuals and recomputed reduced costs."""
        n = self.n_vars
        if self.n_rows:
            r = self.A @ self._x[:n] + self._x[n:] - self.b
            if not np.all(np.abs(r) <= FEAS_TOL * (1 + np.abs(self.b))):
                return False
        c = self._cost + self._shift
        d = c - c[self._basis] @ self._T
        d[self._basis] = 0.0
        return bool(np.all(np.abs(d - self._d) <= DUAL_TOL * (1 + np.abs(c))))

    # ------------------------------------------------------------ solve
    def solve(self, cutoff: float | None = None, max_iter: int | None = None) -> LpSolution:
        """Optimize from the current basis.

        ``cutoff`` (in the model's own sense) stops as soon as a valid dual
        bound shows the optimum cannot beat it: for ``max``, optimum <= cutoff.
        """
        n = self.n_vars
        if self._T is None:
            self._factor_fresh()
        m = self.n_rows
        if max_iter is None:
            max_iter = 50 * (n + m) + 1000
        use_cut = cutoff is not None
        internal_cutoff = 0.0 if not use_cut else (cutoff if self.sense == "max" else -cutoff)
        start = self.iterations
        status = None
        self._degenerate[:] = 0
        for _attempt in range(8):
            xb = self._basic_values()
            lob, hib = self._lo_all[self._basis], self._hi_all[self._basis]
            primal_ok = not np.any((xb < lob - FEAS_TOL) | (xb > hib + FEAS_TOL))
            if self._dual_infeasible().any():
                if primal_ok:
                    self._x[self._basis] = xb
                    status = self._run(_primal_kernel, self._cost, max_iter)
                else:
                    for j in np.flatnonzero(self._dual_infeasible()):
                        self._place_nonbasic(j)
                    status = self._run(_dual_kernel, self._cost, n, internal_cutoff, use_cut, max_iter)
            else:
                status = self._run(_dual_kernel, self._cost, n, internal_cutoff, use_cut, max_iter)
            if status != OPTIMAL:
                break
            if self._shift.any():
                # optimal for shifted costs: drop the shifts and let the primal simplex finish
                self._shift[:] = 0.0
                self._recompute_duals()
                continue
            if self._since_refactor == 0 or self._consistent():
                break
            self._refactor()
            xb = self._basic_values()
            lob, hib = self._lo_all[self._basis], self._hi_all[self._basis]
            if (np.all(xb >= lob - FEAS_TOL) and np.all(xb <= hib + FEAS_TOL)
                    and not self._dual_infeasible().any()):
                self._x[self._basis] = xb
                break
        x = self._x[:n].copy()
        if status == OPTIMAL:
            x = np.clip(x, self._lo_all[:n], self._hi_all[:n])
            if np.any(np.abs(self._x) >= BIG * (1 - 1e-9)):
                status = UNBOUNDED
        obj = float(np.asarray(self._c) @ x) if n else 0.0
        return LpSolution(status, obj, x, self.iterations - start)

    def slacks(self) -> np.ndarray:
        """Current slack values ``b - A x``."""
        if self._T is None:
            raise RuntimeError("model has not been solved")
        return self._x[self.n_vars:].copy()

    def basic_slack_rows(self) -> np.ndarray:
        """Rows whose slack variable is basic."""
        return np.flatnonzero(self._is_basic[self.n_vars:])


# ---------------------------------------------------------------- kernels
_OPT, _INF, _CUT, _UNB, _ITL, _REFACTOR = range(6)
_CODES = {_OPT: OPTIMAL, _INF: INFEASIBLE, _CUT: CUTOFF, _UNB: UNBOUNDED, _ITL: ITERATION_LIMIT}


@njit(cache=True)
def _basic_into(T, Tb, is_basic, x, xb):
    m, N = T.shape
    nz = np.empty(N, dtype=np.int64)
    k = 0
    for j in range(N):
        if not is_basic[j] and x[j] != 0.0:
            nz[k] = j
            k += 1
    for i in range(m):
        s = Tb[i]
        for t in range(k):
            j = nz[t]
            s -= T[i, j] * x[j]
        xb[i] = s


@njit(cache=True)
def _pivot_k(T, Tb, basis, is_basic, d, r, q):
    m, N = T.shape
    inv = 1.0 / T[r, q]
    nz = np.empty(N, dtype=np.int64)
    k = 0
    for j in range(N):
        if T[r, j] != 0.0:
            T[r, j] *= inv
            nz[k] = j
            k += 1
    T[r, q] = 1.0
    Tb[r] *= inv
    for i in range(m):
        if i == r:
            continue
        f = T[i, q]
        if f != 0.0:
            for t in range(k):
                j = nz[t]
                T[i, j] -= f * T[r, j]
            Tb[i] -= f * Tb[r]
            T[i, q] = 0.0
    dq = d[q]
    if dq != 0.0:
        for t in range(k):
            j = nz[t]
            d[j] -= dq * T[r, j]
    d[q] = 0.0
    leaving = basis[r]
    basis[r] = q
    is_basic[leaving] = False
    is_basic[q] = True
    return leaving


@njit(cache=True)
def _clean_duals_k(is_basic, lo, hi, x, d, shift):
    """Shift away tolerance-level dual infeasibilities. Returns True if any shift was made."""
    shifted = False
    for j in range(d.shape[0]):
        if is_basic[j]:
            continue
        if (x[j] <= lo[j] + FEAS_TOL and 0.0 < d[j] <= DUAL_TOL) or (
                x[j] >= hi[j] - FEAS_TOL and -DUAL_TOL <= d[j] < 0.0):
            shift[j] -= d[j]
            d[j] = 0.0
            shifted = True
    return shifted


@njit(cache=True)
def _perturb_k(is_basic, lo, hi, x, d, shift, cost):
    """Push every nonbasic reduced cost a little further onto its feasible side.

    Breaks ties among zero reduced costs, which is what stalls the dual
    simplex. The amounts are deterministic and go into ``shift``.
    """
    for j in range(d.shape[0]):
        if is_basic[j] or hi[j] - lo[j] <= FEAS_TOL:
            continue
        eps = PERTURB * (1.0 + abs(cost[j])) * (1.0 + (j * 0.6180339887498949) % 1.0)
        if x[j] <= lo[j] + FEAS_TOL:
            d[j] -= eps
            shift[j] -= eps
        else:
            d[j] += eps
            shift[j] += eps


@njit(cache=True)
def _dual_slack(dj, can_inc, can_dec):
    """How far ``dj`` sits on the dual-feasible side (0 when wrong-signed)."""
    if can_inc and can_dec:
        return 0.0
    if can_inc:
        return max(-dj, 0.0)
    return max(dj, 0.0)


@njit(cache=True)
def _dual_kernel(T, Tb, basis, is_basic, lo, hi, x, d, shift, degenerate, cost, n, cutoff, use_cut,
                 max_iter, budget):
    """Bounded dual simplex with a Harris ratio test and a Bland fallback.

    The cutoff test needs true dual feasibility, so it is skipped while
    any cost shift is in force.
    """
    m, N = T.shape
    xb = np.empty(m)
    shifted = False
    for j in range(N):
        if shift[j] != 0.0:
            shifted = True
    it = 0
    while True:
        if it >= max_iter:
            return _ITL, it
        if it >= budget:
            return _REFACTOR, it
        _basic_into(T, Tb, is_basic, x, xb)
        if use_cut and not shifted:
            obj = 0.0
            for j in range(n):
                if not is_basic[j]:
                    obj += cost[j] * x[j]
            for i in range(m):
                if basis[i] < n:
                    obj += cost[basis[i]] * xb[i]
            if obj <= cutoff:
                for i in range(m):
                    x[basis[i]] = xb[i]
                return _CUT, it
        if degenerate[0] >= PERTURB_AFTER and degenerate[1] < MAX_PERTURBATIONS:
            _perturb_k(is_basic, lo, hi, x, d, shift, cost)
            degenerate[0] = 0
            degenerate[1] += 1
            shifted = True
        bland = degenerate[0] >= DEGENERATE_SWITCH
        r = -1
        worst = 0.0
        low_index = N
        for i in range(m):
            b = basis[i]
            inf = max(lo[b] - xb[i], xb[i] - hi[b])
            if inf > FEAS_TOL:
                if bland:
                    if b < low_index:
                        low_index = b
                        r = i
                else:
                    # dual steepest edge: the slack block of the tableau is B^-1
                    w = 0.0
                    for k in range(n, N):
                        w += T[i, k] * T[i, k]
                    score = inf * inf / max(w, 1e-12)
                    if score > worst:
                        worst = score
                        r = i
        if r < 0:
            for i in range(m):
                x[basis[i]] = xb[i]
            return _OPT, it
        increase = lo[basis[r]] - xb[r] > 0
        harris = np.inf
        min_ratio = np.inf
        for j in range(N):
            if is_basic[j]:
                continue
            a = T[r, j]
            if abs(a) <= PIVOT_TOL:
                continue
            ci = x[j] < hi[j] - FEAS_TOL
            cd = x[j] > lo[j] + FEAS_TOL
            if increase:
                ok = (ci and a < 0) or (cd and a > 0)
            else:
                ok = (ci and a > 0) or (cd and a < 0)
            if not ok:
                continue
            mag = _dual_slack(d[j], ci, cd)
            v = (mag + DUAL_TOL) / abs(a)
            if v < harris:
                harris = v
            ratio = mag / abs(a)
            if ratio < min_ratio:
                min_ratio = ratio
        if harris == np.inf:
            return _INF, it
        q = -1
        big_a = -1.0
        for j in range(N):
            if is_basic[j]:
                continue
            a = T[r, j]
            if abs(a) <= PIVOT_TOL:
                continue
            ci = x[j] < hi[j] - FEAS_TOL
            cd = x[j] > lo[j] + FEAS_TOL
            if increase:
                ok = (ci and a < 0) or (cd and a > 0)
            else:
                ok = (ci and a > 0) or (cd and a < 0)
            if not ok:
                continue
            ratio = _dual_slack(d[j], ci, cd) / abs(a)
            if bland:
                if ratio <= min_ratio + 1e-12:
                    q = j
                    break
            elif ratio <= harris and abs(a) > big_a:
                big_a = abs(a)
                q = j
        mag = _dual_slack(d[q], x[q] < hi[q] - FEAS_TOL, x[q] > lo[q] + FEAS_TOL)
        if mag == 0.0 and d[q] != 0.0:
            # wrong-signed within tolerance: shift instead of stepping backwards
            shift[q] -= d[q]
            d[q] = 0.0
            shifted = True
        theta = mag / abs(T[r, q])
        leaving = _pivot_k(T, Tb, basis, is_basic, d, r, q)
        x[leaving] = lo[leaving] if increase else hi[leaving]
        if _clean_duals_k(is_basic, lo, hi, x, d, shift):
            shifted = True
        degenerate[0] = degenerate[0] + 1 if theta <= 1e-12 else 0
        it += 1


@njit(cache=True)
def _primal_kernel(T, Tb, basis, is_basic, lo, hi, x, d, shift, degenerate, cost, max_iter, budget):
    """Bounded primal simplex (Dantzig pricing, bound flips, Bland fallback)."""
    m, N = T.shape
    xb = np.empty(m)
    it = 0
    while True:
        if it >= max_iter:
            return _ITL, it
        if it >= budget:
            return _REFACTOR, it
        bland = degenerate[0] >= DEGENERATE_SWITCH
        q = -1
        best = 0.0
        for j in range(N):
            if is_basic[j]:
                continue
            dj = d[j]
            if (x[j] < hi[j] - FEAS_TOL and dj > DUAL_TOL) or (x[j] > lo[j] + FEAS_TOL and dj < -DUAL_TOL):
                if bland:
                    q = j
                    break
                if abs(dj) > best:
                    best = abs(dj)
                    q = j
        _basic_into(T, Tb, is_basic, x, xb)
        if q < 0:
            for i in range(m):
                x[basis[i]] = xb[i]
            return _OPT, it
        direction = 1.0 if d[q] > 0 else -1.0
        step = hi[q] - lo[q]
        min_lim = np.inf
        for i in range(m):
            col = T[i, q] * direction
            b = basis[i]
            if col > PIVOT_TOL:
                lim = max((xb[i] - lo[b]) / col, 0.0)
            elif col < -PIVOT_TOL:
                lim = max((hi[b] - xb[i]) / -col, 0.0)
            else:
                continue
            if lim < min_lim:
                min_lim = lim
        r = -1
        if min_lim < step:
            tol = 1e-12 if bland else FEAS_TOL
            pick = -1.0
            low_index = N
            for i in range(m):
                col = T[i, q] * direction
                b = basis[i]
                if col > PIVOT_TOL:
                    lim = max((xb[i] - lo[b]) / col, 0.0)
                elif col < -PIVOT_TOL:
                    lim = max((hi[b] - xb[i]) / -col, 0.0)
                else:
                    continue
                if lim > min_lim + tol:
                    continue
                if bland:
                    if b < low_index:
                        low_index = b
                        r = i
                elif abs(col) > pick:
                    pick = abs(col)
                    r = i
            step = min_lim
        if not np.isfinite(step) or step >= 2 * BIG:
            return _UNB, it
        if r < 0:
            x[q] = hi[q] if direction > 0 else lo[q]
        else:
            to_lower = T[r, q] * direction > 0
            leaving = _pivot_k(T, Tb, basis, is_basic, d, r, q)
            x[leaving] = lo[leaving] if to_lower else hi[leaving]
        degenerate[0] = degenerate[0] + 1 if step <= 1e-12 else 0
        it += 1
