"""Dense two-phase simplex with Bland's rule, plus the l1-to-LP reductions.

Problems are in equality form: minimise c.x subject to A x = b and
x >= lower (lower defaults to 0).  Every optimal return is re-verified by
recomputing the duals from the final basis.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from ._backend import kernels
from .errors import NumericalError, ParameterError

PIVOT_TOL = 1.0e-9
FEAS_TOL = 1.0e-8
MAX_REFACTOR = 5
REFACTOR_EVERY = 100


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpProblem:
    """minimise objective . x  s.t.  eq_matrix x = eq_rhs,  x >= var_lower_bounds."""

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    var_lower_bounds: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=np.float64).ravel()
        A = np.asarray(self.eq_matrix, dtype=np.float64)
        b = np.asarray(self.eq_rhs, dtype=np.float64).ravel()
        if A.ndim != 2:
            if A.size == 0:
                A = A.reshape(0, c.size)
            else:
                raise ParameterError("eq_matrix must be two-dimensional")
        if A.shape != (b.size, c.size):
            raise ParameterError(
                f"dimension mismatch: eq_matrix {A.shape}, rhs {b.size}, objective {c.size}"
            )
        lb = (np.zeros(c.size) if self.var_lower_bounds is None
              else np.asarray(self.var_lower_bounds, dtype=np.float64).ravel())
        if lb.size != c.size:
            raise ParameterError("var_lower_bounds length differs from objective")
        for name, arr in (("objective", c), ("eq_matrix", A), ("eq_rhs", b),
                          ("var_lower_bounds", lb)):
            if not np.all(np.isfinite(arr)):
                raise ParameterError(f"{name} contains non-finite values")
        self.objective, self.eq_matrix, self.eq_rhs, self.var_lower_bounds = c, A, b, lb

    @property
    def var_count(self):
        return self.objective.size

    @property
    def constraint_count(self):
        return self.eq_rhs.size


@dataclass
class LpSolution:
    status: LpStatus
    point: np.ndarray
    objective_value: float
    feasibility_residual: float
    reduced_cost_min: float
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0


def _refactor(T, basis, A, b, c):
    """Rebuild tableau T in place from the original data and the basis.

    Returns (y, xb): the duals and basic values for that basis.
    """
    m = basis.size
    B = A[:, basis]
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        try:
            lu = lu_factor(B, check_finite=False)
        except (LinAlgWarning, ValueError) as exc:
            raise NumericalError("singular basis during refactorisation") from exc
    T[:m, :-1] = lu_solve(lu, A, check_finite=False)
    xb = lu_solve(lu, b, check_finite=False)
    y = lu_solve(lu, c[basis], trans=1, check_finite=False)
    T[:m, -1] = np.where(np.abs(xb) < 1e-11, 0.0, xb)
    T[:m, basis] = np.eye(m)
    T[m, :-1] = c - A.T @ y
    T[m, basis] = 0.0
    T[m, -1] = -float(y @ b)
    return y, xb


def _phase(T, basis, A, b, c, n_allowed, cap, used):
    """Bland pivots with refactorisation every REFACTOR_EVERY pivots and a
    from-scratch optimality check before returning."""
    checks = 0
    while True:
        budget = min(REFACTOR_EVERY, cap - used)
        status, it, _ = kernels.simplex_iterate(T, basis, n_allowed, PIVOT_TOL, budget)
        used += it
        if status == kernels.STATUS_UNBOUNDED:
            return status, used, None
        if status == kernels.STATUS_ITERATION_CAP:
            if used >= cap:
                raise NumericalError(f"simplex iteration cap {cap} reached; this indicates cycling")
            _refactor(T, basis, A, b, c)
            continue
        y, xb = _refactor(T, basis, A, b, c)
        rc = T[-1, :n_allowed]
        if rc.min(initial=0.0) >= -PIVOT_TOL and xb.min(initial=0.0) >= -FEAS_TOL:
            return status, used, (y, xb)
        checks += 1
        if checks > MAX_REFACTOR:
            raise NumericalError("optimality certificate could not be re-established")
        T[:-1, -1] = np.maximum(T[:-1, -1], 0.0)


def solve_lp(problem):
    """Two-phase primal simplex (Bland's rule) on a dense tableau."""
    if not isinstance(problem, LpProblem):
        raise ParameterError("solve_lp expects an LpProblem")
    c0 = problem.objective
    A0 = problem.eq_matrix
    lb = problem.var_lower_bounds
    b0 = problem.eq_rhs - A0 @ lb
    m, n = A0.shape
    cap = 50 * (n + m) + 50

    # row equilibration; zero rows must have zero rhs
    rscale = np.abs(A0).max(axis=1) if n else np.zeros(m)
    zero_rows = rscale == 0.0
    if np.any(np.abs(b0[zero_rows]) > FEAS_TOL * (1.0 + np.abs(b0).max(initial=0.0))):
        return _infeasible(problem)
    rows = np.flatnonzero(~zero_rows)
    sign = np.where(b0[rows] < 0.0, -1.0, 1.0)
    D = sign / rscale[rows]
    A = A0[rows] * D[:, None]
    b = b0[rows] * D
    cs = float(np.abs(c0).max(initial=0.0)) or 1.0
    c = c0 / cs
    m1 = rows.size

    if m1 == 0:
        if np.any(c < -PIVOT_TOL):
            return _unbounded(problem, lb, 0)
        return _finish(problem, lb.copy(), np.zeros(m), 0)

    # phase 1 on [A | I] with artificial costs
    A1 = np.hstack([A, np.eye(m1)])
    c1 = np.concatenate([np.zeros(n), np.ones(m1)])
    T = np.zeros((m1 + 1, n + m1 + 1))
    T[:m1, :n] = A
    T[:m1, n:n + m1] = np.eye(m1)
    T[:m1, -1] = b
    T[m1, :n] = -A.sum(axis=0)
    T[m1, -1] = -b.sum()
    basis = np.arange(n, n + m1, dtype=np.int64)
    _, used, _ = _phase(T, basis, A1, b, c1, n + m1, cap, 0)
    if -T[m1, -1] > FEAS_TOL * (1.0 + float(np.abs(b).max())):
        return _infeasible(problem, used)

    # drive artificials out of the basis; rows where that fails are redundant
    keep = np.ones(m1, dtype=bool)
    for i in range(m1):
        if basis[i] >= n:
            row = np.abs(T[i, :n])
            j = int(np.argmax(row))
            if row[j] > PIVOT_TOL:
                kernels.pivot(T, i, j)
                basis[i] = j
            else:
                keep[i] = False
    kept = np.flatnonzero(keep)
    m2 = kept.size
    Ak = np.ascontiguousarray(A[kept])
    bk = b[kept]
    basis = np.ascontiguousarray(basis[kept])

    # phase 2
    T2 = np.zeros((m2 + 1, n + 1))
    _refactor(T2, basis, Ak, bk, c)
    status, used, cert = _phase(T2, basis, Ak, bk, c, n, cap, used)
    if status == kernels.STATUS_UNBOUNDED:
        return _unbounded(problem, lb, used)
    y, xb = cert

    x = np.zeros(n)
    x[basis] = np.maximum(xb, 0.0)
    duals = np.zeros(m)
    duals[rows[kept]] = cs * D[kept] * y
    return _finish(problem, x + lb, duals, used)


def _finish(problem, x, duals, iterations):
    A, b, c = problem.eq_matrix, problem.eq_rhs, problem.objective
    resid = float(np.abs(A @ x - b).max(initial=0.0))
    rc = c - A.T @ duals
    return LpSolution(LpStatus.OPTIMAL, x, float(c @ x), resid,
                      float(rc.min(initial=0.0)), duals, iterations)


def _infeasible(problem, iterations=0):
    n = problem.var_count
    return LpSolution(LpStatus.INFEASIBLE, np.full(n, np.nan), math.nan, math.inf,
                      math.nan, np.zeros(problem.constraint_count), iterations)


def _unbounded(problem, lb, iterations):
    return LpSolution(LpStatus.UNBOUNDED, lb.copy(), -math.inf, math.nan, -math.inf,
                      np.zeros(problem.constraint_count), iterations)


# ---------------------------------------------------------------------------
# l1 reductions
# ---------------------------------------------------------------------------

def l1_min_as_lp(matrix, y):
    """min ||x||_1 s.t. A x = y, with x = u - v and u, v >= 0.

    Map a solution back with ``split_to_signed(point, n)``.
    """
    A = np.asarray(matrix, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if A.ndim != 2:
        raise ParameterError("matrix must be two-dimensional")
    m, n = A.shape
    if m > n:
        raise ParameterError("l1_min_as_lp expects m <= n")
    if y.size != m:
        raise ParameterError("y length differs from the number of rows")
    return LpProblem(np.ones(2 * n), np.hstack([A, -A]), y)


def split_to_signed(point, n):
    """x = u - v from the stacked split variables (u, v)."""
    point = np.asarray(point)
    return point[:n] - point[n:2 * n]


def _subspace_pattern_lp(Z, support, signs):
    # variables: c+ (d), c- (d), u (r), v (r), slack (1)
    # rows: Z_Kbar (c+ - c-) - u + v = 0 ;  sum(u + v) + slack = 1
    n, d = Z.shape
    mask = np.zeros(n, dtype=bool)
    mask[support] = True
    ZK = Z[mask]
    ZT = Z[~mask]
    r = ZT.shape[0]
    g = signs @ ZK
    nv = 2 * d + 2 * r + 1
    A = np.zeros((r + 1, nv))
    A[:r, :d] = ZT
    A[:r, d:2 * d] = -ZT
    A[:r, 2 * d:2 * d + r] = -np.eye(r)
    A[:r, 2 * d + r:2 * d + 2 * r] = np.eye(r)
    A[r, 2 * d:] = 1.0
    b = np.zeros(r + 1)
    b[r] = 1.0
    c = np.zeros(nv)
    c[:d] = -g
    c[d:2 * d] = g
    return LpProblem(c, A, b)


def max_l1_on_subspace(Z, support, sign_pattern):
    """max sum_i s_i w_{K_i} over w in span(Z) with ||w_{Kbar}||_1 <= 1.

    Returns ``math.inf`` when the LP is unbounded, which happens exactly when
    some w in span(Z) vanishes off K but has a positive s-component on K.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    support = np.asarray(list(support), dtype=np.int64)
    signs = np.asarray(sign_pattern, dtype=np.float64).ravel()
    n = Z.shape[0]
    if support.size < 1:
        raise ParameterError("support must be non-empty")
    if support.size != signs.size:
        raise ParameterError("sign pattern length differs from support size")
    if np.unique(support).size != support.size or support.min() < 0 or support.max() >= n:
        raise ParameterError("support indices must be distinct and in range")
    if not np.all(np.abs(signs) == 1.0):
        raise ParameterError("sign pattern entries must be +1 or -1")
    sol = solve_lp(_subspace_pattern_lp(Z, support, signs))
    if sol.status is LpStatus.UNBOUNDED:
        return math.inf
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalError(f"subspace LP returned {sol.status.value}")
    return -sol.objective_value
