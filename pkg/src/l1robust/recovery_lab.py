"""Desk-scale checks of the l1 recovery guarantees.

Gaussian ensembles, approximately sparse signals, the LP decoder, exact
balancedness certificates on small null spaces, the single-signal (weak)
condition, and the noisy-measurement bound with sigma_min from a Jacobi
eigen-solve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import partial
from itertools import combinations

import numpy as np

from . import _rng
from ._backend import kernels
from ._parallel import parallel_map
from .errors import NumericalError, ParameterError
from .lp_core import (LpProblem, LpStatus, _subspace_pattern_lp, l1_min_as_lp,
                      solve_lp, split_to_signed)

BOUND_SLACK = 1.0e-9


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeasurementEnsemble:
    m: int
    n: int
    seed: int
    entries: np.ndarray


class NullSpaceSource(str, Enum):
    FROM_MATRIX = "from_matrix"
    DIRECT_GAUSSIAN = "direct_gaussian"


@dataclass(frozen=True)
class NullSpaceBasis:
    basis: np.ndarray
    source: NullSpaceSource


@dataclass(frozen=True)
class ApproxSparseSignal:
    values: np.ndarray
    support: np.ndarray
    tail_l1: float

    @property
    def k(self):
        return int(self.support.size)

    def off_support_mask(self):
        mask = np.ones(self.values.size, dtype=bool)
        mask[self.support] = False
        return mask


@dataclass(frozen=True)
class RecoveryReport:
    err_l1: float
    bound: float
    c_factor: float
    satisfied: bool
    kappa: float | None = None
    tail_l1: float = 0.0
    decoded_l1: float = 0.0
    true_l1: float = 0.0
    trial: int = 0


@dataclass(frozen=True)
class BalancednessCertificate:
    k: int
    c_factor: float
    worst_ratio: float
    worst_support: tuple
    holds: bool


@dataclass(frozen=True)
class NoisyReport:
    epsilon: float
    sigma_min: float
    err_l1: float
    bound: float
    satisfied: bool
    trial: int = 0


# ---------------------------------------------------------------------------
# ensembles and bases
# ---------------------------------------------------------------------------

def sample_ensemble(m, n, seed):
    """m x n matrix of i.i.d. N(0, 1) entries from a stream keyed by seed."""
    m, n = int(m), int(n)
    if not (0 < m < n):
        raise ParameterError(f"need 0 < m < n, got m={m}, n={n}")
    rng = _rng.stream(seed, 10, m, n)
    return MeasurementEnsemble(m, n, int(seed), rng.standard_normal((m, n)))


def _as_matrix(ensemble):
    if isinstance(ensemble, MeasurementEnsemble):
        return ensemble.entries
    A = np.asarray(ensemble, dtype=np.float64)
    if A.ndim != 2:
        raise ParameterError("expected a two-dimensional matrix")
    return A


def null_space_basis(ensemble):
    """Orthonormal basis of ker A from a complete QR factorisation of A^T."""
    A = _as_matrix(ensemble)
    m, n = A.shape
    Q, R = np.linalg.qr(A.T, mode="complete")
    diag = np.abs(np.diag(R[:m, :m])) if m else np.zeros(0)
    scale = float(np.abs(A).max(initial=0.0))
    if m and diag.min() <= 1e-12 * max(scale, 1.0) * n:
        raise NumericalError("matrix is numerically rank deficient; resample the ensemble")
    Z = Q[:, m:]
    resid = float(np.abs(A @ Z).max(initial=0.0))
    if resid >= 1e-8 * max(scale, 1e-300):
        raise NumericalError(f"null-space residual {resid:.3e} too large; resample the ensemble")
    return NullSpaceBasis(Z, NullSpaceSource.FROM_MATRIX)


def gaussian_null_basis(n, m, seed):
    """Basis with i.i.d. N(0, 1) entries; its span is a uniform (n-m)-subspace."""
    n, m = int(n), int(m)
    if not (0 < m < n):
        raise ParameterError(f"need 0 < m < n, got m={m}, n={n}")
    rng = _rng.stream(seed, 11, n, m)
    return NullSpaceBasis(rng.standard_normal((n, n - m)), NullSpaceSource.DIRECT_GAUSSIAN)


def _basis_array(Z):
    B = Z.basis if isinstance(Z, NullSpaceBasis) else np.asarray(Z, dtype=np.float64)
    return B[:, None] if B.ndim == 1 else B


# ---------------------------------------------------------------------------
# signals and decoding
# ---------------------------------------------------------------------------

def generate_signal(n, k, head_magnitude, tail_l1, seed):
    """Random support of size k with +-head_magnitude entries; the tail
    spreads exactly ``tail_l1`` of l1 mass uniformly with alternating signs."""
    n, k = int(n), int(k)
    head_magnitude = float(head_magnitude)
    tail_l1 = float(tail_l1)
    if not (0 <= k < n):
        raise ParameterError(f"need 0 <= k < n, got k={k}, n={n}")
    if not head_magnitude > 0.0:
        raise ParameterError("head_magnitude must be positive")
    if not tail_l1 >= 0.0:
        raise ParameterError("tail_l1 must be non-negative")
    rng = _rng.stream(seed, 12, n, k)
    support = np.sort(rng.permutation(n)[:k])
    x = np.zeros(n)
    x[support] = head_magnitude * rng.choice([-1.0, 1.0], size=k)
    mask = np.ones(n, dtype=bool)
    mask[support] = False
    r = n - k
    signs = np.where(np.arange(r) % 2 == 0, 1.0, -1.0)
    x[mask] = signs * (tail_l1 / r)
    # report the tail mass as stored, so the recomputed value matches exactly
    stored = float(np.abs(x[mask]).sum())
    return ApproxSparseSignal(x, support, stored)


def decode_l1(ensemble, y):
    """A minimiser of ||x||_1 subject to A x = y."""
    A = _as_matrix(ensemble)
    y = np.asarray(y, dtype=np.float64).ravel()
    sol = solve_lp(l1_min_as_lp(A, y))
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalError(f"l1 decoder LP returned {sol.status.value}")
    return split_to_signed(sol.point, A.shape[1])


# ---------------------------------------------------------------------------
# null-space conditions
# ---------------------------------------------------------------------------

def _sign_patterns(k):
    # the first sign is fixed to +1: a pattern and its negation give the same value
    out = [(1.0,)]
    for _ in range(k - 1):
        out = [p + (1.0,) for p in out] + [p + (-1.0,) for p in out]
    return [np.asarray(p) for p in out]


def support_ratio(Z, support):
    """max over w in span(Z) of ||w_K||_1 / ||w_Kbar||_1 for one support."""
    B = _basis_array(Z)
    support = np.asarray(support, dtype=np.int64)
    best = 0.0
    for s in _sign_patterns(support.size):
        sol = solve_lp(_subspace_pattern_lp(B, support, s))
        if sol.status is LpStatus.UNBOUNDED:
            return math.inf
        if sol.status is not LpStatus.OPTIMAL:
            raise NumericalError(f"subspace LP returned {sol.status.value}")
        best = max(best, -sol.objective_value)
    return best


def certify_balancedness(Z, k, c_factor):
    """Exact h_k over all size-k supports and whether C h_k <= 1."""
    B = _basis_array(Z)
    n = B.shape[0]
    k = int(k)
    c = float(c_factor)
    if not (1 <= k < n):
        raise ParameterError(f"need 1 <= k < n, got k={k}, n={n}")
    if not c >= 1.0:
        raise ParameterError("C must be >= 1")
    worst = -1.0
    witness = ()
    for K in combinations(range(n), k):
        r = support_ratio(B, K)
        if r > worst:
            worst, witness = r, K
        if math.isinf(r):
            break
    holds = math.isfinite(worst) and c * worst <= 1.0 + 1e-9
    return BalancednessCertificate(k, c, worst, tuple(int(i) for i in witness), holds)


def check_weak_condition(Z, x, c_factor):
    """min over w in span(Z) of ||x_K + w_K||_1 + ||w_Kbar||_1 / C versus ||x_K||_1.

    Returns (holds, margin) with margin = minimum - ||x_K||_1 (never positive,
    since w = 0 is feasible).
    """
    B = _basis_array(Z)
    n, d = B.shape
    c = float(c_factor)
    if isinstance(x, ApproxSparseSignal):
        support = x.support
        xk = x.values[support]
    else:
        vals = np.asarray(x, dtype=np.float64)
        support = np.flatnonzero(vals)
        xk = vals[support]
    if support.size == 0:
        raise ParameterError("x must have a non-empty support")
    mask = np.zeros(n, dtype=bool)
    mask[support] = True
    ZK, ZT = B[mask], B[~mask]
    k, r = ZK.shape[0], ZT.shape[0]
    # variables: c+ (d), c- (d), a (k), b (k), u (r), v (r)
    # rows: ZK (c+ - c-) - a + b = -x_K ;  ZT (c+ - c-) - u + v = 0
    nv = 2 * d + 2 * k + 2 * r
    A = np.zeros((k + r, nv))
    A[:k, :d], A[:k, d:2 * d] = ZK, -ZK
    A[:k, 2 * d:2 * d + k] = -np.eye(k)
    A[:k, 2 * d + k:2 * d + 2 * k] = np.eye(k)
    A[k:, :d], A[k:, d:2 * d] = ZT, -ZT
    A[k:, 2 * d + 2 * k:2 * d + 2 * k + r] = -np.eye(r)
    A[k:, 2 * d + 2 * k + r:] = np.eye(r)
    rhs = np.concatenate([-xk, np.zeros(r)])
    obj = np.concatenate([np.zeros(2 * d), np.ones(2 * k), np.full(2 * r, 1.0 / c)])
    sol = solve_lp(LpProblem(obj, A, rhs))
    if sol.status is not LpStatus.OPTIMAL:
        raise NumericalError(f"weak-condition LP returned {sol.status.value}")
    margin = sol.objective_value - float(np.abs(xk).sum())
    return margin >= -1e-9, margin


def kappa(Z, support):
    """max over w in span(Z) of ||w_K||_1 / ||w_Kbar||_1 for the given support."""
    return support_ratio(Z, support)


# ---------------------------------------------------------------------------
# bounds and experiments
# ---------------------------------------------------------------------------

def recovery_bound(c_factor, tail_l1):
    """2 (C + 1) Delta / (C - 1); at C = 1 only Delta = 0 gives a finite bound."""
    c = float(c_factor)
    if c == 1.0:
        return 0.0 if tail_l1 == 0.0 else math.inf
    return 2.0 * (c + 1.0) * tail_l1 / (c - 1.0)


def noisy_bound(c_factor, tail_l1, n, epsilon, sigma_min):
    c = float(c_factor)
    base = recovery_bound(c, tail_l1)
    if epsilon == 0.0:
        return base
    if c == 1.0:
        return math.inf
    return base + (3.0 * c + 1.0) * math.sqrt(n) * epsilon / ((c - 1.0) * sigma_min)


def _sizes(delta, rho, n):
    delta, rho, n = float(delta), float(rho), int(n)
    if not (0.0 < delta < 1.0):
        raise ParameterError("delta must lie in (0, 1)")
    if not (0.0 < rho < 1.0):
        raise ParameterError("rho must lie in (0, 1)")
    m = int(round(delta * n))
    k = int(round(rho * delta * n))
    if not (1 <= k < m < n):
        raise ParameterError(f"sizes m={m}, k={k} invalid for n={n}; need 1 <= k < m < n")
    return m, k


def _recovery_trial(trial, n, m, k, c, tail_l1, head, seed):
    ens = sample_ensemble(m, n, _rng.stream(seed, 20, trial).integers(2 ** 62))
    sig = generate_signal(n, k, head, tail_l1, _rng.stream(seed, 21, trial).integers(2 ** 62))
    y = ens.entries @ sig.values
    xh = decode_l1(ens, y)
    err = float(np.abs(sig.values - xh).sum())
    bound = recovery_bound(c, sig.tail_l1)
    return RecoveryReport(err, bound, c, err <= bound + BOUND_SLACK, None, sig.tail_l1,
                          float(np.abs(xh).sum()), float(np.abs(sig.values).sum()), trial)


def recovery_experiment(delta, rho, c_factor, n, trials, tail_l1, seed,
                        head_magnitude=1.0, jobs=None):
    """Per-trial decode of y = A x with an approximately k-sparse x."""
    m, k = _sizes(delta, rho, n)
    c = float(c_factor)
    if c < 1.0:
        raise ParameterError("C must be >= 1")
    fn = partial(_recovery_trial, n=int(n), m=m, k=k, c=c, tail_l1=float(tail_l1),
                 head=float(head_magnitude), seed=int(seed))
    return parallel_map(fn, range(int(trials)), jobs)


def adversarial_all_ones(n, k):
    """Tightness example: A = [I_{n-1} | -1] has ker A = span(1).

    x is -1 on the first n/2 coordinates and 0 elsewhere; x + 1 has the
    same l1 norm and the same measurements.  Returns (report, x, x_hat)
    where the report's bound uses C' = (n - k)/k, the largest C for which
    the null space is balanced.
    """
    n, k = int(n), int(k)
    if n % 2 or not (1 <= k < n // 2):
        raise ParameterError("need even n and 1 <= k < n/2")
    A = np.hstack([np.eye(n - 1), -np.ones((n - 1, 1))])
    x = np.zeros(n)
    x[: n // 2] = -1.0
    x_hat = x + 1.0
    if np.abs(A @ x_hat - A @ x).max() > 0.0:
        raise NumericalError("alternative point is not consistent with the measurements")
    tail = float(np.abs(x[k:]).sum())
    err = float(np.abs(x - x_hat).sum())
    c_prime = (n - k) / k
    bound = recovery_bound(c_prime, tail)
    rep = RecoveryReport(err, bound, c_prime, err <= bound + BOUND_SLACK, None, tail,
                         float(np.abs(x_hat).sum()), float(np.abs(x).sum()))
    return rep, x, x_hat


def sigma_min(matrix, tol=1e-14, max_sweeps=60):
    """Smallest singular value of a wide matrix from the Gram eigenvalues."""
    A = _as_matrix(matrix)
    G = A @ A.T
    w, V, _ = kernels.jacobi_eigh(G, tol, max_sweeps)
    i = int(np.argmin(w))
    lam = max(float(w[i]), 0.0)
    s = math.sqrt(lam)
    if s > 0.0:
        v = A.T @ V[:, i] / s
        resid = float(np.linalg.norm(A.T @ (A @ v) - lam * v))
        if resid >= 1e-6 * max(1.0, float(w.max())):
            raise NumericalError(f"singular-vector residual {resid:.3e} too large")
    return s


def sigma_min_study(n, delta, seeds):
    """sigma_min(A)/sqrt(n) for one Gaussian ensemble per seed."""
    m = int(round(float(delta) * int(n)))
    return [sigma_min(sample_ensemble(m, int(n), s)) / math.sqrt(int(n)) for s in seeds]


def _noisy_trial(trial, n, m, k, c, epsilon, relative, tail_l1, head, seed):
    ens = sample_ensemble(m, n, _rng.stream(seed, 30, trial).integers(2 ** 62))
    sig = generate_signal(n, k, head, tail_l1, _rng.stream(seed, 31, trial).integers(2 ** 62))
    smin = sigma_min(ens)
    if smin < 1e-10:
        raise NumericalError("ensemble is ill-conditioned (sigma_min < 1e-10)")
    y0 = ens.entries @ sig.values
    eps = epsilon * float(np.linalg.norm(y0)) if relative else epsilon
    g = _rng.stream(seed, 32, trial).standard_normal(m)
    b = eps * g / float(np.linalg.norm(g))
    xh = decode_l1(ens, y0 + b)
    err = float(np.abs(sig.values - xh).sum())
    bound = noisy_bound(c, sig.tail_l1, n, eps, smin)
    return NoisyReport(eps, smin, err, bound, err <= bound + BOUND_SLACK, trial)


def noisy_experiment(delta, rho, c_factor, n, epsilon, trials, seed, tail_l1=0.0,
                     relative=False, head_magnitude=1.0, jobs=None):
    """Decode y = A x + b with ||b||_2 = epsilon (or epsilon ||A x||_2 when
    ``relative``) and compare against the noise-augmented bound."""
    m, k = _sizes(delta, rho, n)
    epsilon = float(epsilon)
    if not epsilon >= 0.0:
        raise ParameterError("epsilon must be non-negative")
    c = float(c_factor)
    if c < 1.0:
        raise ParameterError("C must be >= 1")
    fn = partial(_noisy_trial, n=int(n), m=m, k=k, c=c, epsilon=epsilon,
                 relative=bool(relative), tail_l1=float(tail_l1),
                 head=float(head_magnitude), seed=int(seed))
    return parallel_map(fn, range(int(trials)), jobs)
