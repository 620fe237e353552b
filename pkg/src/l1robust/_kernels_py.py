"""Pure-Python kernels.

This module mirrors ``_kernels.pyx`` function for function and is used when
the compiled extension is unavailable (or ``L1ROBUST_PURE_PYTHON=1``).  The
arithmetic is written in the same order as the Cython source so the two
backends agree to rounding.
"""
import math

import numpy as np
from scipy.special import erf, erfc, erfcx, ndtr

SQRT2 = math.sqrt(2.0)
SQRT_PI = math.sqrt(math.pi)
HN_MEAN = math.sqrt(2.0 / math.pi)
LOG2 = math.log(2.0)
INV_PHI = 0.5 * (math.sqrt(5.0) - 1.0)

SERIES_Z = 8.0
SERIES_TERMS = 30
MAX_ITER = 300

MODE_WEAK = 0
MODE_SECTIONAL = 1
MODE_STRONG = 2

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_ITERATION_CAP = 2


# ---------------------------------------------------------------------------
# scalar special functions
# ---------------------------------------------------------------------------

def log_erf(x):
    """log(erf(x)) for x > 0 without loss near x = 0 or x large."""
    if x < 0.5:
        return math.log(float(erf(x)))
    return math.log1p(-float(erfc(x)))


def entropy(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log1p(-p)


def mills_deficit(s):
    """1 - M(s) for s < 0, where Phi(s) = M(s) phi(s) / |s|."""
    z = -s / SQRT2
    if z >= SERIES_Z:
        u = 1.0 / (2.0 * z * z)
        term = u
        total = u
        for j in range(2, SERIES_TERMS + 1):
            term *= -(2.0 * j - 1.0) * u
            total += term
        return total
    return 1.0 - SQRT_PI * z * float(erfcx(z))


def mills_deficit_deriv(s):
    """d/ds of mills_deficit."""
    z = -s / SQRT2
    if z >= SERIES_Z:
        u = 1.0 / (2.0 * z * z)
        term = u
        total = 2.0 * u
        for j in range(2, SERIES_TERMS + 1):
            term *= -(2.0 * j - 1.0) * u
            total += 2.0 * j * term
        return total / (z * SQRT2)
    dz = 2.0 * z - SQRT_PI * float(erfcx(z)) * (1.0 + 2.0 * z * z)
    return -dz / SQRT2


def cgf(s):
    """Cumulant generating function of |N(0,1)|: s^2/2 + log(2 Phi(s))."""
    if s < 0.0:
        return math.log(float(erfcx(-s / SQRT2)))
    return 0.5 * s * s + LOG2 + math.log(float(ndtr(s)))


def cgf_prime(s):
    if s < 0.0:
        d = mills_deficit(s)
        return -s * d / (1.0 - d)
    phi = math.exp(-0.5 * s * s) / math.sqrt(2.0 * math.pi)
    return s + phi / float(ndtr(s))


def cgf_second(s):
    if s < -1.0e4:
        u = 1.0 / (s * s)
        return u - 6.0 * u * u
    y = cgf_prime(s)
    return 1.0 - (y - s) * y


def rate_dual(y):
    """Solve cgf_prime(s) = y for s < 0; return (s, s*y - cgf(s))."""
    lo = -1.0e4
    while cgf_prime(lo) >= y:
        lo *= 10.0
        if lo < -1.0e300:
            raise ValueError("rate function argument too close to 0")
    hi = -1.0e-12
    if cgf_prime(hi) <= y:
        return hi, hi * y - cgf(hi)
    if y > 0.5 * HN_MEAN:
        s = (y - HN_MEAN) / (1.0 - 2.0 / math.pi)
    else:
        s = -1.0 / y
    if not (lo < s < hi):
        s = 0.5 * (lo + hi)
    for _ in range(MAX_ITER):
        f = cgf_prime(s) - y
        if f > 0.0:
            hi = s
        else:
            lo = s
        d = cgf_second(s)
        s_new = s - f / d if d > 0.0 else 0.5 * (lo + hi)
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        if abs(s_new - s) <= 1.0e-15 * (1.0 + abs(s)):
            s = s_new
            break
        s = s_new
    return s, s * y - cgf(s)


def xi_min(gamma):
    """Minimise xi_gamma(y) = (1-gamma)/gamma * y^2/2 + rate(y).

    The minimiser satisfies M(s) = 1 - gamma in the dual variable, which is a
    monotone one-dimensional root.  Returns (y_min, xi_min, s_min).
    """
    if gamma >= 1.0:
        return HN_MEAN, 0.0, 0.0
    r = (1.0 - gamma) / gamma
    target = math.log(gamma)
    hi = 0.0
    lo = -2.0 / math.sqrt(gamma) - 10.0
    while mills_deficit(lo) >= gamma:
        lo *= 2.0
    if gamma < 0.3:
        s = -1.0 / math.sqrt(gamma)
    else:
        s = -SQRT2 * (1.0 - gamma) / SQRT_PI
    if not (lo < s < hi):
        s = 0.5 * (lo + hi)
    for _ in range(MAX_ITER):
        d = mills_deficit(s)
        f = math.log(d) - target
        if f > 0.0:
            hi = s
        else:
            lo = s
        dd = mills_deficit_deriv(s)
        s_new = s - f * d / dd if dd > 0.0 else 0.5 * (lo + hi)
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        if abs(s_new - s) <= 1.0e-15 * (1.0 + abs(s)):
            s = s_new
            break
        s = s_new
    y = -s / r
    xi = 0.5 * r * y * y + s * y - cgf(s)
    return y, xi, s


def x_nu_lhs(x):
    """2 x G(x) / g(x) with G = erf and g its derivative."""
    return SQRT_PI * x * float(erf(x)) * math.exp(x * x)


def solve_x_nu(nu, nu_prime):
    """Root of 2 x G(x)/g(x) = (1 - nu)/nu_prime, solved in log form."""
    if nu >= 1.0:
        return 0.0
    rhs = (1.0 - nu) / nu_prime
    target = math.log(rhs)
    lo = 0.0
    hi = 1.0
    while math.log(SQRT_PI) + math.log(hi) + log_erf(hi) + hi * hi < target:
        hi *= 2.0
    if rhs < 1.0:
        x = math.sqrt(0.5 * rhs)
    else:
        x = math.sqrt(math.log(rhs) + 0.5)
    if not (lo < x < hi):
        x = 0.5 * (lo + hi)
    for _ in range(MAX_ITER):
        ex = float(erf(x))
        f = math.log(SQRT_PI) + math.log(x) + math.log(ex) + x * x - target
        if f > 0.0:
            hi = x
        else:
            lo = x
        df = 1.0 / x + 2.0 / SQRT_PI * math.exp(-x * x) / ex + 2.0 * x
        x_new = x - f / df
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1.0e-15 * x:
            x = x_new
            break
        x = x_new
    return x


# ---------------------------------------------------------------------------
# exponents
# ---------------------------------------------------------------------------

def psi_ext(nu, nu_prime):
    if nu >= 1.0:
        return 0.0
    x = solve_x_nu(nu, nu_prime)
    return nu_prime * x * x - (1.0 - nu) * log_erf(x)


def psi_int(nu, zeta, c_factor):
    gap = nu - zeta
    if gap <= 0.0:
        return 0.0
    c2 = c_factor * c_factor
    gamma = c2 * zeta / ((c2 - 1.0) * zeta + nu)
    _, xi, _ = xi_min(gamma)
    return (xi + LOG2) * gap


def psi_com(nu, zeta, mode):
    face = entropy((nu - zeta) / (1.0 - zeta)) * (1.0 - zeta) + (nu - zeta) * LOG2
    if mode == MODE_WEAK:
        return face
    if mode == MODE_SECTIONAL:
        return face + zeta * LOG2
    return face + zeta * LOG2 + entropy(zeta)


def psi_net(nu, rho, delta, c_factor, mode):
    zeta = rho * delta
    nu_prime = (c_factor * c_factor - 1.0) * zeta + nu
    return (psi_com(nu, zeta, mode) - psi_int(nu, zeta, c_factor)
            - psi_ext(nu, nu_prime))


def psi_net_grid(nus, rho, delta, c_factor, mode):
    nus = np.asarray(nus, dtype=np.float64)
    out = np.empty(nus.shape[0])
    for i in range(nus.shape[0]):
        out[i] = psi_net(nus[i], rho, delta, c_factor, mode)
    return out


def _golden_max(a, b, rho, delta, c_factor, mode, tol):
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1 = psi_net(x1, rho, delta, c_factor, mode)
    f2 = psi_net(x2, rho, delta, c_factor, mode)
    while b - a > tol:
        if f1 >= f2:
            b = x2
            x2 = x1
            f2 = f1
            x1 = b - INV_PHI * (b - a)
            f1 = psi_net(x1, rho, delta, c_factor, mode)
        else:
            a = x1
            x1 = x2
            f1 = f2
            x2 = a + INV_PHI * (b - a)
            f2 = psi_net(x2, rho, delta, c_factor, mode)
    if f1 >= f2:
        return x1, f1
    return x2, f2


def max_psi_net(rho, delta, c_factor, mode, nu_hi, grid_size, n_refine, tol):
    """Grid search of psi_net over [delta, nu_hi] with golden-section polish.

    Returns (nu_star, value).
    """
    nus = np.linspace(delta, nu_hi, grid_size)
    vals = psi_net_grid(nus, rho, delta, c_factor, mode)
    order = np.argsort(-vals, kind="stable")
    best_i = int(order[0])
    best_nu = float(nus[best_i])
    best_val = float(vals[best_i])
    for r in range(min(n_refine, grid_size)):
        i = int(order[r])
        a = float(nus[i - 1]) if i > 0 else float(nus[0])
        b = float(nus[i + 1]) if i < grid_size - 1 else float(nus[grid_size - 1])
        nu_r, val_r = _golden_max(a, b, rho, delta, c_factor, mode, tol)
        if val_r > best_val:
            best_nu = nu_r
            best_val = val_r
    return best_nu, best_val


# ---------------------------------------------------------------------------
# dense simplex iterations (Bland's rule) on a tableau, in place
# ---------------------------------------------------------------------------

def simplex_iterate(T, basis, n_allowed, tol, max_iter):
    """Run primal simplex pivots on tableau T until optimal/unbounded/cap.

    T has constraint rows [A | b] followed by a final reduced-cost row
    [cbar | -z]; ``basis[i]`` is the basic column of row i.  Only columns
    below ``n_allowed`` may enter.  Returns (status, iterations, column),
    where column is the unbounded entering column or -1.
    """
    m = T.shape[0] - 1
    it = 0
    while True:
        row = T[m, :n_allowed]
        cand = np.flatnonzero(row < -tol)
        if cand.size == 0:
            return STATUS_OPTIMAL, it, -1
        if it >= max_iter:
            return STATUS_ITERATION_CAP, it, -1
        j = int(cand[0])
        col = T[:m, j]
        pos = np.flatnonzero(col > tol)
        if pos.size == 0:
            return STATUS_UNBOUNDED, it, j
        ratios = T[pos, -1] / col[pos]
        rmin = ratios.min()
        ties = pos[ratios <= rmin + 1e-12 * max(1.0, abs(rmin))]
        i = int(ties[np.argmin(basis[ties])])
        pivot(T, i, j)
        basis[i] = j
        it += 1


def pivot(T, i, j):
    T[i, :] /= T[i, j]
    f = T[:, j].copy()
    f[i] = 0.0
    T -= np.outer(f, T[i, :])
    T[:, j] = 0.0
    T[i, j] = 1.0
    m = T.shape[0] - 1
    rhs = T[:m, -1]
    rhs[np.abs(rhs) < 1e-11] = 0.0


# ---------------------------------------------------------------------------
# cyclic Jacobi eigen-solver for symmetric matrices
# ---------------------------------------------------------------------------

def jacobi_eigh(S, tol, max_sweeps):
    """Eigenvalues/vectors of symmetric S by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors as columns, sweeps).
    """
    A = np.array(S, dtype=np.float64, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    scale = math.sqrt(float(np.sum(A * A)))
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        off = math.sqrt(float(np.sum(np.triu(A, 1) ** 2)) * 2.0)
        if off <= tol * scale:
            sweeps -= 1
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-18 * (abs(A[p, p]) + abs(A[q, q])) + 1e-300:
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                elif tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    return np.diag(A).copy(), V, sweeps
