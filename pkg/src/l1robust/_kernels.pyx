# cython: language_level=3
"""Compiled kernels.

Same functions, signatures and return conventions as ``_kernels_py``.  The
special functions come from ``scipy.special.cython_special`` so both
backends evaluate identical primitives.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, log1p, exp, fabs, M_PI
from scipy.special.cython_special cimport erf, erfc, erfcx, ndtr

cnp.import_array()

cdef double SQRT2 = sqrt(2.0)
cdef double SQRT_PI = sqrt(M_PI)
cdef double HN_MEAN = sqrt(2.0 / M_PI)
cdef double LOG2 = log(2.0)
cdef double INV_PHI = 0.5 * (sqrt(5.0) - 1.0)
cdef double SERIES_Z = 8.0
cdef int SERIES_TERMS = 30
cdef int MAX_ITER = 300

MODE_WEAK = 0
MODE_SECTIONAL = 1
MODE_STRONG = 2
STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_ITERATION_CAP = 2


cdef inline double c_log_erf(double x) nogil:
    if x < 0.5:
        return log(erf(x))
    return log1p(-erfc(x))


cdef inline double c_entropy(double p) nogil:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * log(p) - (1.0 - p) * log1p(-p)


cdef double c_mills_deficit(double s) nogil:
    cdef double z = -s / SQRT2
    cdef double u, term, total
    cdef int j
    if z >= SERIES_Z:
        u = 1.0 / (2.0 * z * z)
        term = u
        total = u
        for j in range(2, SERIES_TERMS + 1):
            term *= -(2.0 * j - 1.0) * u
            total += term
        return total
    return 1.0 - SQRT_PI * z * erfcx(z)


cdef double c_mills_deficit_deriv(double s) nogil:
    cdef double z = -s / SQRT2
    cdef double u, term, total, dz
    cdef int j
    if z >= SERIES_Z:
        u = 1.0 / (2.0 * z * z)
        term = u
        total = 2.0 * u
        for j in range(2, SERIES_TERMS + 1):
            term *= -(2.0 * j - 1.0) * u
            total += 2.0 * j * term
        return total / (z * SQRT2)
    dz = 2.0 * z - SQRT_PI * erfcx(z) * (1.0 + 2.0 * z * z)
    return -dz / SQRT2


cdef double c_cgf(double s) nogil:
    if s < 0.0:
        return log(erfcx(-s / SQRT2))
    return 0.5 * s * s + LOG2 + log(ndtr(s))


cdef double c_cgf_prime(double s) nogil:
    cdef double d, phi
    if s < 0.0:
        d = c_mills_deficit(s)
        return -s * d / (1.0 - d)
    phi = exp(-0.5 * s * s) / sqrt(2.0 * M_PI)
    return s + phi / ndtr(s)


cdef double c_cgf_second(double s) nogil:
    cdef double u, y
    if s < -1.0e4:
        u = 1.0 / (s * s)
        return u - 6.0 * u * u
    y = c_cgf_prime(s)
    return 1.0 - (y - s) * y


cdef int c_rate_dual(double y, double *s_out, double *val_out) nogil:
    cdef double lo = -1.0e4, hi = -1.0e-12, s, f, d, s_new
    cdef int it
    while c_cgf_prime(lo) >= y:
        lo *= 10.0
        if lo < -1.0e300:
            return -1
    if c_cgf_prime(hi) <= y:
        s_out[0] = hi
        val_out[0] = hi * y - c_cgf(hi)
        return 0
    if y > 0.5 * HN_MEAN:
        s = (y - HN_MEAN) / (1.0 - 2.0 / M_PI)
    else:
        s = -1.0 / y
    if not (lo < s < hi):
        s = 0.5 * (lo + hi)
    for it in range(MAX_ITER):
        f = c_cgf_prime(s) - y
        if f > 0.0:
            hi = s
        else:
            lo = s
        d = c_cgf_second(s)
        if d > 0.0:
            s_new = s - f / d
        else:
            s_new = 0.5 * (lo + hi)
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        if fabs(s_new - s) <= 1.0e-15 * (1.0 + fabs(s)):
            s = s_new
            break
        s = s_new
    s_out[0] = s
    val_out[0] = s * y - c_cgf(s)
    return 0


cdef void c_xi_min(double gamma, double *y_out, double *xi_out, double *s_out) nogil:
    cdef double r, target, hi, lo, s, d, f, dd, s_new, y
    cdef int it
    if gamma >= 1.0:
        y_out[0] = HN_MEAN
        xi_out[0] = 0.0
        s_out[0] = 0.0
        return
    r = (1.0 - gamma) / gamma
    target = log(gamma)
    hi = 0.0
    lo = -2.0 / sqrt(gamma) - 10.0
    while c_mills_deficit(lo) >= gamma:
        lo *= 2.0
    if gamma < 0.3:
        s = -1.0 / sqrt(gamma)
    else:
        s = -SQRT2 * (1.0 - gamma) / SQRT_PI
    if not (lo < s < hi):
        s = 0.5 * (lo + hi)
    for it in range(MAX_ITER):
        d = c_mills_deficit(s)
        f = log(d) - target
        if f > 0.0:
            hi = s
        else:
            lo = s
        dd = c_mills_deficit_deriv(s)
        if dd > 0.0:
            s_new = s - f * d / dd
        else:
            s_new = 0.5 * (lo + hi)
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        if fabs(s_new - s) <= 1.0e-15 * (1.0 + fabs(s)):
            s = s_new
            break
        s = s_new
    y = -s / r
    y_out[0] = y
    xi_out[0] = 0.5 * r * y * y + s * y - c_cgf(s)
    s_out[0] = s


cdef double c_solve_x_nu(double nu, double nu_prime) nogil:
    cdef double rhs, target, lo, hi, x, ex, f, df, x_new
    cdef int it
    if nu >= 1.0:
        return 0.0
    rhs = (1.0 - nu) / nu_prime
    target = log(rhs)
    lo = 0.0
    hi = 1.0
    while log(SQRT_PI) + log(hi) + c_log_erf(hi) + hi * hi < target:
        hi *= 2.0
    if rhs < 1.0:
        x = sqrt(0.5 * rhs)
    else:
        x = sqrt(log(rhs) + 0.5)
    if not (lo < x < hi):
        x = 0.5 * (lo + hi)
    for it in range(MAX_ITER):
        ex = erf(x)
        f = log(SQRT_PI) + log(x) + log(ex) + x * x - target
        if f > 0.0:
            hi = x
        else:
            lo = x
        df = 1.0 / x + 2.0 / SQRT_PI * exp(-x * x) / ex + 2.0 * x
        x_new = x - f / df
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if fabs(x_new - x) <= 1.0e-15 * x:
            x = x_new
            break
        x = x_new
    return x


cdef double c_psi_ext(double nu, double nu_prime) nogil:
    cdef double x
    if nu >= 1.0:
        return 0.0
    x = c_solve_x_nu(nu, nu_prime)
    return nu_prime * x * x - (1.0 - nu) * c_log_erf(x)


cdef double c_psi_int(double nu, double zeta, double c_factor) nogil:
    cdef double gap = nu - zeta, c2, gamma, y, xi, s
    if gap <= 0.0:
        return 0.0
    c2 = c_factor * c_factor
    gamma = c2 * zeta / ((c2 - 1.0) * zeta + nu)
    c_xi_min(gamma, &y, &xi, &s)
    return (xi + LOG2) * gap


cdef double c_psi_com(double nu, double zeta, int mode) nogil:
    cdef double face = c_entropy((nu - zeta) / (1.0 - zeta)) * (1.0 - zeta) + (nu - zeta) * LOG2
    if mode == 0:
        return face
    if mode == 1:
        return face + zeta * LOG2
    return face + zeta * LOG2 + c_entropy(zeta)


cdef double c_psi_net(double nu, double rho, double delta, double c_factor, int mode) nogil:
    cdef double zeta = rho * delta
    cdef double nu_prime = (c_factor * c_factor - 1.0) * zeta + nu
    return (c_psi_com(nu, zeta, mode) - c_psi_int(nu, zeta, c_factor)
            - c_psi_ext(nu, nu_prime))


# ---------------------------------------------------------------------------
# Python-visible wrappers
# ---------------------------------------------------------------------------

def log_erf(double x):
    """log(erf(x)) for x > 0 without loss near x = 0 or x large."""
    return c_log_erf(x)


def entropy(double p):
    return c_entropy(p)


def mills_deficit(double s):
    return c_mills_deficit(s)


def mills_deficit_deriv(double s):
    return c_mills_deficit_deriv(s)


def cgf(double s):
    return c_cgf(s)


def cgf_prime(double s):
    return c_cgf_prime(s)


def cgf_second(double s):
    return c_cgf_second(s)


def rate_dual(double y):
    cdef double s, v
    if c_rate_dual(y, &s, &v) != 0:
        raise ValueError("rate function argument too close to 0")
    return s, v


def xi_min(double gamma):
    cdef double y, xi, s
    c_xi_min(gamma, &y, &xi, &s)
    return y, xi, s


def x_nu_lhs(double x):
    return SQRT_PI * x * erf(x) * exp(x * x)


def solve_x_nu(double nu, double nu_prime):
    return c_solve_x_nu(nu, nu_prime)


def psi_ext(double nu, double nu_prime):
    return c_psi_ext(nu, nu_prime)


def psi_int(double nu, double zeta, double c_factor):
    return c_psi_int(nu, zeta, c_factor)


def psi_com(double nu, double zeta, int mode):
    return c_psi_com(nu, zeta, mode)


def psi_net(double nu, double rho, double delta, double c_factor, int mode):
    return c_psi_net(nu, rho, delta, c_factor, mode)


def psi_net_grid(nus, double rho, double delta, double c_factor, int mode):
    cdef double[::1] v = np.ascontiguousarray(nus, dtype=np.float64)
    cdef Py_ssize_t i, n = v.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = c_psi_net(v[i], rho, delta, c_factor, mode)
    return out


cdef void c_golden_max(double a, double b, double rho, double delta, double c_factor,
                       int mode, double tol, double *x_out, double *f_out) nogil:
    cdef double x1 = b - INV_PHI * (b - a)
    cdef double x2 = a + INV_PHI * (b - a)
    cdef double f1 = c_psi_net(x1, rho, delta, c_factor, mode)
    cdef double f2 = c_psi_net(x2, rho, delta, c_factor, mode)
    while b - a > tol:
        if f1 >= f2:
            b = x2
            x2 = x1
            f2 = f1
            x1 = b - INV_PHI * (b - a)
            f1 = c_psi_net(x1, rho, delta, c_factor, mode)
        else:
            a = x1
            x1 = x2
            f1 = f2
            x2 = a + INV_PHI * (b - a)
            f2 = c_psi_net(x2, rho, delta, c_factor, mode)
    if f1 >= f2:
        x_out[0] = x1
        f_out[0] = f1
    else:
        x_out[0] = x2
        f_out[0] = f2


def max_psi_net(double rho, double delta, double c_factor, int mode, double nu_hi,
                int grid_size, int n_refine, double tol):
    """Grid search of psi_net over [delta, nu_hi] with golden-section polish.

    Returns (nu_star, value).
    """
    nus = np.linspace(delta, nu_hi, grid_size)
    vals = psi_net_grid(nus, rho, delta, c_factor, mode)
    order = np.argsort(-vals, kind="stable")
    cdef double[::1] g = nus
    cdef Py_ssize_t best_i = order[0]
    cdef double best_nu = g[best_i]
    cdef double best_val = vals[best_i]
    cdef double a, b, nu_r, val_r
    cdef Py_ssize_t i
    cdef int r
    for r in range(min(n_refine, grid_size)):
        i = order[r]
        a = g[i - 1] if i > 0 else g[0]
        b = g[i + 1] if i < grid_size - 1 else g[grid_size - 1]
        c_golden_max(a, b, rho, delta, c_factor, mode, tol, &nu_r, &val_r)
        if val_r > best_val:
            best_nu = nu_r
            best_val = val_r
    return best_nu, best_val


# ---------------------------------------------------------------------------
# dense simplex (Bland's rule)
# ---------------------------------------------------------------------------

cdef void c_pivot(double[:, ::1] T, Py_ssize_t pi, Py_ssize_t pj) nogil:
    cdef Py_ssize_t rows = T.shape[0], cols = T.shape[1], r, c
    cdef double piv = T[pi, pj], f
    for c in range(cols):
        T[pi, c] /= piv
    for r in range(rows):
        if r == pi:
            continue
        f = T[r, pj]
        if f != 0.0:
            for c in range(cols):
                T[r, c] -= f * T[pi, c]
        T[r, pj] = 0.0
    T[pi, pj] = 1.0
    for r in range(rows - 1):
        if fabs(T[r, cols - 1]) < 1e-11:
            T[r, cols - 1] = 0.0


def pivot(T, Py_ssize_t i, Py_ssize_t j):
    c_pivot(T, i, j)


def simplex_iterate(double[:, ::1] T, cnp.int64_t[::1] basis, Py_ssize_t n_allowed,
                    double tol, long max_iter):
    """Run primal simplex pivots on tableau T until optimal/unbounded/cap.

    Returns (status, iterations, column); column is the unbounded entering
    column or -1.
    """
    cdef Py_ssize_t m = T.shape[0] - 1, last = T.shape[1] - 1
    cdef Py_ssize_t i, j, r, best
    cdef long it = 0
    cdef double ratio, rmin, thresh
    cdef cnp.int64_t best_b
    while True:
        j = -1
        for r in range(n_allowed):
            if T[m, r] < -tol:
                j = r
                break
        if j < 0:
            return STATUS_OPTIMAL, it, -1
        if it >= max_iter:
            return STATUS_ITERATION_CAP, it, -1
        rmin = 0.0
        best = -1
        for r in range(m):
            if T[r, j] > tol:
                ratio = T[r, last] / T[r, j]
                if best < 0 or ratio < rmin:
                    rmin = ratio
                    best = r
        if best < 0:
            return STATUS_UNBOUNDED, it, j
        thresh = rmin + 1e-12 * max(1.0, fabs(rmin))
        best = -1
        best_b = 0
        for r in range(m):
            if T[r, j] > tol:
                ratio = T[r, last] / T[r, j]
                if ratio <= thresh and (best < 0 or basis[r] < best_b):
                    best = r
                    best_b = basis[r]
        c_pivot(T, best, j)
        basis[best] = j
        it += 1


# ---------------------------------------------------------------------------
# cyclic Jacobi
# ---------------------------------------------------------------------------

def jacobi_eigh(S, double tol, int max_sweeps):
    """Eigenvalues/vectors of symmetric S by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors as columns, sweeps).
    """
    Aarr = np.array(S, dtype=np.float64, order="C", copy=True)
    Varr = np.eye(Aarr.shape[0])
    cdef double[:, ::1] A = Aarr
    cdef double[:, ::1] V = Varr
    cdef Py_ssize_t n = A.shape[0], p, q, k
    cdef double scale = 0.0, off, apq, tau, t, c, s, ap, aq
    cdef int sweeps = 0, sw
    for p in range(n):
        for q in range(n):
            scale += A[p, q] * A[p, q]
    scale = sqrt(scale)
    with nogil:
        for sw in range(1, max_sweeps + 1):
            sweeps = sw
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += A[p, q] * A[p, q]
            off = sqrt(off * 2.0)
            if off <= tol * scale:
                sweeps = sw - 1
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if fabs(apq) <= 1e-18 * (fabs(A[p, p]) + fabs(A[q, q])) + 1e-300:
                        A[p, q] = 0.0
                        A[q, p] = 0.0
                        continue
                    tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                    if fabs(tau) > 1e150:
                        t = 0.5 / tau
                    elif tau >= 0.0:
                        t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    for k in range(n):
                        ap = A[k, p]
                        aq = A[k, q]
                        A[k, p] = c * ap - s * aq
                        A[k, q] = s * ap + c * aq
                    for k in range(n):
                        ap = A[p, k]
                        aq = A[q, k]
                        A[p, k] = c * ap - s * aq
                        A[q, k] = s * ap + c * aq
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    for k in range(n):
                        ap = V[k, p]
                        aq = V[k, q]
                        V[k, p] = c * ap - s * aq
                        V[k, q] = s * ap + c * aq
    return np.diag(Aarr).copy(), Varr, sweeps
