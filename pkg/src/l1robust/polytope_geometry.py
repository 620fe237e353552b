"""Angles of the skewed cross-polytope SP = {y : ||y_K||_1 + ||y_Kbar||_1 / C <= 1}.

Provides the external angle gamma(G, SP) by one-dimensional quadrature,
the internal angle beta(F, G) from its half-normal probabilistic form, the
internal angle at G = SP, the complementary Grassmann angle assembled from
the face sum, and a Monte-Carlo subspace estimator of the same quantity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import partial

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln, ndtr, ndtri

from . import _rng
from ._backend import kernels
from ._parallel import parallel_map
from .errors import NumericalError, ParameterError
from .lp_core import LpStatus, _subspace_pattern_lp, solve_lp

MC_SAMPLES = 1_000_000
CHUNK = 50_000
TIE_EPS = 1.0e-9


class AngleMethod(str, Enum):
    QUADRATURE = "quadrature"
    MC_DENSITY = "mc_density"
    MC_SUBSPACE = "mc_subspace"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class FaceSpec:
    """A nested face pair F in G of SP.

    F is spanned by the k vertices on the support and G by l vertices, so
    dim F = k - 1 and dim G = l - 1.  ``l = n + 1`` stands for G = SP.
    """

    n: int
    k: int
    l: int
    c_factor: float = 1.0

    def __post_init__(self):
        for name in ("n", "k", "l"):
            v = getattr(self, name)
            if int(v) != v:
                raise ParameterError(f"{name} must be an integer")
            object.__setattr__(self, name, int(v))
        c = float(self.c_factor)
        if not (math.isfinite(c) and c >= 1.0):
            raise ParameterError(f"C must be a finite number >= 1, got {c!r}")
        object.__setattr__(self, "c_factor", c)
        if self.k < 1:
            raise ParameterError("k must be >= 1 (a face needs at least one vertex)")
        if not (self.k <= self.l <= self.n + 1):
            raise ParameterError(f"need 1 <= k <= l <= n + 1, got k={self.k}, l={self.l}, n={self.n}")

    @property
    def alpha_prime(self):
        return 1.0 / (1.0 + self.c_factor ** 2 * self.k)

    @property
    def theta(self):
        return self.c_factor ** 2 * self.k

    @property
    def m_prime(self):
        return self.l - self.k

    @property
    def is_full(self):
        return self.l == self.n + 1


@dataclass(frozen=True)
class AngleEstimate:
    value: float
    stderr: float
    method: AngleMethod
    samples_or_nodes: int
    log_value: float = math.nan

    def as_dict(self):
        d = dict(self.__dict__)
        d["method"] = self.method.value
        return d


def _closed(value, nodes=0):
    return AngleEstimate(value, 0.0, AngleMethod.CLOSED_FORM, nodes,
                         math.log(value) if value > 0 else -math.inf)


# ---------------------------------------------------------------------------
# external angle
# ---------------------------------------------------------------------------

def external_angle(spec):
    """gamma(G, SP) = pi^{-1/2} int_0^inf exp(-x^2) erf(x/a)^{n-l} dx,
    a = sqrt(C^2 k + l - k).  Evaluated around the peak of the log-integrand."""
    if spec.is_full:
        return _closed(1.0)
    p = spec.n - spec.l
    if p == 0:
        return _closed(0.5)
    a = math.sqrt(spec.c_factor ** 2 * spec.k + spec.l - spec.k)

    def phi(x):
        return -x * x + p * kernels.log_erf(x / a) if x > 0 else -math.inf

    def dphi(x):
        u = x / a
        return -2.0 * x + p * (2.0 / math.sqrt(math.pi)) * math.exp(-u * u - kernels.log_erf(u)) / a

    hi = 1.0
    while dphi(hi) > 0.0:
        hi *= 2.0
    x_star = optimize.brentq(dphi, 1e-300, hi, xtol=1e-14, rtol=1e-14)
    f_star = phi(x_star)

    def integrand(x):
        return math.exp(phi(x) - f_star) if x > 0 else 0.0

    # beyond x_star + 40 the shifted integrand is below exp(-1600)
    left, e1 = integrate.quad(integrand, 0.0, x_star, epsabs=0.0, epsrel=1e-11, limit=200)
    right, e2 = integrate.quad(integrand, x_star, x_star + 40.0, epsabs=0.0, epsrel=1e-11, limit=200)
    total = left + right
    if not total > 0.0:
        raise NumericalError("external-angle quadrature returned a non-positive value")
    log_value = f_star + math.log(total) - 0.5 * math.log(math.pi)
    return AngleEstimate(math.exp(log_value), 0.0, AngleMethod.QUADRATURE, 2, log_value)


# ---------------------------------------------------------------------------
# internal angle
# ---------------------------------------------------------------------------

def _tilt(m_prime, sigma):
    """t < 0 solving t = -2 m' sigma Lambda'(sigma t)."""
    def f(t):
        return t + 2.0 * m_prime * sigma * kernels.cgf_prime(sigma * t)
    lo = -1.0
    while f(lo) > 0.0:
        lo *= 2.0
    return optimize.brentq(f, lo, 0.0, xtol=1e-13, rtol=1e-13)


def _tilted_half_normal(rng, mu, size):
    # |Z| tilted by exp(mu |Z|) is N(mu, 1) truncated to [0, inf)
    u = 1.0 - rng.random(size)
    return mu - ndtri(u * ndtr(mu))


def _log_mean_exp(logw):
    mx = float(np.max(logw))
    w = np.exp(logw - mx)
    return mx, w


def internal_angle(spec, samples=MC_SAMPLES, seed=0, force_mc=False):
    """beta(F, G) = sqrt((a'(m'-1)+1)/(1-a')) 2^{-m'} E[exp(-W^2)],
    W a sum of m' half-normals of scale 1/sqrt(2 theta).

    Closed forms are used for m' <= 2 unless ``force_mc``.  The Monte-Carlo
    path samples each half-normal under an exponential tilt centred on the
    dominant region of exp(-W^2), which keeps the relative error bounded
    for large m'.
    """
    if spec.is_full:
        return internal_angle_full(spec.n, spec.k, spec.c_factor, samples, seed)
    mp = spec.m_prime
    a = spec.alpha_prime
    if mp == 0:
        return _closed(1.0)
    if not force_mc:
        if mp == 1:
            return _closed(0.5)
        if mp == 2:
            return _closed(math.acos(a) / (2.0 * math.pi))
    samples = int(samples)
    if samples < 2:
        raise ParameterError("samples must be >= 2")
    sigma = 1.0 / math.sqrt(2.0 * spec.theta)
    t = _tilt(mp, sigma)
    mu = sigma * t
    log_norm = mp * kernels.cgf(mu)
    rng = _rng.stream(seed, 1, spec.n, spec.k, spec.l)
    logs = np.empty(samples)
    done = 0
    while done < samples:
        size = min(CHUNK, samples - done)
        z = _tilted_half_normal(rng, mu, (size, mp))
        w = sigma * z.sum(axis=1)
        logs[done:done + size] = -w * w - t * w + log_norm
        done += size
    mx, w = _log_mean_exp(logs)
    mean = float(w.mean())
    sd = float(w.std(ddof=1)) / math.sqrt(samples)
    log_pref = 0.5 * math.log((a * (mp - 1) + 1.0) / (1.0 - a)) - mp * math.log(2.0)
    log_value = log_pref + mx + math.log(mean)
    value = math.exp(log_value)
    return AngleEstimate(value, value * sd / mean, AngleMethod.MC_DENSITY, samples, log_value)


def internal_angle_full(n, k, c_factor, samples=MC_SAMPLES, seed=0):
    """beta(F, SP) = P(sum of n-k HN(0, 1/2) <= C k X1), X1 ~ N(0, 1/(2k)).

    Conditioning on the half-normal sum gives the inner probability in
    closed form, so only the sum is simulated.
    """
    n, k = int(n), int(k)
    c = float(c_factor)
    if not (1 <= k < n):
        raise ParameterError(f"need 1 <= k < n, got k={k}, n={n}")
    if not (math.isfinite(c) and c >= 1.0):
        raise ParameterError("C must be a finite number >= 1")
    samples = int(samples)
    if samples < 2:
        raise ParameterError("samples must be >= 2")
    rng = _rng.stream(seed, 2, n, k)
    p = np.empty(samples)
    scale = math.sqrt(2.0 * k) / (c * k)
    done = 0
    while done < samples:
        size = min(CHUNK, samples - done)
        u = np.abs(rng.standard_normal((size, n - k))) * math.sqrt(0.5)
        p[done:done + size] = ndtr(-u.sum(axis=1) * scale)
        done += size
    value = float(p.mean())
    sd = float(p.std(ddof=1)) / math.sqrt(samples)
    return AngleEstimate(value, sd, AngleMethod.MC_DENSITY, samples,
                         math.log(value) if value > 0 else -math.inf)


# ---------------------------------------------------------------------------
# complementary Grassmann angle
# ---------------------------------------------------------------------------

def _log_face_count(n, k, l):
    return (gammaln(n - k + 1) - gammaln(l - k + 1) - gammaln(n - l + 1)
            + (l - k) * math.log(2.0))


def face_sum_terms(n, m, k, c_factor, samples=MC_SAMPLES, seed=0):
    """Per-dimension terms of the face sum as (l, count, beta, gamma, term, stderr)."""
    n, m, k = int(n), int(m), int(k)
    if not (1 <= k <= m < n):
        raise ParameterError(f"need 1 <= k <= m < n, got n={n}, m={m}, k={k}")
    rows = []
    l = m + 2
    while l <= n + 1:
        spec = FaceSpec(n, k, l, c_factor)
        if spec.is_full:
            beta = internal_angle_full(n, k, c_factor, samples, seed)
            count = 1.0
            gamma = 1.0
        else:
            beta = internal_angle(spec, samples, seed)
            count = math.exp(_log_face_count(n, k, l))
            gamma = external_angle(spec).value
        term = 2.0 * count * beta.value * gamma
        se = 2.0 * count * beta.stderr * gamma
        rows.append((l, count, beta.value, gamma, term, se))
        l += 2
    return rows


def complementary_grassmann_angle(n, m, k, c_factor, samples=MC_SAMPLES, seed=0):
    """2 sum_s sum_{G, dim G = m+1+2s} beta(F, G) gamma(G, SP), including
    G = SP itself when the parity reaches it."""
    rows = face_sum_terms(n, m, k, c_factor, samples, seed)
    value = sum(r[4] for r in rows)
    se = math.sqrt(sum(r[5] ** 2 for r in rows))
    method = AngleMethod.MC_DENSITY if se > 0 else AngleMethod.CLOSED_FORM
    return AngleEstimate(value, se, method, int(samples) if se > 0 else 0,
                         math.log(value) if value > 0 else -math.inf)


def _subspace_trial(trial, n, m, k, c_factor, seed, union):
    """1 if the random (n-m)-subspace meets the cone at the face, 0 if not,
    -1 if an LP failed."""
    rng = _rng.stream(seed, 3, trial)
    Z = rng.standard_normal((n, n - m))
    support = np.arange(k)
    patterns = [np.ones(k)]
    if union and k > 1:
        patterns = [np.array((1.0,) + s) for s in _sign_tails(k - 1)]
    for s in patterns:
        sol = solve_lp(_subspace_pattern_lp(Z, support, s))
        if sol.status is LpStatus.UNBOUNDED:
            return 1
        if sol.status is not LpStatus.OPTIMAL:
            return -1
        if -sol.objective_value > 1.0 / c_factor + TIE_EPS:
            return 1
    return 0


def _sign_tails(r):
    out = [()]
    for _ in range(r):
        out = [t + (1.0,) for t in out] + [t + (-1.0,) for t in out]
    return out


def grassmann_angle_monte_carlo(n, m, k, c_factor, trials, seed, union=False, jobs=None):
    """Fraction of Gaussian (n-m)-subspaces meeting the cone of SP at a face.

    A hit is a w in the subspace with C * s.w_K > ||w_Kbar||_1 for the face's
    sign pattern s (all +1 by symmetry).  ``union=True`` instead tests every
    sign pattern, which is the event that the subspace meets the cone at
    some face on the support.
    """
    n, m, k, trials = int(n), int(m), int(k), int(trials)
    c = float(c_factor)
    if trials < 100:
        raise ParameterError("trials must be >= 100")
    if not (0 <= k <= m < n):
        raise ParameterError(f"need 0 <= k <= m < n, got n={n}, m={m}, k={k}")
    if not (math.isfinite(c) and c >= 1.0):
        raise ParameterError("C must be a finite number >= 1")
    if k == 0:
        return AngleEstimate(0.0, 0.0, AngleMethod.MC_SUBSPACE, trials, -math.inf)
    fn = partial(_subspace_trial, n=n, m=m, k=k, c_factor=c, seed=int(seed), union=union)
    outcomes = np.asarray(parallel_map(fn, range(trials), jobs))
    failures = int(np.sum(outcomes < 0))
    if failures > 0.001 * trials:
        raise NumericalError(f"{failures} of {trials} subspace LPs failed")
    valid = outcomes[outcomes >= 0]
    p = float(valid.mean())
    se = math.sqrt(max(p * (1.0 - p), 0.0) / valid.size)
    return AngleEstimate(p, se, AngleMethod.MC_SUBSPACE, int(valid.size),
                         math.log(p) if p > 0 else -math.inf)


def external_angle_monte_carlo(spec, samples=MC_SAMPLES, seed=0):
    """Gaussian measure of the outward normal cone of SP at G, by sampling.

    The cone is {t (s_K, s_J / C, v) : t >= 0, |v_j| <= 1/C}, where J holds
    the l - k off-support vertices of G.  In its own (n - l + 1)-dimensional
    span a Gaussian point is (g0 along the spine, g off G), and membership
    is g0 > 0 with every |g_j| <= g0 / a, a = sqrt(C^2 k + l - k).
    """
    if spec.is_full:
        return _closed(1.0)
    samples = int(samples)
    if samples < 2:
        raise ParameterError("samples must be >= 2")
    a = math.sqrt(spec.c_factor ** 2 * spec.k + spec.l - spec.k)
    p_dim = spec.n - spec.l
    rng = _rng.stream(seed, 4, spec.n, spec.k, spec.l)
    hits = 0
    done = 0
    while done < samples:
        size = min(CHUNK, samples - done)
        g0 = rng.standard_normal(size)
        g = rng.standard_normal((size, p_dim))
        inside = (g0 > 0) & np.all(np.abs(g) * a <= g0[:, None], axis=1)
        hits += int(np.count_nonzero(inside))
        done += size
    p = hits / samples
    se = math.sqrt(p * (1.0 - p) / samples)
    return AngleEstimate(p, se, AngleMethod.MC_SUBSPACE, samples,
                         math.log(p) if p > 0 else -math.inf)
