"""Scalar special functions for the exponent computations.

Covers the Gaussian and half-normal distribution functions, the binary
entropy in nats, and the cumulant generating function of ``|N(0,1)|``
together with its Legendre-Fenchel dual (the rate function).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import erf, ndtr

from ._backend import kernels
from .errors import NumericalError, ParameterError

HALF_NORMAL_MEAN = math.sqrt(2.0 / math.pi)


def _finite(x, name="x"):
    x = float(x)
    if not math.isfinite(x):
        raise ParameterError(f"{name} must be finite, got {x!r}")
    return x


def gauss_cdf(x):
    """Standard normal CDF. Accurate in the far left tail down to about -37."""
    return float(ndtr(_finite(x)))


def gauss_pdf(x):
    x = _finite(x)
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def half_normal_cdf(x):
    """G(x) = erf(x): the CDF of |N(0, 1/2)|."""
    x = _finite(x)
    if x < 0.0:
        raise ParameterError(f"half_normal_cdf needs x >= 0, got {x!r}")
    return float(erf(x))


def log_half_normal_cdf(x):
    """log G(x) for x > 0, stable for small and large x."""
    x = _finite(x)
    if x <= 0.0:
        raise ParameterError(f"log_half_normal_cdf needs x > 0, got {x!r}")
    return kernels.log_erf(x)


def binary_entropy(p):
    """H(p) in nats, with H(0) = H(1) = 0."""
    p = _finite(p, "p")
    if p < 0.0 or p > 1.0:
        raise ParameterError(f"binary_entropy needs p in [0, 1], got {p!r}")
    return kernels.entropy(p)


def mills_factor(s):
    """M(s) with Phi(s) = M(s) phi(s) / |s| for s < 0."""
    s = _finite(s, "s")
    if s >= 0.0:
        raise ParameterError(f"mills_factor needs s < 0, got {s!r}")
    return 1.0 - kernels.mills_deficit(s)


def cumulant_half_normal(s):
    """Lambda(s) = log E[exp(s|Z|)] = s^2/2 + log(2 Phi(s))."""
    return kernels.cgf(_finite(s, "s"))


def cumulant_half_normal_prime(s):
    return kernels.cgf_prime(_finite(s, "s"))


def cumulant_half_normal_second(s):
    return kernels.cgf_second(_finite(s, "s"))


@dataclass(frozen=True)
class RateFunctionSample:
    """One evaluation of the rate function Lambda*(y) with its dual point."""

    y: float
    s: float
    lambda_star: float
    m_of_s: float


def rate_function(y):
    """Lambda*(y) = max_s (s y - Lambda(s)) for y in (0, sqrt(2/pi))."""
    y = _finite(y, "y")
    if not (0.0 < y < HALF_NORMAL_MEAN):
        raise ParameterError(f"rate_function needs y in (0, sqrt(2/pi)), got {y!r}")
    try:
        s, value = kernels.rate_dual(y)
    except ValueError as exc:
        raise NumericalError(str(exc)) from exc
    m = 1.0 - kernels.mills_deficit(s)
    return RateFunctionSample(y=y, s=s, lambda_star=max(value, 0.0), m_of_s=m)
