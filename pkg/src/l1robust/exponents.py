"""Growth and decay exponents of the face-sum terms as functions of nu = l/n.

``psi_com`` is the growth rate of the face counts, ``psi_int`` and
``psi_ext`` are the decay rates of the internal and external angles, and
``psi_net`` is the mode-dependent combination whose sign decides whether
the union bound vanishes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import partial

import numpy as np

from ._backend import kernels
from ._parallel import parallel_map
from .errors import ParameterError
from .specfun import HALF_NORMAL_MEAN

NU_TOP = 1.0 - 1.0e-6
LOG2 = math.log(2.0)


class Mode(str, Enum):
    """Robustness notion: one signal, one support, or every support."""

    WEAK = "weak"
    SECTIONAL = "sectional"
    STRONG = "strong"

    @property
    def code(self):
        return {"weak": 0, "sectional": 1, "strong": 2}[self.value]

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(
                f"mode must be one of weak, sectional, strong; got {value!r}"
            ) from None


@dataclass(frozen=True)
class NetExponentParams:
    rho: float
    delta: float
    c_factor: float
    mode: Mode = Mode.STRONG

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        for name in ("rho", "delta", "c_factor"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if not (0.0 < self.delta < 1.0):
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not (0.0 < self.rho < 1.0):
            raise ParameterError(f"rho must lie in (0, 1), got {self.rho!r}")
        if self.c_factor < 1.0:
            raise ParameterError(f"C must be >= 1, got {self.c_factor!r}")

    @property
    def zeta(self):
        return self.rho * self.delta


@dataclass(frozen=True)
class ExponentBreakdown:
    """Exponents at one nu.  ``psi_com`` is the combinatorial term of the mode,
    so ``psi_net == psi_com - psi_int - psi_ext`` for every mode."""

    nu: float
    nu_prime: float
    gamma_prime: float
    x_nu: float
    y_gamma: float
    psi_com: float
    psi_int: float
    psi_ext: float
    psi_net: float


def nu_prime(nu, params):
    return (params.c_factor ** 2 - 1.0) * params.zeta + nu


def gamma_prime(nu, params):
    c2 = params.c_factor ** 2
    z = params.zeta
    return z / ((c2 - 1.0) / c2 * z + nu / c2)


def solve_x_nu(nu, nu_prime):
    """Root x of 2 x G(x) / g(x) = (1 - nu) / nu_prime, with G = erf."""
    nu = float(nu)
    nu_prime = float(nu_prime)
    if nu == 1.0:
        return 0.0
    if not (0.0 < nu < 1.0):
        raise ParameterError(f"nu must lie in (0, 1], got {nu!r}")
    if not nu_prime > 0.0:
        raise ParameterError(f"nu_prime must be positive, got {nu_prime!r}")
    return kernels.solve_x_nu(nu, nu_prime)


def _check_nu(nu, lower, what):
    nu = float(nu)
    if not (lower <= nu <= 1.0):
        raise ParameterError(f"nu must lie in [{what}, 1] = [{lower!r}, 1], got {nu!r}")
    return nu


def psi_ext(nu, params):
    """nu' x^2 - (1 - nu) log G(x) at the saddle x = x_nu; zero at nu = 1."""
    nu = _check_nu(nu, params.delta, "delta")
    return kernels.psi_ext(nu, nu_prime(nu, params))


def laplace_curvature(nu, params):
    """Second derivative of nu' y^2 - (1 - nu) log G(y) at its minimiser."""
    nu = _check_nu(nu, params.delta, "delta")
    if nu >= 1.0:
        raise ParameterError("curvature is undefined at nu = 1")
    npr = nu_prime(nu, params)
    x = kernels.solve_x_nu(nu, npr)
    return 2.0 * npr + 4.0 * x * x * npr + 4.0 * x * x * npr * npr / (1.0 - nu)


def minimize_xi(gamma_prime):
    """Minimise (1-g)/g * y^2/2 + Lambda*(y) over y; returns (y_min, xi_min).

    At the minimiser the dual variable s satisfies 1 - M(s) = g, a monotone
    scalar root that is solved directly.
    """
    g = float(gamma_prime)
    if not (0.0 < g <= 1.0):
        raise ParameterError(f"gamma_prime must lie in (0, 1], got {g!r}")
    if g == 1.0:
        return HALF_NORMAL_MEAN, 0.0
    y, xi, _ = kernels.xi_min(g)
    return y, xi


def minimize_xi_dual(gamma_prime):
    """Like ``minimize_xi`` but also returns the dual point s."""
    g = float(gamma_prime)
    if not (0.0 < g <= 1.0):
        raise ParameterError(f"gamma_prime must lie in (0, 1], got {g!r}")
    return kernels.xi_min(g)


def psi_int(nu, params):
    """(xi_min(gamma') + log 2) (nu - zeta)."""
    nu = _check_nu(nu, params.zeta, "zeta")
    return kernels.psi_int(nu, params.zeta, params.c_factor)


def psi_com(nu, params):
    """Full face-count exponent nu log 2 + H(zeta) + (1 - zeta) H((nu - zeta)/(1 - zeta))."""
    nu = _check_nu(nu, params.zeta, "zeta")
    return kernels.psi_com(nu, params.zeta, Mode.STRONG.code)


def psi_com_mode(nu, params):
    """Combinatorial term used by ``psi_net`` for ``params.mode``."""
    nu = _check_nu(nu, params.zeta, "zeta")
    return kernels.psi_com(nu, params.zeta, params.mode.code)


def psi_net(nu, params):
    nu = _check_nu(nu, params.delta, "delta")
    return kernels.psi_net(nu, params.rho, params.delta, params.c_factor, params.mode.code)


def breakdown(nu, params):
    """All exponent pieces at a single nu."""
    nu = _check_nu(nu, params.delta, "delta")
    npr = nu_prime(nu, params)
    gp = gamma_prime(nu, params)
    x = kernels.solve_x_nu(nu, npr) if nu < 1.0 else 0.0
    y = kernels.xi_min(gp)[0] if gp < 1.0 else HALF_NORMAL_MEAN
    com = kernels.psi_com(nu, params.zeta, params.mode.code)
    pint = kernels.psi_int(nu, params.zeta, params.c_factor)
    pext = kernels.psi_ext(nu, npr)
    return ExponentBreakdown(
        nu=nu, nu_prime=npr, gamma_prime=gp, x_nu=x, y_gamma=y,
        psi_com=com, psi_int=pint, psi_ext=pext, psi_net=com - pint - pext,
    )


def exponent_breakdown_series(params, nu_grid_size, jobs=None):
    """Breakdowns on an even nu grid over [delta, 1 - 1e-6]."""
    nu_grid_size = int(nu_grid_size)
    if nu_grid_size < 2:
        raise ParameterError("nu_grid_size must be >= 2")
    nus = np.linspace(params.delta, NU_TOP, nu_grid_size)
    return parallel_map(partial(breakdown, params=params), [float(v) for v in nus], jobs)
