"""Critical sparsity proportions rho_N(delta, C) by bisection on rho.

For each rho the worst-case net exponent over nu in [delta, 1] is found by
a 512-point grid plus golden-section polish.  rho_N is the largest rho at
which that maximum stays negative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from itertools import product

from ._backend import kernels
from ._parallel import parallel_map
from .errors import ParameterError
from .exponents import NU_TOP, Mode

RHO_FLOOR = 1.0e-8
GRID_SIZE = 512
N_REFINE = 3
GOLDEN_TOL = 1.0e-9


@dataclass(frozen=True)
class ThresholdResult:
    delta: float
    c_factor: float
    mode: Mode
    rho_star: float
    zeta: float
    nu_argmax: float
    bisection_tol: float
    iterations: int
    degenerate: bool = False
    capped: bool = False

    def as_dict(self):
        d = dict(self.__dict__)
        d["mode"] = self.mode.value
        return d


def _validate(delta, c_factor):
    delta = float(delta)
    c_factor = float(c_factor)
    if not (math.isfinite(delta) and 0.0 < delta < 1.0):
        raise ParameterError(f"delta must lie in (0, 1), got {delta!r}")
    if not (math.isfinite(c_factor) and c_factor >= 1.0):
        raise ParameterError(f"C must be a finite number >= 1, got {c_factor!r}")
    return delta, c_factor


def rho_cap(c_factor, mode):
    """Upper end of the bisection range.

    The 1/(C+1) ceiling is proven for strong robustness only; the weaker
    notions search the whole unit interval.
    """
    if Mode.parse(mode) is Mode.STRONG:
        return min(1.0 - 1.0e-8, 1.0 / (c_factor + 1.0))
    return 1.0 - 1.0e-8


def max_net_exponent(rho, delta, c_factor, mode=Mode.STRONG, grid_size=GRID_SIZE):
    """(nu_star, max_nu psi_net) over nu in [delta, 1 - 1e-6]."""
    delta, c_factor = _validate(delta, c_factor)
    rho = float(rho)
    if not (0.0 < rho < 1.0):
        raise ParameterError(f"rho must lie in (0, 1), got {rho!r}")
    if int(grid_size) < 3:
        raise ParameterError("grid_size must be >= 3")
    mode = Mode.parse(mode)
    return kernels.max_psi_net(rho, delta, c_factor, mode.code, NU_TOP,
                               int(grid_size), N_REFINE, GOLDEN_TOL)


def critical_rho(delta, c_factor, mode=Mode.STRONG, tol=1.0e-5):
    """Largest rho with max_nu psi_net < 0, located to within ``tol``."""
    delta, c_factor = _validate(delta, c_factor)
    mode = Mode.parse(mode)
    tol = float(tol)
    if not tol > 0.0:
        raise ParameterError("tol must be positive")

    def peak(r):
        return kernels.max_psi_net(r, delta, c_factor, mode.code, NU_TOP,
                                   GRID_SIZE, N_REFINE, GOLDEN_TOL)

    lo = RHO_FLOOR
    hi = rho_cap(c_factor, mode)
    nu_lo, v_lo = peak(lo)
    if v_lo >= 0.0:
        return ThresholdResult(delta, c_factor, mode, 0.0, 0.0, nu_lo, tol, 0,
                               degenerate=True)
    nu_hi, v_hi = peak(hi)
    if v_hi < 0.0:
        return ThresholdResult(delta, c_factor, mode, hi, hi * delta, nu_hi, tol, 0,
                               capped=True)
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        nu_mid, v_mid = peak(mid)
        iterations += 1
        if v_mid < 0.0:
            lo = mid
        else:
            hi = mid
    rho_star = 0.5 * (lo + hi)
    nu_star, _ = peak(rho_star)
    return ThresholdResult(delta, c_factor, mode, rho_star, rho_star * delta, nu_star,
                           tol, iterations)


def _critical_from_tuple(args, tol):
    delta, c_factor, mode = args
    return critical_rho(delta, c_factor, mode, tol)


def threshold_curve(delta, c_grid, mode=Mode.STRONG, tol=1.0e-5, jobs=None):
    """One ThresholdResult per C in ``c_grid`` (ascending)."""
    c_grid = [float(c) for c in c_grid]
    if any(b < a for a, b in zip(c_grid, c_grid[1:])):
        raise ParameterError("c_grid must be sorted ascending")
    mode = Mode.parse(mode)
    items = [(delta, c, mode) for c in c_grid]
    return parallel_map(partial(_critical_from_tuple, tol=tol), items, jobs)


def threshold_vs_delta(c_factor, delta_grid, mode=Mode.STRONG, tol=1.0e-5, jobs=None):
    """One ThresholdResult per delta."""
    mode = Mode.parse(mode)
    items = [(float(d), c_factor, mode) for d in delta_grid]
    return parallel_map(partial(_critical_from_tuple, tol=tol), items, jobs)


def threshold_surface(delta_grid, c_grid, mode=Mode.STRONG, tol=1.0e-5, jobs=None):
    """Results over the product grid, delta-major order."""
    mode = Mode.parse(mode)
    items = [(float(d), float(c), mode) for d, c in product(delta_grid, c_grid)]
    return parallel_map(partial(_critical_from_tuple, tol=tol), items, jobs)
