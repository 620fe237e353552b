"""Robustness thresholds for l1 minimisation and tools to check them at desk scale."""
from ._backend import BACKEND
from .errors import NumericalError, ParameterError
from .exponents import Mode, NetExponentParams
from .thresholds import ThresholdResult, critical_rho

__all__ = [
    "BACKEND",
    "Mode",
    "NetExponentParams",
    "NumericalError",
    "ParameterError",
    "ThresholdResult",
    "critical_rho",
]
__version__ = "0.1.0"
