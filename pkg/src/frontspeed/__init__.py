"""Finite-size speed corrections for branching-selection particle fronts."""

__version__ = "0.1.0"

from .errors import ConfigError, InsufficientDataError, NumericError
from .noise import LogMgf, NoiseDistribution, parse_spec
from .rng import RngKey, uniform_at

__all__ = [
    "ConfigError",
    "InsufficientDataError",
    "LogMgf",
    "NoiseDistribution",
    "NumericError",
    "RngKey",
    "parse_spec",
    "uniform_at",
    "__version__",
]
