"""Mittag-Leffler propagators, weak Lorentz bounds and decay of fractional evolution equations."""

from fracdecay.errors import (
    AccuracyError,
    DomainError,
    FracDecayError,
    InvariantError,
    UnboundedSupremumError,
)
from fracdecay.ml_special import MLParams, SectorSpec, ml

__all__ = [
    "AccuracyError",
    "DomainError",
    "FracDecayError",
    "InvariantError",
    "MLParams",
    "SectorSpec",
    "UnboundedSupremumError",
    "ml",
]
