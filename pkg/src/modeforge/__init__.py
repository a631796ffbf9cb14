"""Exact construction and analysis of third-order modular ODEs on SL(2,Z)."""

from .algebra import CPoly, Frac, MPoly, QSeries, c, default_order
from .frobenius import APPARENT, COMPLETELY_NOT_APPARENT, NOT_APPARENT, LocalExponents, LogSeries, ThetaOperator
from .modforms import E2, E4, E6, Delta, Delta0, J, basis, factor_form, membership

__version__ = "0.1.0"

__all__ = [
    "APPARENT", "COMPLETELY_NOT_APPARENT", "CPoly", "Delta", "Delta0", "E2", "E4", "E6", "Frac", "J",
    "LocalExponents", "LogSeries", "MPoly", "NOT_APPARENT", "QSeries", "ThetaOperator", "basis", "c",
    "default_order", "factor_form", "membership",
]
