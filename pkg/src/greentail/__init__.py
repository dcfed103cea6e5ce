"""Truncation tails of Green's function eigenfunction expansions.

Modules: ``orthopoly`` (classical families), ``asymptotics`` (large-degree
formulas and envelopes), ``tails`` (tail sums, limits, convergence studies),
``slp`` (regular Sturm-Liouville problems), ``kl`` (Brownian-motion
Karhunen-Loeve fluctuations), ``moments`` (moment recurrences), ``cli``.
"""
__version__ = "0.1.0"

from .errors import ConvergenceError, DegreeOverflowError, DomainError, GreentailError, ParameterError
from .orthopoly import FamilyKind

__all__ = [
    "__version__",
    "FamilyKind",
    "GreentailError",
    "ParameterError",
    "DomainError",
    "ConvergenceError",
    "DegreeOverflowError",
]
