"""Small argument checks used across the package."""
from __future__ import annotations

import math
import numbers

import numpy as np

from .errors import DomainError, ParameterError


def check_degree(n, name: str = "n", minimum: int = 0) -> int:
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        raise ParameterError(f"{name} must be an integer, got {n!r}")
    n = int(n)
    if n < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {n}")
    return n


def check_real(value, name: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(v):
        raise ParameterError(f"{name} must be finite, got {value!r}")
    return v


def check_positive(value, name: str) -> float:
    v = check_real(value, name)
    if v <= 0:
        raise ParameterError(f"{name} must be positive, got {v}")
    return v


def check_open_interval(value, lo: float, hi: float, name: str) -> float:
    v = check_real(value, name)
    if not lo < v < hi:
        raise DomainError(f"{name}={v} must lie strictly inside ({lo}, {hi})")
    return v


def check_closed_interval(value, lo: float, hi: float, name: str) -> float:
    v = check_real(value, name)
    if not lo <= v <= hi:
        raise DomainError(f"{name}={v} must lie in [{lo}, {hi}]")
    return v


def as_float_array(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} must be finite")
    return arr
