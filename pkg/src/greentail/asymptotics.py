"""Large-degree asymptotic formulas, log-gamma, and summand envelopes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._special import log_gamma
from ._validation import as_float_array, check_degree, check_real
from .errors import DomainError, ParameterError
from .orthopoly import FamilyKind, eval, eval_normalized, family_constants, normalized_seed

__all__ = [
    "log_gamma",
    "hermite_leading",
    "fejer_laguerre",
    "darboux_jacobi",
    "Envelope",
    "envelope_bound",
    "asymptotic_error",
]


def _cos_minus_quarter_turns(phase, n: int):
    """cos(phase - n pi/2) with the quarter-turn part applied exactly."""
    r = n % 4
    c, s = np.cos(phase), np.sin(phase)
    return (c, s, -c, -s)[r]


def hermite_leading(n: int, x):
    """Leading large-n term of H_n(x) divided by sqrt(M_n).

    The raw term is exp(x^2/2) 2^n Gamma((n+1)/2) cos(x sqrt(2n) - n pi/2) / sqrt(pi).
    """
    n = check_degree(n, minimum=1)
    x = as_float_array(x)
    log_amp = (0.5 * x * x + n * math.log(2.0) - 0.5 * math.log(math.pi)
               + log_gamma((n + 1) / 2.0) - 0.5 * family_constants(FamilyKind.hermite(), n).log_norm.log_magnitude)
    out = np.exp(log_amp) * _cos_minus_quarter_turns(x * math.sqrt(2.0 * n), n)
    return float(out) if out.ndim == 0 else out


def fejer_laguerre(alpha: float, n: int, x):
    """Fejer's large-n approximation to L_n^(alpha)(x) for x > 0."""
    alpha = check_real(alpha, "alpha")
    if alpha <= -1:
        raise DomainError("alpha must exceed -1")
    n = check_degree(n, minimum=1)
    x = as_float_array(x)
    if np.any(x <= 0):
        raise DomainError("x must be positive")
    amp = np.exp(x / 2.0) * n ** (alpha / 2.0 - 0.25) / math.sqrt(math.pi) * x ** (-alpha / 2.0 - 0.25)
    out = amp * np.cos(2.0 * np.sqrt(n * x) - alpha * math.pi / 2.0 - math.pi / 4.0)
    return float(out) if out.ndim == 0 else out


def _darboux_amplitude(alpha: float, beta: float, theta):
    return (np.sin(theta / 2.0) ** (-alpha - 0.5) * np.cos(theta / 2.0) ** (-beta - 0.5)
            / math.sqrt(math.pi))


def darboux_jacobi(alpha: float, beta: float, n: int, theta):
    """Darboux's large-n approximation to P_n^(alpha,beta)(cos theta), theta in (0, pi)."""
    alpha = check_real(alpha, "alpha")
    beta = check_real(beta, "beta")
    n = check_degree(n, minimum=1)
    theta = as_float_array(theta, "theta")
    if np.any((theta <= 0) | (theta >= math.pi)):
        raise DomainError("theta must lie in (0, pi)")
    k = _darboux_amplitude(alpha, beta, theta)
    phase = (n + (alpha + beta + 1.0) / 2.0) * theta - (alpha + 0.5) * math.pi / 2.0
    out = k * np.cos(phase) / math.sqrt(n)
    return float(out) if out.ndim == 0 else out


def asymptotic_error(formula: str, n: int, points, alpha: float = 0.0, beta: float = 0.0) -> float:
    """Largest amplitude-scaled error of an asymptotic formula over ``points``.

    ``formula`` is "hermite" (points are x, normalized scale), "fejer"
    (points are x > 0, raw scale) or "darboux" (points are theta, raw
    scale).  The error is |exact - approx| divided by the non-oscillating
    amplitude of the formula, so zeros of the cosine do not inflate it.
    """
    pts = np.atleast_1d(as_float_array(points))
    if formula == "hermite":
        approx = hermite_leading(n, pts)
        exact = eval_normalized(FamilyKind.hermite(), n, pts)
        log_amp = (0.5 * pts * pts + n * math.log(2.0) - 0.5 * math.log(math.pi)
                   + log_gamma((n + 1) / 2.0)
                   - 0.5 * family_constants(FamilyKind.hermite(), n).log_norm.log_magnitude)
        amp = np.exp(log_amp)
    elif formula == "fejer":
        approx = fejer_laguerre(alpha, n, pts)
        exact = eval(FamilyKind.laguerre(alpha), n, pts)
        amp = np.exp(pts / 2.0) * n ** (alpha / 2.0 - 0.25) / math.sqrt(math.pi) * pts ** (-alpha / 2.0 - 0.25)
    elif formula == "darboux":
        approx = darboux_jacobi(alpha, beta, n, pts)
        kind = FamilyKind.jacobi(alpha, beta, general_parameters=alpha <= -1 or beta <= -1)
        exact = eval(kind, n, np.cos(pts))
        amp = _darboux_amplitude(alpha, beta, pts) / math.sqrt(n)
    else:
        raise ParameterError(f"unknown formula {formula!r}")
    return float(np.max(np.abs(exact - approx) / amp))


@dataclass(frozen=True)
class Envelope:
    """Measured bound |term_n| <= C n^(-p) for n >= valid_from on ``interval``."""

    C: float
    p: float
    valid_from: int
    interval: tuple[float, float]
    term: str = "diagonal"

    def bound(self, n):
        return self.C * np.asarray(n, dtype=float) ** (-self.p)

    def tail_integral(self, M: float) -> float:
        """Integral of C t^(-p) over (M, infinity), an upper bound for the sum over n > M."""
        return self.C * M ** (1.0 - self.p) / (self.p - 1.0)

    def cutoff_for(self, target: float) -> float:
        """Smallest M with tail_integral(M) <= target."""
        return (self.C / ((self.p - 1.0) * target)) ** (1.0 / (self.p - 1.0))


def diagonal_exponent(kind: FamilyKind) -> float:
    return 1.5 if kind.tau == 0.5 else 2.0


def cd_exponent(kind: FamilyKind) -> float:
    # exponents for the Cauchy-Schwarz majorant of the telescoped summand
    if kind.name == "hermite":
        return 2.0
    if kind.name == "laguerre":
        return 1.5
    return 3.0


def check_compact_interval(kind: FamilyKind, interval) -> tuple[float, float]:
    lo, hi = (check_real(v, "interval endpoint") for v in interval)
    if lo > hi:
        raise ParameterError("interval endpoints must be ordered")
    a, b = kind.interval
    if not (a < lo and hi < b):
        raise DomainError(f"interval [{lo}, {hi}] must lie strictly inside ({a}, {b})")
    return lo, hi


def envelope_bound(kind: FamilyKind, interval, n0: int, term: str = "diagonal",
                   probes: int = 64, safety: float = 1.5) -> Envelope:
    """Envelope C n^(-p) for the tail summands, measured on n0 <= n <= 4 n0.

    ``term="diagonal"`` bounds |Y_n(x) Y_n(y)| / lambda_n in normalized
    scale.  ``term="cd"`` bounds the telescoped summand
    |a_{n+1} D_{n+1}(x,y)| (1/lambda_n - 1/lambda_{n+1}) through the
    Cauchy-Schwarz majorant a_{n+1} max_z (Y_n(z)^2 + Y_{n+1}(z)^2).
    """
    lo, hi = check_compact_interval(kind, interval)
    n0 = check_degree(n0, "n0", minimum=1)
    n0 = max(n0, kind.min_degree + 1)
    grid = np.linspace(lo, hi, probes)
    start, p_prev, p_cur = normalized_seed(kind, grid)
    al, be = kind.kernel_parameters
    if term == "diagonal":
        p = diagonal_exponent(kind)
        peak = K.max_scaled_square(kind.code, al, be, grid, start, p_prev, p_cur, n0, 4 * n0, p)
    elif term == "cd":
        p = cd_exponent(kind)
        peak = K.max_scaled_cd(kind.code, al, be, grid, start, p_prev, p_cur, n0, 4 * n0, p)
    else:
        raise ParameterError("term must be 'diagonal' or 'cd'")
    return Envelope(safety * peak, p, n0, (lo, hi), term)
