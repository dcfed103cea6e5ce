"""Limit-moment recurrences and cross-norm integrals of the classical families.

Limit moments are m_k = lim N^tau sum_{n>N} int x^k W^2 Y_n^2 / (M_n lambda_n),
weighted moments are C int x^k W^2 / sqrt(P W); both satisfy

    (k+1) Q(0) m_k + (L(0) + (k+1/2) Q'(0)) m_{k+1} + (L'(0) + (k/2) Q''(0)) m_{k+2} = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import _kernels as K
from ._special import log_gamma
from ._validation import check_degree, check_positive, check_real
from .errors import ConvergenceError, DomainError, ParameterError
from .orthopoly import FamilyKind, LogScaled, family_data, normalized_seed


@dataclass(frozen=True)
class MomentTriple:
    """Coefficients of m_k, m_{k+1}, m_{k+2} in the moment recurrence."""

    k: int
    coeff_k: float
    coeff_k1: float
    coeff_k2: float

    def residual(self, m_k: float, m_k1: float, m_k2: float) -> float:
        return self.coeff_k * m_k + self.coeff_k1 * m_k1 + self.coeff_k2 * m_k2

    def scale(self, m_k: float, m_k1: float, m_k2: float) -> float:
        """Largest coefficient times largest moment, for relative residuals."""
        coeffs = max(abs(self.coeff_k), abs(self.coeff_k1), abs(self.coeff_k2))
        return coeffs * max(abs(m_k), abs(m_k1), abs(m_k2))


def moment_recurrence_coeffs(kind: FamilyKind, k: int) -> MomentTriple:
    """(k+1) Q(0), L(0) + (k+1/2) Q'(0), L'(0) + (k/2) Q''(0)."""
    k = check_degree(k, "k", minimum=0)
    data = family_data(kind)
    q0, q1, q2 = data.Q
    l0, l1 = data.L
    return MomentTriple(k, (k + 1) * q0, l0 + (k + 0.5) * q1, l1 + k * q2)


def weighted_moment_constant(kind: FamilyKind) -> float:
    """Normalizing constant C: 1/(sqrt(2) pi) for Hermite, 1/pi otherwise."""
    return 1.0 / (math.sqrt(2.0) * math.pi) if kind.name == "hermite" else 1.0 / math.pi


def weighted_moment(kind: FamilyKind, k: int, tol: float = 1e-13) -> float:
    """C int_I x^k W^2 / sqrt(P W) dx.

    W^2 / sqrt(P W) is e^{-x^2} (Hermite), x^{alpha-1/2} e^{-x} (Laguerre) and
    (1-x)^{alpha-1/2} (1+x)^{beta-1/2} (Jacobi type).  Algebraic endpoint
    factors go into the quadrature weight, so they are integrated exactly.
    """
    k = check_degree(k, "k", minimum=0)
    tol = check_positive(tol, "tol")
    C = weighted_moment_constant(kind)
    opts = dict(epsabs=0.0, epsrel=tol, limit=400)
    if kind.name == "hermite":
        if k % 2:
            return 0.0
        val = 2.0 * quad(lambda x: x ** k * math.exp(-x * x), 0.0, math.inf, **opts)[0]
        return C * val
    if kind.name == "laguerre":
        power = k + kind.alpha - 0.5
        if power <= -1:
            raise DomainError(f"the moment of order {k} diverges at 0 for alpha={kind.alpha}")
        head = quad(lambda x: math.exp(-x), 0.0, 1.0, weight="alg", wvar=(power, 0.0), **opts)[0]
        rest = quad(lambda x: x ** power * math.exp(-x), 1.0, math.inf, **opts)[0]
        return C * (head + rest)
    if kind.general_parameters:
        raise ParameterError("weighted moments need an orthogonal-mode family")
    al, be = kind.jacobi_parameters
    if al - 0.5 <= -1 or be - 0.5 <= -1:
        raise DomainError("the weighted moment diverges at an endpoint")
    if al == be and k % 2:
        return 0.0
    val = quad(lambda x: x ** k, -1.0, 1.0, weight="alg", wvar=(be - 0.5, al - 0.5), **opts)[0]
    return C * val


def weighted_moment_residual(kind: FamilyKind, k: int, tol: float = 1e-13) -> float:
    """Relative residual of the recurrence on weighted moments k, k+1, k+2."""
    triple = moment_recurrence_coeffs(kind, k)
    m = [weighted_moment(kind, j, tol) for j in (k, k + 1, k + 2)]
    scale = triple.scale(*m)
    return abs(triple.residual(*m)) / scale if scale else 0.0


def _moment_nodes(kind: FamilyKind, k: int, n_max: int, absolute: bool = False):
    """Nodes and weights for int x^k W(x)^2 f(x) dx with f = Y_n^2 / M_n, n <= n_max.

    Hermite: composite Gauss-Legendre on [-8, 8], where the integrand is below
    exp(-60) outside.  Laguerre: x = u^2 on u in [0, 8] so that the
    oscillation is uniform in u.  ``absolute`` weights by |x|^k instead of x^k.
    """
    z, w = np.polynomial.legendre.leggauss(16)
    freq = 2.0 * math.sqrt(max(n_max, 1))
    if kind.name == "hermite":
        lo, hi = -8.0, 8.0
    elif kind.name == "laguerre":
        lo, hi = 0.0, 8.0
    else:
        raise ParameterError("tail moments are estimated for Hermite and Laguerre only")
    panels = int(math.ceil((hi - lo) * freq / math.pi)) + 16
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = (mid[:, None] + half[:, None] * z).ravel()
    wu = (half[:, None] * w).ravel()
    if kind.name == "hermite":
        x = u
        weights = wu * (np.abs(x) if absolute else x) ** k * np.exp(-2.0 * x * x)
    else:
        a = kind.alpha
        x = u * u
        weights = wu * 2.0 * u * x ** k * x ** (2.0 * a) * np.exp(-2.0 * x)
    return x, weights


def tail_moment_terms(kind: FamilyKind, k: int, n_max: int, absolute: bool = False):
    """I_n = int x^k W^2 Y_n^2 / M_n for n = start-1 .. n_max, with the start index."""
    x, weights = _moment_nodes(kind, k, n_max, absolute)
    n0, prev, cur = normalized_seed(kind, x)
    al, be = kind.kernel_parameters
    return n0, K.weighted_square_sums(kind.code, al, be, x, weights, n0, prev, cur, n_max)


def tail_moment_estimate(kind: FamilyKind, k: int, N: int, tol: float = 1e-4,
                         cutoff: int | None = None) -> float:
    """N^tau sum_{n>N} int x^k W^2 Y_n^2 / (M_n lambda_n) dx.

    The summands are computed to index M = cutoff (default 16 N) by
    quadrature inside the recurrence; the remainder beyond M is extrapolated
    from the partial sums at M/4, M/2 and M with the n^(-3/2) (1 + O(1/n))
    summand decay of the tau = 1/2 families.  The change of the extrapolated
    value between cutoffs M/2 and M must be below ``tol`` relative to the
    summed magnitudes; for odd Hermite moments, which vanish, the magnitudes
    come from the |x|^k moment integrals.
    """
    k = check_degree(k, "k", minimum=0)
    N = check_degree(N, "N", minimum=1)
    M = 16 * N if cutoff is None else check_degree(cutoff, "cutoff", minimum=8 * N)
    n0, I = tail_moment_terms(kind, k, M)
    al, be = kind.kernel_parameters
    n = np.arange(n0 - 1, M + 1)
    sel = n > N
    lam = np.array([K.eigenvalue(kind.code, al, be, int(j)) for j in n[sel]])
    terms = I[sel] / lam
    magnitude = math.fsum(np.abs(terms))
    if kind.name == "hermite" and k % 2:
        magnitude = math.fsum(tail_moment_terms(kind, k, M, absolute=True)[1][sel] / lam)
    def extrapolated(m):
        # S(j) = S_inf - A j^(-1/2) - B j^(-3/2) through cutoffs m/4, m/2, m
        js = np.array([m // 4, m // 2, m], dtype=float)
        sums = [math.fsum(terms[: int(j) - N]) for j in js]
        A = np.column_stack([np.ones(3), -js ** -0.5, -js ** -1.5])
        return float(np.linalg.solve(A, sums)[0])

    value = extrapolated(M)
    error = abs(value - extrapolated(M // 2))
    if error > tol * max(abs(value), magnitude):
        raise ConvergenceError(f"remainder extrapolation error {error:.3g} exceeds tol; raise the cutoff")
    return N ** kind.tau * value


def log_hermite_crossnorm(n: int) -> LogScaled:
    """int e^{-2x^2} H_n(x)^2 dx = 2^{n-1/2} Gamma(n+1/2) in log-scaled form."""
    n = check_degree(n, "n", minimum=0)
    return LogScaled(1, (n - 0.5) * math.log(2.0) + log_gamma(n + 0.5))


def hermite_crossnorm(n: int) -> float:
    return log_hermite_crossnorm(n).value


def log_laguerre_crossnorm(alpha: float, n: int) -> LogScaled:
    """int x^{2 alpha + 1} e^{-2x} L_n^(alpha)(x)^2 dx
    = Gamma(n+alpha+1) Gamma(n+1/2) Gamma(alpha+3/2) / (2 pi Gamma(n+1)^2)."""
    alpha = check_real(alpha, "alpha")
    if alpha <= -1:
        raise DomainError("alpha must exceed -1")
    n = check_degree(n, "n", minimum=0)
    log_mag = (log_gamma(n + alpha + 1.0) + log_gamma(n + 0.5) + log_gamma(alpha + 1.5)
               - math.log(2.0 * math.pi) - 2.0 * log_gamma(n + 1.0))
    return LogScaled(1, log_mag)


def laguerre_crossnorm(alpha: float, n: int) -> float:
    return log_laguerre_crossnorm(alpha, n).value


def laguerre_unweighted_crossnorm(n: int) -> float:
    """int e^{-2x} L_n(x)^2 dx = binom(2n, n) / 2^{2n+1} for alpha = 0."""
    n = check_degree(n, "n", minimum=0)
    return math.comb(2 * n, n) / 2.0 ** (2 * n + 1)
