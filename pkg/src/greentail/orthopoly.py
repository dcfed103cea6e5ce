"""Classical orthogonal polynomial families.

Families follow the classical normalizations: physicist Hermite H_n,
associated Laguerre L_n^(alpha), Jacobi P_n^(alpha, beta) with
P_n(1) = (alpha+1)_n / n!, Legendre, and Chebyshev T_n, U_n.  Each solves

    Q(x) Y'' + L(x) Y' + lambda_n Y = 0

and is orthogonal for a weight W on an interval I with squared norms M_n.
Raw values come from the three-term recurrence; normalized values
Y_n / sqrt(M_n) come from the orthonormal recurrence and stay finite for
very large degree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels as K
from ._special import log_gamma, pochhammer
from ._validation import as_float_array, check_degree, check_real
from .errors import DegreeOverflowError, DomainError, ParameterError

_CODES = {
    "hermite": K.HERMITE,
    "laguerre": K.LAGUERRE,
    "jacobi": K.JACOBI,
    "legendre": K.JACOBI,
    "chebyshev-t": K.CHEB_T,
    "chebyshev-u": K.CHEB_U,
}
FAMILY_NAMES = tuple(_CODES)


@dataclass(frozen=True)
class FamilyKind:
    """Which classical family, with its parameters.

    Use the constructors ``hermite()``, ``laguerre(alpha)``,
    ``jacobi(alpha, beta)``, ``legendre()``, ``chebyshev_first()`` and
    ``chebyshev_second()``.  ``general_parameters=True`` admits any real
    Jacobi parameters; weights and orthogonality are then unavailable below
    the degree where the squared norm is defined.
    """

    name: str
    alpha: float = 0.0
    beta: float = 0.0
    general_parameters: bool = False

    def __post_init__(self):
        if self.name not in _CODES:
            raise ParameterError(f"unknown family {self.name!r}; choose from {FAMILY_NAMES}")
        object.__setattr__(self, "alpha", check_real(self.alpha, "alpha"))
        object.__setattr__(self, "beta", check_real(self.beta, "beta"))
        if self.name == "laguerre" and self.alpha <= -1:
            raise DomainError(f"Laguerre parameter alpha must exceed -1, got {self.alpha}")
        if self.name == "jacobi" and not self.general_parameters:
            if self.alpha <= -1 or self.beta <= -1:
                raise DomainError(
                    "Jacobi parameters must exceed -1 unless general_parameters=True"
                )
        if self.name != "jacobi" and self.general_parameters:
            raise ParameterError("general_parameters applies to Jacobi only")
        if self.name not in ("laguerre", "jacobi") and (self.alpha or self.beta):
            raise ParameterError(f"{self.name} takes no parameters")
        if self.name == "laguerre" and self.beta:
            raise ParameterError("Laguerre takes a single parameter alpha")

    @classmethod
    def hermite(cls) -> "FamilyKind":
        return cls("hermite")

    @classmethod
    def laguerre(cls, alpha: float = 0.0) -> "FamilyKind":
        return cls("laguerre", alpha)

    @classmethod
    def jacobi(cls, alpha: float, beta: float, general_parameters: bool = False) -> "FamilyKind":
        return cls("jacobi", alpha, beta, general_parameters)

    @classmethod
    def legendre(cls) -> "FamilyKind":
        return cls("legendre")

    @classmethod
    def chebyshev_first(cls) -> "FamilyKind":
        return cls("chebyshev-t")

    @classmethod
    def chebyshev_second(cls) -> "FamilyKind":
        return cls("chebyshev-u")

    @classmethod
    def from_name(cls, name: str, alpha: float = 0.0, beta: float = 0.0,
                  general_parameters: bool = False) -> "FamilyKind":
        """Build a kind from its CLI name, ignoring parameters it does not take."""
        key = name.strip().lower()
        if key == "laguerre":
            return cls.laguerre(alpha)
        if key == "jacobi":
            return cls.jacobi(alpha, beta, general_parameters)
        return cls(key)

    @property
    def code(self) -> int:
        return _CODES[self.name]

    @property
    def jacobi_parameters(self) -> tuple[float, float]:
        """(alpha, beta) of the Jacobi family this kind is a multiple of."""
        if self.name == "legendre":
            return 0.0, 0.0
        if self.name == "chebyshev-t":
            return -0.5, -0.5
        if self.name == "chebyshev-u":
            return 0.5, 0.5
        if self.name == "jacobi":
            return self.alpha, self.beta
        raise ParameterError(f"{self.name} is not a Jacobi-type family")

    @property
    def kernel_parameters(self) -> tuple[float, float]:
        if self.name in ("jacobi", "legendre"):
            return self.jacobi_parameters
        return self.alpha, 0.0

    @property
    def is_jacobi_type(self) -> bool:
        return self.name in ("jacobi", "legendre", "chebyshev-t", "chebyshev-u")

    @property
    def tau(self) -> float:
        return 0.5 if self.name in ("hermite", "laguerre") else 1.0

    @property
    def interval(self) -> tuple[float, float]:
        if self.name == "hermite":
            return -math.inf, math.inf
        if self.name == "laguerre":
            return 0.0, math.inf
        return -1.0, 1.0

    @property
    def min_degree(self) -> int:
        """Smallest degree whose squared norm is defined."""
        if self.name != "jacobi" or (self.alpha > -1 and self.beta > -1):
            return 0
        a, b = self.alpha, self.beta
        bound = -min(a, b, a + b)
        n = 0
        while n + 1 <= bound:
            n += 1
        return n

    def label(self) -> str:
        if self.name == "laguerre":
            return f"laguerre(alpha={self.alpha!r})"
        if self.name == "jacobi":
            return f"jacobi(alpha={self.alpha!r}, beta={self.beta!r})"
        return self.name


@dataclass(frozen=True)
class FamilyData:
    """Coefficients of Q Y'' + L Y' + lambda Y = 0, the interval, tau and weights.

    ``Q`` holds (q0, q1, q2) and ``L`` holds (l0, l1).  ``sl_weight`` is
    P = Q W, the coefficient of the self-adjoint form (P Y')' = -lambda W Y.
    """

    Q: tuple[float, float, float]
    L: tuple[float, float]
    interval: tuple[float, float]
    tau: float
    weight: Callable
    sl_weight: Callable

    def Q_at(self, x):
        q0, q1, q2 = self.Q
        return q0 + q1 * x + q2 * x * x

    def L_at(self, x):
        l0, l1 = self.L
        return l0 + l1 * x


def family_data(kind: FamilyKind) -> FamilyData:
    """Differential-equation data of a family."""
    if kind.name == "hermite":
        return FamilyData((1.0, 0.0, 0.0), (0.0, -2.0), kind.interval, kind.tau,
                          lambda x: np.exp(-np.square(x)), lambda x: np.exp(-np.square(x)))
    if kind.name == "laguerre":
        a = kind.alpha
        return FamilyData((0.0, 1.0, 0.0), (a + 1.0, -1.0), kind.interval, kind.tau,
                          lambda x: np.power(x, a) * np.exp(-x),
                          lambda x: np.power(x, a + 1.0) * np.exp(-x))
    a, b = kind.jacobi_parameters
    return FamilyData((1.0, 0.0, -1.0), (b - a, -(a + b + 2.0)), kind.interval, kind.tau,
                      lambda x: np.power(1.0 - x, a) * np.power(1.0 + x, b),
                      lambda x: np.power(1.0 - x, a + 1.0) * np.power(1.0 + x, b + 1.0))


@dataclass(frozen=True)
class LogScaled:
    """A real number stored as sign and natural log of its magnitude."""

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ParameterError("sign must be -1, 0 or 1")
        if self.sign != 0 and not math.isfinite(self.log_magnitude):
            raise ParameterError("log_magnitude must be finite for a nonzero value")

    @classmethod
    def from_float(cls, v: float) -> "LogScaled":
        if v == 0:
            return cls(0, -math.inf)
        return cls(1 if v > 0 else -1, math.log(abs(v)))

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __mul__(self, other: "LogScaled") -> "LogScaled":
        s = self.sign * other.sign
        return LogScaled(s, self.log_magnitude + other.log_magnitude if s else -math.inf)

    def __truediv__(self, other: "LogScaled") -> "LogScaled":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogScaled")
        s = self.sign * other.sign
        return LogScaled(s, self.log_magnitude - other.log_magnitude if s else -math.inf)


@dataclass(frozen=True)
class FamilyConstants:
    lambda_n: float
    log_norm: LogScaled
    leading_coeff: LogScaled
    tau: float


def eigenvalue(kind: FamilyKind, n: int) -> float:
    """lambda_n = -n((n-1)/2 Q'' + L')."""
    n = check_degree(n)
    data = family_data(kind)
    return -n * ((n - 1) * data.Q[2] + data.L[1]) + 0.0


def _log_norm(kind: FamilyKind, n: int) -> float:
    name = kind.name
    if name == "hermite":
        return n * math.log(2.0) + log_gamma(n + 1.0) + 0.5 * math.log(math.pi)
    if name == "laguerre":
        return log_gamma(n + kind.alpha + 1.0) - log_gamma(n + 1.0)
    if name == "chebyshev-t":
        return math.log(math.pi) if n == 0 else math.log(math.pi / 2.0)
    if name == "chebyshev-u":
        return math.log(math.pi / 2.0)
    a, b = kind.jacobi_parameters
    if n < kind.min_degree:
        raise ParameterError(
            f"squared norm undefined for degree {n} with alpha={a}, beta={b}"
        )
    head = (a + b + 1.0) * math.log(2.0)
    if n == 0:
        return head + log_gamma(a + 1.0) + log_gamma(b + 1.0) - log_gamma(a + b + 2.0)
    return (head + log_gamma(n + a + 1.0) + log_gamma(n + b + 1.0) - log_gamma(n + 1.0)
            - math.log(2.0 * n + a + b + 1.0) - log_gamma(n + a + b + 1.0))


def _leading_coeff(kind: FamilyKind, n: int) -> LogScaled:
    name = kind.name
    if name == "hermite":
        return LogScaled(1, n * math.log(2.0))
    if name == "laguerre":
        return LogScaled(-1 if n % 2 else 1, -log_gamma(n + 1.0))
    if name == "chebyshev-t":
        return LogScaled(1, 0.0 if n == 0 else (n - 1) * math.log(2.0))
    if name == "chebyshev-u":
        return LogScaled(1, n * math.log(2.0))
    a, b = kind.jacobi_parameters
    if n == 0:
        return LogScaled(1, 0.0)
    if n + a + b + 1.0 > 0:
        return LogScaled(1, log_gamma(2.0 * n + a + b + 1.0) - n * math.log(2.0)
                         - log_gamma(n + 1.0) - log_gamma(n + a + b + 1.0))
    # binom(2n+a+b, n) as a product when gamma arguments are not positive
    sign, total = 1, -n * math.log(2.0)
    for j in range(1, n + 1):
        f = (n + a + b + j) / j
        if f == 0:
            return LogScaled(0, -math.inf)
        sign = -sign if f < 0 else sign
        total += math.log(abs(f))
    return LogScaled(sign, total)


def family_constants(kind: FamilyKind, n: int) -> FamilyConstants:
    """Eigenvalue, squared norm M_n and leading coefficient K_n of degree n."""
    n = check_degree(n)
    log_m = _log_norm(kind, n)
    return FamilyConstants(K.eigenvalue(kind.code, *kind.kernel_parameters, n),
                           LogScaled(1, log_m), _leading_coeff(kind, n), kind.tau)


def recurrence_coeffs(kind: FamilyKind, n: int) -> tuple[float, float, float]:
    """(A_n, B_n, C_n) with Y_{n+1} = (A_n x + B_n) Y_n - C_n Y_{n-1}."""
    n = check_degree(n, minimum=1)
    name = kind.name
    if name == "hermite":
        return 2.0, 0.0, 2.0 * n
    if name == "laguerre":
        a = kind.alpha
        return -1.0 / (n + 1), (2 * n + a + 1.0) / (n + 1), (n + a) / (n + 1)
    if name in ("chebyshev-t", "chebyshev-u"):
        return 2.0, 0.0, 1.0
    a, b = kind.jacobi_parameters
    s = 2.0 * n + a + b
    den = 2.0 * (n + 1) * (n + a + b + 1.0) * s
    if den == 0:
        raise ParameterError(f"Jacobi recurrence degenerate at n={n} for alpha={a}, beta={b}")
    A = (s + 1.0) * (s + 2.0) * s / den
    B = (s + 1.0) * (a * a - b * b) / den
    C = 2.0 * (n + a) * (n + b) * (s + 2.0) / den
    return A, B, C


def jacobi_series(n: int, alpha: float, beta: float, x):
    """P_n^(alpha,beta)(x) from the explicit finite sum, valid for all real parameters."""
    x = np.asarray(x, dtype=float)

    def expand(a, b, z):
        total = np.zeros_like(z)
        for k in range(n + 1):
            c = math.comb(n, k) * pochhammer(n + a + b + 1.0, k) * pochhammer(a + k + 1.0, n - k)
            total = total + c * z ** k
        return total / math.factorial(n)

    # reflect negative x so that |(x-1)/2| <= 1/2 and the sum stays well conditioned
    right = expand(alpha, beta, (x - 1.0) / 2.0)
    left = (-1.0) ** n * expand(beta, alpha, (-x - 1.0) / 2.0)
    out = np.where(x >= 0, right, left)
    return out if out.ndim else float(out)


def _first_two(kind: FamilyKind, x):
    name = kind.name
    one = np.ones_like(x)
    if name == "hermite":
        return one, 2.0 * x
    if name == "laguerre":
        return one, 1.0 + kind.alpha - x
    if name == "chebyshev-t":
        return one, x.copy()
    if name == "chebyshev-u":
        return one, 2.0 * x
    a, b = kind.jacobi_parameters
    return one, (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0


def _check_point(kind: FamilyKind, x: np.ndarray):
    lo, hi = kind.interval
    if kind.is_jacobi_type and np.any((x < lo) | (x > hi)):
        raise DomainError(f"x must lie in [{lo}, {hi}] for {kind.name}")


def eval(kind: FamilyKind, n: int, x):
    """Raw value Y_n(x) by forward recurrence from Y_0 and Y_1.

    Large degrees can overflow for Hermite (roughly beyond n = 300 at
    moderate x); in that case ``DegreeOverflowError`` is raised and
    ``eval_normalized`` should be used instead.
    """
    n = check_degree(n)
    arr = as_float_array(x)
    _check_point(kind, arr)
    scalar = arr.ndim == 0
    xv = np.atleast_1d(arr)
    y0, y1 = _first_two(kind, xv)
    if n == 0:
        out = y0
    else:
        prev, cur = y0, y1
        general = kind.name == "jacobi"
        for k in range(1, n):
            if general:
                a, b = kind.jacobi_parameters
                if 2.0 * (k + 1) * (k + a + b + 1.0) * (2.0 * k + a + b) == 0:
                    prev, cur = cur, np.asarray(jacobi_series(k + 1, a, b, xv), dtype=float)
                    continue
            A, B, C = recurrence_coeffs(kind, k)
            with np.errstate(over="ignore", invalid="ignore"):
                prev, cur = cur, (A * xv + B) * cur - C * prev
            if not np.all(np.isfinite(cur)):
                raise DegreeOverflowError(
                    f"raw {kind.name} value overflows at degree {k + 1}; use eval_normalized"
                )
        out = cur
    return float(out[0]) if scalar else out


def normalized_seed(kind: FamilyKind, xs: np.ndarray) -> tuple[int, np.ndarray, np.ndarray]:
    """(n0, p_{n0-1}(xs), p_{n0}(xs)) to start the orthonormal recurrence."""
    n_min = kind.min_degree
    if n_min == 0:
        p0 = math.exp(-0.5 * _log_norm(kind, 0)) * np.ones_like(xs)
        code, al, be = kind.code, *kind.kernel_parameters
        p1 = (xs - K.diag_coeff(code, al, be, 0)) * p0 / K.off_coeff(code, al, be, 1)
        return 1, p0, p1
    raw0 = np.atleast_1d(eval(kind, n_min, xs))
    raw1 = np.atleast_1d(eval(kind, n_min + 1, xs))
    p0 = raw0 * math.exp(-0.5 * _log_norm(kind, n_min))
    p1 = raw1 * math.exp(-0.5 * _log_norm(kind, n_min + 1))
    return n_min + 1, p0, p1


def eval_normalized(kind: FamilyKind, n: int, x):
    """Orthonormal value Y_n(x) / sqrt(M_n), finite for large n."""
    n = check_degree(n)
    arr = as_float_array(x)
    _check_point(kind, arr)
    if n < kind.min_degree:
        raise ParameterError(f"squared norm undefined for degree {n} of {kind.label()}")
    scalar = arr.ndim == 0
    xs = np.ascontiguousarray(np.atleast_1d(arr).ravel())
    n0, p0, p1 = normalized_seed(kind, xs)
    if n == n0 - 1:
        out = p0
    elif n == n0:
        out = p1
    else:
        _, out = K.advance(kind.code, *kind.kernel_parameters, xs, n0, p0, p1, n)
    return float(out[0]) if scalar else out.reshape(arr.shape)


def normalized_table(kind: FamilyKind, n_max: int, x) -> np.ndarray:
    """Array of shape (n_max+1, len(x)) with rows Y_n(x)/sqrt(M_n), n = 0..n_max.

    Requires an orthogonal-mode family (all norms defined from degree 0).
    """
    n_max = check_degree(n_max)
    if kind.min_degree:
        raise ParameterError("normalized_table needs norms defined from degree 0")
    xs = np.ascontiguousarray(np.atleast_1d(as_float_array(x)).ravel())
    _check_point(kind, xs)
    n0, p0, p1 = normalized_seed(kind, xs)
    if n_max == 0:
        return p0[None, :]
    return K.table(kind.code, *kind.kernel_parameters, xs, n0, p0, p1, n_max)


def _chebyshev_second_to_jacobi(n: int) -> float:
    return math.exp(log_gamma(n + 2.0) + 0.5 * math.log(math.pi) - math.log(2.0)
                    - log_gamma(n + 1.5))


def eval_derivative(kind: FamilyKind, n: int, x, order: int = 1):
    """Derivative of Y_n of the given order (1 or 2) through the family identities.

    Hermite H_n' = 2n H_{n-1}; Laguerre x L_n' = n L_n - (n+alpha) L_{n-1},
    with L_n' = -L_{n-1}^(alpha+1) at x = 0; Jacobi
    P_n' = (n+alpha+beta+1)/2 P_{n-1}^(alpha+1,beta+1); Chebyshev
    T_n' = n U_{n-1}.  The second derivative applies the identity twice.
    """
    n = check_degree(n)
    if order not in (1, 2):
        raise ParameterError("order must be 1 or 2")
    arr = as_float_array(x)
    if n == 0:
        return 0.0 * arr if arr.ndim else 0.0
    name = kind.name

    def inner(k: FamilyKind, m: int):
        return eval(k, m, arr) if order == 1 else eval_derivative(k, m, arr, 1)

    if name == "hermite":
        return 2.0 * n * inner(kind, n - 1)
    if name == "laguerre":
        shifted = FamilyKind.laguerre(kind.alpha + 1.0)
        if order == 2:
            return -eval_derivative(shifted, n - 1, arr, 1)
        at_zero = -np.asarray(eval(shifted, n - 1, arr))
        safe = np.where(arr == 0.0, 1.0, arr)
        with np.errstate(divide="ignore", invalid="ignore"):
            ident = (n * np.asarray(eval(kind, n, arr)) - (n + kind.alpha) * np.asarray(eval(kind, n - 1, arr))) / safe
        out = np.where(arr == 0.0, at_zero, ident)
        return float(out) if out.ndim == 0 else out
    if name == "chebyshev-t":
        return n * inner(FamilyKind.chebyshev_second(), n - 1)
    a, b = kind.jacobi_parameters
    shifted = FamilyKind.jacobi(a + 1.0, b + 1.0, general_parameters=True)
    factor = 0.5 * (n + a + b + 1.0)
    if name == "chebyshev-u":
        factor *= _chebyshev_second_to_jacobi(n)
    return factor * inner(shifted, n - 1)


def integrated_legendre(n: int, x):
    """P_n^(-1,-1)(x); for n >= 2 equal to (n-1)/2 times the integral of P_{n-1} from -1.

    Evaluated by the general-parameter recurrence, which falls back to the
    explicit series at the degree where its denominator vanishes.
    """
    n = check_degree(n, minimum=1)
    arr = as_float_array(x)
    if np.any(np.abs(arr) > 1):
        raise DomainError("x must lie in [-1, 1]")
    return eval(FamilyKind.jacobi(-1.0, -1.0, general_parameters=True), n, arr)
