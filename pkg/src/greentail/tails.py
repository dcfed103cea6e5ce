"""Truncation tails of the bilinear expansion over a classical family.

The tail of degree N at (x, y) is

    sum_{n > N} Y_n(x) Y_n(y) / (M_n lambda_n),

i.e. the orthonormal summands divided by the eigenvalue.  For the two
Chebyshev families the series is reported in the classical scale
sum T_n(x) T_n(y) / lambda_n (resp. U_n), which is pi/2 times the
orthonormal one, so that the diagonal limits read 1/2 and 1/(2(1-x^2)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import polygamma

from . import _kernels as K
from ._validation import check_degree, check_real
from .asymptotics import Envelope, envelope_bound
from .errors import DomainError, ParameterError
from .orthopoly import FamilyKind, normalized_seed, normalized_table

MAX_TERMS = 10_000_000


@dataclass(frozen=True)
class TailValue:
    """A tail sum with its cutoff and a remainder bound.

    ``status`` is "converged" when ``remainder_bound`` meets the requested
    tolerance, "accelerated" when only the extrapolated ``error_estimate``
    does (cutoff capped), and "unconverged" otherwise.
    """

    value: float
    cutoff: int
    remainder_bound: float
    method: str
    status: str = "converged"
    error_estimate: float = 0.0
    N: int = 0

    @property
    def converged(self) -> bool:
        return self.status != "unconverged"

    def scaled(self, factor: float) -> "TailValue":
        return TailValue(self.value * factor, self.cutoff, self.remainder_bound * abs(factor),
                         self.method, self.status, self.error_estimate * abs(factor), self.N)


@dataclass(frozen=True)
class CDTerm:
    """One telescoped summand in normalized scale."""

    D: float
    ratio: float
    lambda_gap: float


def series_scale(kind: FamilyKind) -> float:
    """Factor from the orthonormal series to the reported one."""
    return math.pi / 2.0 if kind.name in ("chebyshev-t", "chebyshev-u") else 1.0


def _check_points(kind: FamilyKind, x, y) -> tuple[float, float, bool]:
    x = check_real(x, "x")
    y = check_real(y, "y")
    a, b = kind.interval
    for v, name in ((x, "x"), (y, "y")):
        if not a <= v <= b:
            raise DomainError(f"{name}={v} lies outside [{a}, {b}]")
    interior = all(a < v < b for v in (x, y))
    return x, y, interior


def _state(kind: FamilyKind, x: float, y: float):
    n0, p0, p1 = normalized_seed(kind, np.array([x, y], dtype=float))
    return n0, float(p0[0]), float(p1[0]), float(p0[1]), float(p1[1])


def _check_start(kind: FamilyKind, N: int, n0: int):
    if N < n0:
        raise ParameterError(f"N={N} is below the first usable degree {n0} of {kind.label()}")


def _status(bound: float, estimate: float, target: float, accelerated: bool) -> str:
    if bound <= target:
        return "converged"
    if accelerated and estimate <= target:
        return "accelerated"
    return "unconverged"


def tail_term(kind: FamilyKind, x: float, y: float, n: int) -> float:
    """Single summand of degree n in the reported scale."""
    n = check_degree(n, minimum=1)
    n0, px, cx, py, cy = _state(kind, x, y)
    _check_start(kind, n, n0)
    al, be = kind.kernel_parameters
    if n == n0:
        vx, vy = cx, cy
    else:
        _, cur = K.advance(kind.code, al, be, np.array([x, y]), n0, np.array([px, py]),
                           np.array([cx, cy]), n)
        vx, vy = cur
    return series_scale(kind) * vx * vy / K.eigenvalue(kind.code, al, be, n)


def _direct_sums(kind, x, y, N, marks):
    n0, px, cx, py, cy = _state(kind, x, y)
    _check_start(kind, N, n0)
    al, be = kind.kernel_parameters
    return K.diagonal_sums(kind.code, al, be, x, y, n0, px, cx, py, cy, N,
                           np.asarray(marks, dtype=np.int64))


def _even(m: int) -> int:
    return m + (m % 2)


def tail_direct(kind: FamilyKind, x, y, N: int, rtol: float = 1e-6, *, cutoff: int | None = None,
                method: str | None = None, accelerate: bool = True,
                max_terms: int = MAX_TERMS) -> TailValue:
    """Tail by direct summation of the summands up to a cutoff M.

    M = max(4N, M_env) where the envelope integral beyond M_env is at most
    ``rtol`` times the partial value, capped at ``max_terms``.  Off the
    diagonal the default method averages the last two partial sums
    ("direct_paired") and doubles the envelope bound.  On the diagonal the
    remainder beyond M is estimated by Richardson extrapolation at M/4,
    M/2, M with the envelope's decay exponent; the estimate is clipped to
    the rigorous range [0, bound], so ``remainder_bound`` stays valid.
    """
    x, y, interior = _check_points(kind, x, y)
    N = check_degree(N, "N", minimum=1)
    diag = x == y
    if method is None:
        method = "direct" if diag else "direct_paired"
    if method not in ("direct", "direct_paired"):
        raise ParameterError(f"unknown direct method {method!r}")
    scale = series_scale(kind)
    env: Envelope | None = None
    if interior:
        env = envelope_bound(kind, (min(x, y), max(x, y)), max(N, 32))
    factor = 2.0 if method == "direct_paired" and not diag else 1.0
    capped = False
    if cutoff is None:
        if env is None:
            raise DomainError("points on the boundary need an explicit cutoff")
        probe, _ = _direct_sums(kind, x, y, N, [4 * N])
        partial = abs(probe[0])
        target = rtol * partial if partial > 0 else rtol
        M = max(4 * N, math.ceil(env.cutoff_for(0.5 * target / factor)))
        if M > max_terms:
            M, capped = max_terms, True
        M = _even(M)
    else:
        M = check_degree(cutoff, "cutoff", minimum=N + 1)
    marks = sorted({max(N, M // 4), max(N, M // 2), M})
    sums, nxt = _direct_sums(kind, x, y, N, marks)
    raw = float(sums[-1])
    paired = sums + 0.5 * nxt
    bound = env.tail_integral(M) * factor if env is not None else math.inf
    accelerated = False
    estimate = abs(float(paired[-1] - paired[0])) if len(marks) > 1 else bound
    if diag and accelerate and env is not None and len(marks) == 3 and marks[0] > N:
        f = 2.0 ** (env.p - 1.0) - 1.0
        v_hi = paired[2] + (paired[2] - paired[1]) / f
        v_lo = paired[1] + (paired[1] - paired[0]) / f
        correction = min(max(float(v_hi) - raw, 0.0), bound)
        value = raw + correction
        estimate = abs(float(v_hi - v_lo))
        accelerated = True
    elif method == "direct_paired":
        value = float(paired[-1])
    else:
        value = raw
    target = rtol * abs(value) if value != 0 else rtol
    status = _status(bound, estimate, target, accelerated)
    if capped and status == "converged":
        status = "accelerated"
    return TailValue(value * scale, M, bound * scale, method, status, estimate * scale, N)


def tail_cd(kind: FamilyKind, x, y, N: int, rtol: float = 1e-6, *, cutoff: int | None = None,
            max_terms: int = MAX_TERMS) -> TailValue:
    """Tail through the telescoped Christoffel-Darboux form.

    (x-y) tail = sum_{n>=N} a_{n+1} D_{n+1} (1/lambda_n - 1/lambda_{n+1})
                 - a_{N+1} D_{N+1} / lambda_N,
    where a_{n+1} D_{n+1} is the Christoffel-Darboux numerator in normalized
    scale.  The summands decay faster than the direct ones.
    """
    x, y, interior = _check_points(kind, x, y)
    if x == y:
        raise DomainError("tail_cd needs x != y; use tail_direct on the diagonal")
    N = check_degree(N, "N", minimum=1)
    n0, px, cx, py, cy = _state(kind, x, y)
    _check_start(kind, N, n0)
    al, be = kind.kernel_parameters
    scale = series_scale(kind)
    gap = abs(x - y)
    env = envelope_bound(kind, (min(x, y), max(x, y)), max(N, 32), term="cd") if interior else None

    def run(marks):
        return K.cd_sums(kind.code, al, be, x, y, n0, px, cx, py, cy, N,
                         np.asarray(marks, dtype=np.int64))

    capped = False
    if cutoff is None:
        if env is None:
            raise DomainError("points on the boundary need an explicit cutoff")
        probe, boundary = run([4 * N])
        partial = abs(probe[0] - boundary) / gap
        target = rtol * partial if partial > 0 else rtol
        M = max(4 * N, math.ceil(env.cutoff_for(0.5 * target * gap)))
        if M > max_terms:
            M, capped = max_terms, True
        M = _even(M)
    else:
        M = check_degree(cutoff, "cutoff", minimum=N + 1)
    marks = sorted({max(N, M // 2), M})
    sums, boundary = run(marks)
    value = (float(sums[-1]) - boundary) / (x - y)
    bound = env.tail_integral(M) / gap if env is not None else math.inf
    estimate = abs(float(sums[-1] - sums[0])) / gap
    target = rtol * abs(value) if value != 0 else rtol
    status = _status(bound, estimate, target, False)
    if capped and status == "converged":
        status = "accelerated"
    return TailValue(value * scale, M, bound * scale, "cd", status, estimate * scale, N)


def tail(kind: FamilyKind, x, y, N: int, rtol: float = 1e-6, method: str | None = None,
         **kwargs) -> TailValue:
    """Tail with automatic method choice: "cd" off the diagonal, "direct" on it."""
    if method is None:
        method = "direct" if float(x) == float(y) else "cd"
    if method == "cd":
        return tail_cd(kind, x, y, N, rtol, **kwargs)
    return tail_direct(kind, x, y, N, rtol, method=method, **kwargs)


def rescaled_error(kind: FamilyKind, x, y, N: int, gamma: float, method: str | None = None,
                   rtol: float = 1e-6) -> float:
    """N^gamma times the tail of degree N."""
    gamma = check_real(gamma, "gamma")
    t = tail(kind, x, y, N, rtol, method)
    return N ** gamma * t.value


def diagonal_limit(kind: FamilyKind, x) -> float:
    """Limit of N^tau times the diagonal tail at x.

    Hermite exp(x^2)/(sqrt(2) pi); Laguerre x^(-alpha-1/2) e^x / pi; Jacobi
    (1-x)^(-alpha-1/2) (1+x)^(-beta-1/2) / pi; Chebyshev T 1/2 and
    Chebyshev U 1/(2(1-x^2)) in the classical scale.
    """
    x = check_real(x, "x")
    a, b = kind.interval
    if not a < x < b:
        raise DomainError(f"the diagonal limit diverges or is undefined at x={x}")
    if kind.name == "hermite":
        return math.exp(x * x) / (math.sqrt(2.0) * math.pi)
    if kind.name == "laguerre":
        return x ** (-kind.alpha - 0.5) * math.exp(x) / math.pi
    if kind.name == "chebyshev-t":
        return 0.5
    if kind.name == "chebyshev-u":
        return 1.0 / (2.0 * (1.0 - x * x))
    al, be = kind.jacobi_parameters
    return (1.0 - x) ** (-al - 0.5) * (1.0 + x) ** (-be - 0.5) / math.pi


def diagonal_gamma(kind: FamilyKind) -> float:
    """Rescaling power of N on the diagonal, equal to tau."""
    return kind.tau


def offdiagonal_exponent(kind: FamilyKind) -> float:
    """Supremum of exponents gamma for which N^gamma tail -> 0 off the diagonal."""
    if kind.name == "hermite":
        return 1.0
    if kind.name == "laguerre":
        return 0.5
    return 2.0


def cosine_tail_general(alpha: float, beta: float, theta: float, N: int,
                        cutoff: int | None = None) -> float:
    """N sum_{n>N} 2 cos^2((n + (alpha+beta+1)/2) theta - (alpha+1/2) pi/2) / n^2.

    2 cos^2 = 1 + cos(2 phase).  The non-oscillating part beyond the cutoff
    is added exactly through the trigamma function; the oscillating part
    beyond it is at most 1/(cutoff^2 |sin theta|) and is dropped.
    """
    alpha = check_real(alpha, "alpha")
    beta = check_real(beta, "beta")
    theta = check_real(theta, "theta")
    if not 0 < theta < math.pi:
        raise DomainError("theta must lie in (0, pi)")
    N = check_degree(N, "N", minimum=1)
    M = cutoff if cutoff is not None else max(64 * N, 1_000_000)
    n = np.arange(N + 1, M + 1, dtype=float)
    phase = (n + (alpha + beta + 1.0) / 2.0) * theta - (alpha + 0.5) * math.pi / 2.0
    head = math.fsum(2.0 * np.cos(phase) ** 2 / (n * n))
    rest = float(polygamma(1, M + 1.0))
    return N * (head + rest)


def chebyshev_first_partial_closed(x: float, y: float, N: int, M: int) -> float:
    """sum_{n=N+1}^{M} T_n(x) T_n(y) / n^2 with T_n(cos t) = cos(n t)."""
    s, t = math.acos(check_real(x, "x")), math.acos(check_real(y, "y"))
    n = np.arange(N + 1, M + 1, dtype=float)
    return math.fsum(np.cos(n * s) * np.cos(n * t) / (n * n))


def _bernoulli_cos_sum(u: float) -> float:
    """sum_{n>=1} cos(n u) / n^2 for u in [0, 2 pi]."""
    return math.pi ** 2 / 6.0 - math.pi * u / 2.0 + u * u / 4.0


def chebyshev_first_tail_exact(x: float, y: float, N: int) -> float:
    """Full tail sum_{n>N} T_n(x) T_n(y) / n^2 from the closed-form series value."""
    s, t = math.acos(check_real(x, "x")), math.acos(check_real(y, "y"))
    full = 0.5 * (_bernoulli_cos_sum(abs(s - t)) + _bernoulli_cos_sum(s + t))
    n = np.arange(1, N + 1, dtype=float)
    return full - math.fsum(np.cos(n * s) * np.cos(n * t) / (n * n))


@dataclass(frozen=True)
class ConvergenceStudy:
    """Rescaled tails over increasing N and a power-law extrapolation."""

    rows: list
    exponent: float
    extrapolated: float
    diagnostic: str
    tails: list = field(default_factory=list, repr=False)


def fit_power_law(Ns, values) -> tuple[float, float, str]:
    """Fit S_N = L + c N^(-r) through the last three points; returns (r, L, diagnostic)."""
    (n1, n2, n3), (s1, s2, s3) = Ns[-3:], values[-3:]
    d1, d2 = s2 - s1, s3 - s2
    if d1 == 0 or d2 == 0 or d1 * d2 < 0:
        return math.nan, s3, "oscillating: no monotone power-law correction"
    ratio = d1 / d2

    def g(r):
        if abs(r) < 1e-12:
            return math.log(n2 / n1) / math.log(n3 / n2) - ratio
        return (n1 ** -r - n2 ** -r) / (n2 ** -r - n3 ** -r) - ratio

    lo, hi = -8.0, 12.0
    try:
        r = brentq(g, lo, hi, xtol=1e-14)
    except ValueError:
        return math.nan, s3, "power-law fit failed"
    if r <= 0:
        return r, math.nan, "diverging: rescaled values grow with N"
    c = d2 / (n3 ** -r - n2 ** -r)
    return r, s3 - c * n3 ** -r, "ok"


def convergence_study(kind: FamilyKind, x, y, gamma: float, N_list, method: str | None = None,
                      rtol: float = 1e-6) -> ConvergenceStudy:
    """Rescaled tails N^gamma tail(N) for each N and a fitted extrapolation.

    The correction model is a single term c N^(-r) with r fitted from the
    last three points; the fitted r is reported, never assumed.
    """
    Ns = [check_degree(n, "N", minimum=1) for n in N_list]
    if len(Ns) < 3 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ParameterError("N_list needs at least three strictly increasing entries")
    gamma = check_real(gamma, "gamma")
    tails = [tail(kind, x, y, n, rtol, method) for n in Ns]
    values = [n ** gamma * t.value for n, t in zip(Ns, tails)]
    r, limit, diag = fit_power_law(Ns, values)
    return ConvergenceStudy(list(zip(Ns, values)), r, limit, diag, tails)


def cd_terms(kind: FamilyKind, x, y, N: int) -> list[CDTerm]:
    """Telescoped summands for n = 0..N in normalized scale."""
    table = normalized_table(kind, N + 1, [x, y])
    al, be = kind.kernel_parameters
    out = []
    for n in range(N + 1):
        d = table[n + 1, 0] * table[n, 1] - table[n, 0] * table[n + 1, 1]
        lam_n = K.eigenvalue(kind.code, al, be, n)
        lam_next = K.eigenvalue(kind.code, al, be, n + 1)
        gap = (1.0 / lam_n if lam_n else math.inf) - 1.0 / lam_next
        out.append(CDTerm(d, K.off_coeff(kind.code, al, be, n + 1), gap))
    return out


def cd_partial_identity_check(kind: FamilyKind, x, y, N: int) -> float:
    """Largest relative residual of the two finite Christoffel-Darboux identities.

    Checks (x-y) sum_{n=1}^{N} p_n(x)p_n(y)/lambda_n against its telescoped
    form, and (x-y) sum_{n=0}^{N} p_n(x)p_n(y) against a_{N+1} D_{N+1}.
    Residuals are relative to (x-y) times the sum of absolute summands.
    """
    x, y, _ = _check_points(kind, x, y)
    if x == y:
        raise DomainError("the identity check needs x != y")
    N = check_degree(N, "N", minimum=1)
    if kind.min_degree:
        raise ParameterError("identity check needs norms defined from degree 0")
    table = normalized_table(kind, N + 1, [x, y])
    al, be = kind.kernel_parameters
    n = np.arange(N + 2)
    lam = np.array([K.eigenvalue(kind.code, al, be, int(k)) for k in n])
    a = np.array([K.off_coeff(kind.code, al, be, int(k) + 1) for k in n])
    prod = table[:, 0] * table[:, 1]
    t = a[:-1] * (table[1:, 0] * table[:-1, 1] - table[:-1, 0] * table[1:, 1])
    lhs1 = (x - y) * math.fsum(prod[1:N + 1] / lam[1:N + 1])
    inner = [t[k] * (1.0 / lam[k] - 1.0 / lam[k + 1]) for k in range(1, N)]
    rhs1 = t[N] / lam[N] - t[0] / lam[1] + math.fsum(inner)
    scale1 = abs(x - y) * math.fsum(np.abs(prod[1:N + 1]) / lam[1:N + 1])
    lhs2 = (x - y) * math.fsum(prod[:N + 1])
    rhs2 = t[N]
    scale2 = abs(x - y) * math.fsum(np.abs(prod[:N + 1]))
    return max(abs(lhs1 - rhs1) / scale1, abs(lhs2 - rhs2) / scale2)


@dataclass(frozen=True)
class CDBound:
    """|tail(n)| <= K / n^power for n >= valid_from, from the telescoped form.

    ``D`` is the measured supremum of |a_{n+1} D_{n+1}(x,y)| (through the
    Cauchy-Schwarz majorant, with the envelope safety factor).
    """

    K: float
    power: float
    D: float
    valid_from: int

    def __call__(self, n) -> np.ndarray | float:
        return self.K / np.asarray(n, dtype=float) ** self.power


def cd_tail_bound(kind: FamilyKind, x, y, N: int, n_max: int | None = None,
                  safety: float = 1.5) -> CDBound:
    """Bound |tail(n)| <= 2 D / (lambda_n |x-y|) for n >= N, written as K / n^s.

    Uses sum_{m>=n} (1/lambda_m - 1/lambda_{m+1}) = 1/lambda_n, so only a
    uniform bound D on the Christoffel-Darboux numerator is needed.  D is
    measured over N <= n <= n_max (default 16 N).  s = 1 for Hermite and
    s = 2 for Jacobi-type families; Laguerre has no uniform D.
    """
    x, y, _ = _check_points(kind, x, y)
    if x == y:
        raise DomainError("the bound needs x != y")
    N = check_degree(N, "N", minimum=1)
    if kind.name == "laguerre":
        raise ParameterError("the numerator is not uniformly bounded for Laguerre")
    n_max = 16 * N if n_max is None else check_degree(n_max, "n_max", minimum=N)
    n0, px, cx, py, cy = _state(kind, x, y)
    _check_start(kind, N, n0)
    al, be = kind.kernel_parameters
    D = safety * K.max_abs_cd_ratio(kind.code, al, be, x, y, n0, px, cx, py, cy, N, n_max)
    scale = series_scale(kind)
    if kind.name == "hermite":
        power, shape = 1.0, 0.5
    else:
        power = 2.0
        shift = K.eigenvalue(kind.code, al, be, N) / N - N
        shape = max(1.0, N / (N + shift))
    return CDBound(2.0 * D * scale * shape / abs(x - y), power, D, N)

