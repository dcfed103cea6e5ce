"""Regular Sturm-Liouville problems.

The problem is (p phi')' - q phi = -lambda w phi on [a, b] with
alpha1 phi(a) + alpha2 phi'(a) = 0 and beta1 phi(b) + beta2 phi'(b) = 0.
The Liouville change of variables t = int_a^x sqrt(w/p), u = (p w)^(1/4) phi
gives u'' - qt(t) u = -lambda u on [0, c].  Eigenvalues come from scaled
Prufer shooting on the normal form, eigenfunctions from the modified
Prufer (phase, log-amplitude) system, and the Green's function from two
solutions of the lambda = 0 equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial.chebyshev import chebval
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from . import _kernels as K
from ._validation import check_degree, check_positive, check_real
from .errors import ConvergenceError, DomainError, ParameterError
from .expressions import Expression

BC = tuple[float, float, float, float]
CASES = {"DD": (1.0, 0.0, 1.0, 0.0), "DN": (1.0, 0.0, 0.0, 1.0),
         "NN": (0.0, 1.0, 0.0, 1.0), "ND": (0.0, 1.0, 1.0, 0.0)}


def _vectorized(f) -> Callable:
    """Wrap a scalar function, constant, or vectorized callable as a vectorized callable."""
    if f is None:
        return None
    if not callable(f):
        value = float(f)
        return lambda x: np.full(np.shape(x), value) if np.ndim(x) else value
    probe = np.array([0.1, 0.2, 0.3])
    try:
        out = np.asarray(f(probe), dtype=float)
        if out.shape == probe.shape:
            return f
    except Exception:
        pass
    vf = np.vectorize(lambda v: float(f(v)), otypes=[float])
    return lambda x: vf(x) if np.ndim(x) else float(f(float(x)))


def _check_bc(bc) -> BC:
    if len(bc) != 4:
        raise ParameterError("bc needs four constants (alpha1, alpha2, beta1, beta2)")
    a1, a2, b1, b2 = (check_real(v, "boundary constant") for v in bc)
    if a1 * a1 + a2 * a2 == 0 or b1 * b1 + b2 * b2 == 0:
        raise ParameterError("each boundary condition needs a nonzero coefficient")
    return a1, a2, b1, b2


@dataclass(frozen=True, eq=False)
class SLProblem:
    """Regular Sturm-Liouville problem on [a, b] with separated boundary conditions.

    ``p``, ``q``, ``w`` are callables of x (or constants).  Derivatives
    ``dp``, ``d2p``, ``dw``, ``d2w`` are optional; missing ones are taken
    from Chebyshev interpolants.
    """

    p: Callable
    q: Callable
    w: Callable
    a: float
    b: float
    bc: BC = (1.0, 0.0, 1.0, 0.0)
    dp: Callable | None = None
    d2p: Callable | None = None
    dw: Callable | None = None
    d2w: Callable | None = None
    label: str = ""

    def __post_init__(self):
        a, b = check_real(self.a, "a"), check_real(self.b, "b")
        if not a < b:
            raise ParameterError("need a < b")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "bc", _check_bc(self.bc))
        for name in ("p", "q", "w", "dp", "d2p", "dw", "d2w"):
            object.__setattr__(self, name, _vectorized(getattr(self, name)))
        grid = np.linspace(a, b, 256)
        for name in ("p", "w"):
            vals = np.asarray(getattr(self, name)(grid), dtype=float)
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
                raise ParameterError(f"{name} must be finite and positive on [a, b]")
        if not np.all(np.isfinite(np.asarray(self.q(grid), dtype=float))):
            raise ParameterError("q must be finite on [a, b]")

    @classmethod
    def from_expressions(cls, p: str, q: str, w: str, a: float, b: float, bc: BC,
                         label: str = "") -> "SLProblem":
        """Problem from expression strings, with exact symbolic derivatives."""
        P, Qx, W = Expression(p), Expression(q), Expression(w)
        dP, dW = P.derivative(), W.derivative()
        return cls(P, Qx, W, a, b, bc, dP, dP.derivative(), dW, dW.derivative(),
                   label or f"p={P.text}; q={Qx.text}; w={W.text}")

    def with_bc(self, bc: BC) -> "SLProblem":
        return SLProblem(self.p, self.q, self.w, self.a, self.b, bc, self.dp, self.d2p,
                         self.dw, self.d2w, self.label)


def exponential_weight_problem() -> SLProblem:
    """(e^{3x} phi')' + 2 e^{3x} phi = -lambda e^{3x} phi on [0, 1], Dirichlet at both ends.

    Eigenvalues (1 + 4 (n+1)^2 pi^2) / 4, eigenfunctions sqrt(2) e^{-3x/2} sin((n+1) pi x).
    """
    return SLProblem.from_expressions("exp(3*x)", "-2*exp(3*x)", "exp(3*x)", 0.0, 1.0,
                                      (1.0, 0.0, 1.0, 0.0), "exponential weight")


def base_problem(case: str) -> SLProblem:
    """phi'' = -lambda phi on [0, 1] with Dirichlet (D) or Neumann (N) ends, e.g. "DN"."""
    if case not in CASES:
        raise ParameterError(f"case must be one of {sorted(CASES)}")
    return SLProblem(1.0, 0.0, 1.0, 0.0, 1.0, CASES[case], 0.0, 0.0, 0.0, 0.0, case)


class ChebFunction:
    """Chebyshev interpolant with a fast scalar path."""

    def __init__(self, series: Chebyshev):
        self.series = series
        self.coef = np.ascontiguousarray(series.coef, dtype=float)
        self.lo, self.hi = (float(v) for v in series.domain)

    @classmethod
    def fit(cls, f, domain, tol: float = 1e-14, max_deg: int = 1024) -> "ChebFunction":
        deg = 16
        while True:
            s = Chebyshev.interpolate(f, deg, domain=domain)
            coef = s.coef
            scale = max(float(np.max(np.abs(coef))), 1e-300)
            if np.max(np.abs(coef[-4:])) <= tol * scale or deg >= max_deg:
                big = np.nonzero(np.abs(coef) > 0.01 * tol * scale)[0]
                keep = int(big[-1]) + 1 if big.size else 1
                return cls(Chebyshev(coef[:keep], domain=domain))
            deg *= 2

    @classmethod
    def constant(cls, value: float, domain) -> "ChebFunction":
        return cls(Chebyshev([float(value)], domain=domain))

    def __call__(self, t):
        if np.ndim(t) == 0:
            return K.clenshaw(float(t), self.coef, self.lo, self.hi)
        s = (2.0 * np.asarray(t, dtype=float) - self.lo - self.hi) / (self.hi - self.lo)
        return chebval(s, self.coef)

    def deriv(self, m: int = 1) -> "ChebFunction":
        return ChebFunction(self.series.deriv(m))

    def integ(self, lbnd: float) -> "ChebFunction":
        return ChebFunction(self.series.integ(lbnd=lbnd))

    def mean(self) -> float:
        F = self.series.integ(lbnd=self.lo)
        return float(F(self.hi)) / (self.hi - self.lo)


def _identity(x):
    return x


def _one(x):
    return np.ones(np.shape(x)) if np.ndim(x) else 1.0


@dataclass(frozen=True, eq=False)
class LiouvilleForm:
    """Normal form u'' - qtilde(t) u = -lambda u on [0, c] and the coordinate maps.

    ``bc`` holds the boundary constants in the t coordinate, and
    ``quarter_power`` is (p w)^(1/4) as a function of x, so phi = u / quarter_power.
    """

    c: float
    qtilde: ChebFunction
    x_of_t: Callable
    t_of_x: Callable
    quarter_power: Callable
    bc: BC
    problem: SLProblem | None = None

    @classmethod
    def normal(cls, c: float, qtilde=0.0, bc: BC = (1.0, 0.0, 1.0, 0.0)) -> "LiouvilleForm":
        """A problem given directly in normal form on [0, c]."""
        c = check_positive(c, "c")
        if callable(qtilde):
            qt = ChebFunction.fit(_vectorized(qtilde), (0.0, c))
        else:
            qt = ChebFunction.constant(qtilde, (0.0, c))
        return cls(c, qt, _identity, _identity, _one, _check_bc(bc))

    @property
    def qtilde_mean(self) -> float:
        return self.qtilde.mean()


def _derivatives(problem: SLProblem):
    dom = (problem.a, problem.b)
    out = []
    for f, d1, d2 in ((problem.p, problem.dp, problem.d2p), (problem.w, problem.dw, problem.d2w)):
        fit = None
        if d1 is None or d2 is None:
            fit = ChebFunction.fit(f, dom)
        out.append((f, d1 if d1 is not None else fit.deriv(1), d2 if d2 is not None else fit.deriv(2)))
    return out


def liouville_transform(problem: SLProblem, tol: float = 1e-12) -> LiouvilleForm:
    """Normal-form data for ``problem``.

    c by adaptive quadrature; t(x) from the integrated interpolant of
    sqrt(w/p); x(t) by bracketed root solves at Chebyshev nodes;
    qtilde = q/w + (pw)^(-1/4) d^2/dt^2 (pw)^(1/4) through the chain rule in x,
    with exact derivatives when supplied and interpolant derivatives otherwise.
    """
    tol = check_positive(tol, "tol")
    a, b = problem.a, problem.b
    p, q, w = problem.p, problem.q, problem.w

    def speed(x):
        return np.sqrt(w(x) / p(x))

    c = quad(lambda x: float(speed(x)), a, b, epsabs=0.0, epsrel=max(tol, 1e-14), limit=200)[0]
    t_raw = ChebFunction.fit(speed, (a, b)).integ(a)
    stretch = c / t_raw(b)
    t_series = ChebFunction(t_raw.series * stretch)

    def invert(ts):
        out = np.empty(np.shape(ts))
        for i, t in enumerate(np.ravel(ts)):
            if t <= 0:
                out.flat[i] = a
            elif t >= c:
                out.flat[i] = b
            else:
                out.flat[i] = brentq(lambda x: t_series(x) - t, a, b, xtol=1e-15, rtol=9e-16)
        return out

    x_series = ChebFunction.fit(invert, (0.0, c))
    (p_, dp, d2p), (w_, dw, d2w) = _derivatives(problem)

    def qtilde_x(x):
        P, W = p_(x), w_(x)
        P1, P2, W1, W2 = dp(x), d2p(x), dw(x), d2w(x)
        lp, lw = P1 / P, W1 / W
        dlm = 0.25 * (lp + lw)
        dlm1 = 0.25 * (P2 / P - lp * lp + W2 / W - lw * lw)
        ratio = P / W
        ratio1 = (P1 * W - P * W1) / (W * W)
        return q(x) / W + ratio * (dlm1 + dlm * dlm) + 0.5 * ratio1 * dlm

    qt = ChebFunction.fit(lambda t: qtilde_x(x_series(t)), (0.0, c))

    def log_quarter_slope(x):
        return 0.25 * (dp(x) / p_(x) + dw(x) / w_(x))

    a1, a2, b1, b2 = problem.bc
    bc = (a1 - a2 * float(log_quarter_slope(a)), a2 * float(speed(a)),
          b1 - b2 * float(log_quarter_slope(b)), b2 * float(speed(b)))

    def quarter_power(x):
        return (p_(x) * w_(x)) ** 0.25

    return LiouvilleForm(c, qt, x_series, t_series, quarter_power, bc, problem)


@dataclass(frozen=True)
class PhaseState:
    """Modified Prufer phase and log amplitude at one point."""

    theta: float
    logR: float


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Large-n form c sqrt(lambda_n) ~ sqrt_lambda_times_c; u_n ~ sqrt(2/c) template(nu pi t / c)."""

    sqrt_lambda_times_c: float
    efun_form: str
    nu: float

    def template(self, t, c: float):
        f = np.cos if self.efun_form == "cos" else np.sin
        return math.sqrt(2.0 / c) * f(self.nu * math.pi * np.asarray(t, dtype=float) / c)


def asymptotic_predictions(bc: BC, c: float, n: int) -> AsymptoticPrediction:
    """Leading eigenvalue and eigenfunction asymptotics by boundary type."""
    _, a2, _, b2 = _check_bc(bc)
    n = check_degree(n, "n", minimum=0)
    if a2 != 0 and b2 != 0:
        nu = float(n)
    elif a2 == 0 and b2 == 0:
        nu = n + 1.0
    else:
        nu = n + 0.5
    return AsymptoticPrediction(nu * math.pi, "cos" if a2 != 0 else "sin", nu)


def _bc_angle(c1: float, c2: float, scale: float) -> float:
    """Phase in [0, pi) with c1 sin(theta) + c2 scale cos(theta) = 0."""
    return math.atan2(-c2 * scale, c1) % math.pi


def _phase_rhs(t, y, lam, k, coef, lo, hi):
    qv = K.clenshaw(t, coef, lo, hi)
    s, co = math.sin(y[0]), math.cos(y[0])
    return [k * co * co + (lam - qv) / k * s * s]


_ODE = dict(method="DOP853", rtol=1e-12, atol=1e-12)


def terminal_phase(form: LiouvilleForm, bc: BC | None, lam: float, k: float = 1.0) -> float:
    """Scaled Prufer phase at t = c: u = rho sin(theta), u' = k rho cos(theta)."""
    bc = form.bc if bc is None else _check_bc(bc)
    theta0 = _bc_angle(bc[0], bc[1], k)
    qt = form.qtilde
    sol = solve_ivp(_phase_rhs, (0.0, form.c), [theta0], args=(lam, k, qt.coef, qt.lo, qt.hi), **_ODE)
    if not sol.success:
        raise ConvergenceError(f"phase integration failed: {sol.message}")
    return float(sol.y[0, -1])


def _bracket(F, guess: float, width: float) -> tuple[float, float]:
    lo, hi = guess - width, guess + width
    step = width
    for _ in range(80):
        if F(lo) < 0:
            break
        lo -= step
        step *= 2.0
    else:
        raise ConvergenceError(f"no lower eigenvalue bracket below {guess}")
    step = width
    for _ in range(80):
        if F(hi) > 0:
            break
        hi += step
        step *= 2.0
    else:
        raise ConvergenceError(f"no upper eigenvalue bracket above {guess}")
    return lo, hi


def _refine(F, lo: float, hi: float, tol: float) -> float:
    return brentq(F, lo, hi, xtol=1e-14 * max(1.0, abs(lo), abs(hi)), rtol=max(1e-2 * tol, 9e-16),
                  maxiter=200)


def _modified_rhs(t, y, lam, coef, dcoef, lo, hi):
    Q = lam - K.clenshaw(t, coef, lo, hi)
    g = -K.clenshaw(t, dcoef, lo, hi) / (4.0 * Q)
    return [math.sqrt(Q) + g * math.sin(2.0 * y[0]), -g * math.cos(2.0 * y[0])]


def modified_terminal_phase(form: LiouvilleForm, bc: BC | None, lam: float) -> float:
    """Modified Prufer phase at t = c; needs lam > qtilde on [0, c]."""
    bc = form.bc if bc is None else _check_bc(bc)
    qt = form.qtilde
    dqt = qt.deriv(1)
    theta0 = _bc_angle(bc[0], bc[1], math.sqrt(lam - qt(0.0)))
    sol = solve_ivp(_modified_rhs, (0.0, form.c), [theta0, 0.0],
                    args=(lam, qt.coef, dqt.coef, qt.lo, qt.hi), **_ODE)
    if not sol.success:
        raise ConvergenceError(f"phase integration failed: {sol.message}")
    return float(sol.y[0, -1])


def prufer_eigenvalue(form: LiouvilleForm, bc: BC | None = None, n: int = 0,
                      tol: float = 1e-12) -> float:
    """Eigenvalue with index n (n interior zeros) by phase shooting.

    The scaled phase (u = rho sin, u' = k rho cos, k fixed from the
    asymptotic guess) is increasing in lambda and brackets the root; its
    target is theta_b + n pi with theta_b in (0, pi] from the right
    condition.  Inside the bracket the root is refined on the modified
    Prufer phase when lambda - qtilde > 0, which crosses its own target at
    the same lambda and is nearly linear in t, and on the scaled phase otherwise.
    """
    bc = form.bc if bc is None else _check_bc(bc)
    n = check_degree(n, "n", minimum=0)
    c = form.c
    pred = asymptotic_predictions(bc, c, n).sqrt_lambda_times_c
    qmean = form.qtilde_mean
    guess = (pred / c) ** 2 + qmean
    k = max(pred / c, 1.0)

    def target(scale):
        theta_b = _bc_angle(bc[2], bc[3], scale)
        return (theta_b if theta_b > 0 else math.pi) + n * math.pi

    target_k = target(k)

    def F(lam):
        return terminal_phase(form, bc, lam, k) - target_k

    width = max(math.pi ** 2 * (n + 1) / c ** 2, 1.0)
    lo, hi = _bracket(F, guess, width)
    qmax = float(np.max(form.qtilde(np.linspace(0.0, c, 257))))
    if lo > qmax + 1e-8 * max(1.0, abs(qmax)):
        qc = form.qtilde(c)

        def G(lam):
            return modified_terminal_phase(form, bc, lam) - target(math.sqrt(lam - qc))

        if G(lo) < 0 < G(hi):
            return _refine(G, lo, hi, tol)
    return _refine(F, lo, hi, tol)


def prufer_eigenvalue_direct(problem: SLProblem, n: int = 0, tol: float = 1e-12) -> float:
    """Eigenvalue by phase shooting in the original coordinate.

    phi = rho sin(theta), p phi' = k rho cos(theta) gives
    theta' = (k/p) cos^2 + ((lambda w - q)/k) sin^2.
    """
    n = check_degree(n, "n", minimum=0)
    a, b = problem.a, problem.b
    a1, a2, b1, b2 = problem.bc
    p, q, w = problem.p, problem.q, problem.w
    c = quad(lambda x: math.sqrt(float(w(x)) / float(p(x))), a, b, epsrel=1e-13)[0]
    pred = asymptotic_predictions(problem.bc, c, n).sqrt_lambda_times_c
    mid = 0.5 * (a + b)
    guess = (pred / c) ** 2
    k = math.sqrt(max(guess, 1.0) * float(p(mid)) * float(w(mid)))
    theta0 = _bc_angle(a1, a2 / float(p(a)), k)
    theta_b = _bc_angle(b1, b2 / float(p(b)), k)
    target = (theta_b if theta_b > 0 else math.pi) + n * math.pi

    def rhs(x, y, lam):
        s, co = math.sin(y[0]), math.cos(y[0])
        return [k / float(p(x)) * co * co + (lam * float(w(x)) - float(q(x))) / k * s * s]

    def F(lam):
        sol = solve_ivp(rhs, (a, b), [theta0], args=(lam,), **_ODE)
        return float(sol.y[0, -1]) - target

    width = max(math.pi ** 2 * (n + 1) / c ** 2, 1.0)
    return _refine(F, *_bracket(F, guess, width), tol)


def _gauss_legendre_nodes(lo: float, hi: float, panels: int, order: int = 12):
    z, wts = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mids[:, None] + half[:, None] * z[None, :]).ravel()
    weights = (half[:, None] * wts[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Normalized eigenpair; ``u`` lives on [0, c] and ``phi`` on [a, b]."""

    n: int | None
    lam: float
    form: LiouvilleForm
    _u: Callable
    _du: Callable
    method: str
    bc_residual: float
    _phase: Callable | None = None

    def u(self, t):
        return self._u(t)

    def du(self, t):
        return self._du(t)

    def phi(self, x):
        """Pullback u(t(x)) / (p(x) w(x))^(1/4), unit norm in L^2(w dx)."""
        return self._u(self.form.t_of_x(x)) / self.form.quarter_power(x)

    def phase(self, t: float) -> PhaseState | None:
        """Modified Prufer state of the normalized solution, if that system was used."""
        return None if self._phase is None else self._phase(float(t))


def eigenfunction(form: LiouvilleForm, bc: BC | None = None, lam: float = 0.0,
                  tol: float = 1e-11, n: int | None = None) -> EigenSolution:
    """Normalized eigenfunction for eigenvalue ``lam``.

    Uses the modified Prufer system u = R Q^(-1/4) sin(theta),
    u' = R Q^(1/4) cos(theta), Q = lam - qtilde, when Q > 0 on [0, c], and
    the second-order equation otherwise.  Sign convention: u(0) > 0, or
    u'(0) > 0 when u(0) = 0.
    """
    bc = form.bc if bc is None else _check_bc(bc)
    lam = check_real(lam, "lam")
    c, qt = form.c, form.qtilde
    dqt = qt.deriv(1)
    grid = np.linspace(0.0, c, 513)
    Qmin = float(np.min(lam - qt(grid)))
    a1, a2, b1, b2 = bc
    ode = dict(method="DOP853", rtol=tol, atol=tol * 1e-2, dense_output=True)
    if Qmin > 0:
        Q0 = lam - qt(0.0)
        theta0 = _bc_angle(a1, a2, math.sqrt(Q0))
        coef, dcoef, lo, hi = qt.coef, dqt.coef, qt.lo, qt.hi

        def rhs(t, y):
            Q = lam - K.clenshaw(t, coef, lo, hi)
            g = -K.clenshaw(t, dcoef, lo, hi) / (4.0 * Q)
            return [math.sqrt(Q) + g * math.sin(2.0 * y[0]), -g * math.cos(2.0 * y[0])]

        sol = solve_ivp(rhs, (0.0, c), [theta0, 0.0], **ode)
        method = "modified_prufer"

        def raw(t):
            th, lr = sol.sol(t)
            Q = lam - qt(t)
            amp = np.exp(lr)
            return amp * Q ** -0.25 * np.sin(th), amp * Q ** 0.25 * np.cos(th)
    else:
        coef, lo, hi = qt.coef, qt.lo, qt.hi
        u0, du0 = a2, -a1
        if u0 < 0 or (u0 == 0 and du0 < 0):
            u0, du0 = -u0, -du0

        def rhs(t, y):
            return [y[1], (K.clenshaw(t, coef, lo, hi) - lam) * y[0]]

        sol = solve_ivp(rhs, (0.0, c), [u0, du0], **ode)
        method = "direct"

        def raw(t):
            u, du = sol.sol(t)
            return u, du
    if not sol.success:
        raise ConvergenceError(f"eigenfunction integration failed: {sol.message}")
    freq = math.sqrt(max(abs(lam), 1.0)) * c / math.pi
    nodes, weights = _gauss_legendre_nodes(0.0, c, 16 + 2 * int(freq))
    uq, _ = raw(nodes)
    scale = 1.0 / math.sqrt(float(np.dot(weights, uq * uq)))
    amp = scale * float(np.max(np.abs(uq)))
    uc, duc = (scale * float(np.ravel(v)[0]) for v in raw(np.array([c])))
    big = math.sqrt(max(abs(lam - float(qt(c))), 1.0))
    residual = abs(b1 * uc + b2 * duc) / ((abs(b1) + abs(b2) * big) * amp)
    if residual > max(1e-6, 1e3 * tol):
        raise ConvergenceError(f"lambda={lam} is not an eigenvalue: boundary residual {residual:.3e}")

    phase = None
    if method == "modified_prufer":
        def phase(t):
            th, lr = sol.sol(t)
            return PhaseState(float(th), float(lr) + math.log(scale))

    def u(t):
        out = scale * raw(np.atleast_1d(np.asarray(t, dtype=float)))[0]
        return float(out[0]) if np.ndim(t) == 0 else out

    def du(t):
        out = scale * raw(np.atleast_1d(np.asarray(t, dtype=float)))[1]
        return float(out[0]) if np.ndim(t) == 0 else out

    return EigenSolution(n, lam, form, u, du, method, residual, phase)


def eigenpair(form: LiouvilleForm, n: int, tol: float = 1e-12) -> EigenSolution:
    """Eigenvalue with index n and its normalized eigenfunction."""
    lam = prufer_eigenvalue(form, None, n, tol)
    return eigenfunction(form, None, lam, n=n)


class GreensFunction:
    """G(x, y) = v1(min) v2(max) / W from solutions of (p v')' = q v.

    v1 satisfies the left condition and v2 the right one; W = p (v1' v2 - v1 v2')
    is evaluated at the midpoint.
    """

    def __init__(self, problem: SLProblem, tol: float = 1e-12):
        self.problem = problem
        p, q = problem.p, problem.q
        a, b = problem.a, problem.b
        a1, a2, b1, b2 = problem.bc

        def rhs(x, y):
            return [y[1] / float(p(x)), float(q(x)) * y[0]]

        ode = dict(method="DOP853", rtol=tol, atol=tol * 1e-3, dense_output=True)
        self._left = solve_ivp(rhs, (a, b), [a2, -a1 * float(p(a))], **ode)
        self._right = solve_ivp(rhs, (b, a), [b2, -b1 * float(p(b))], **ode)
        if not (self._left.success and self._right.success):
            raise ConvergenceError("Green's function integration failed")
        mid = 0.5 * (a + b)
        v1, f1 = self._left.sol(mid)
        v2, f2 = self._right.sol(mid)
        self.W = float(f1 * v2 - v1 * f2)
        scale = abs(f1 * v2) + abs(v1 * f2)
        if not abs(self.W) > 1e-9 * scale:
            raise ConvergenceError("zero is an eigenvalue: the Green's function does not exist")

    def wronskian(self, x):
        v1, f1 = self._left.sol(x)
        v2, f2 = self._right.sol(x)
        return f1 * v2 - v1 * f2

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        lo, hi = np.minimum(x, y), np.maximum(x, y)
        out = self._left.sol(np.ravel(lo))[0] * self._right.sol(np.ravel(hi))[0] / self.W
        out = out.reshape(np.shape(lo))
        return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=16)
def _green(problem: SLProblem, tol: float) -> GreensFunction:
    return GreensFunction(problem, tol)


def greens_function(problem: SLProblem, x, y, tol: float = 1e-12):
    """Green's function of the problem at (x, y); raises if zero is an eigenvalue."""
    for v in np.ravel(np.asarray([x, y], dtype=float)):
        if not problem.a <= v <= problem.b:
            raise DomainError(f"{v} lies outside [{problem.a}, {problem.b}]")
    return _green(problem, tol)(x, y)


class BilinearExpansion:
    """Eigenpairs of a problem, computed on demand, with truncated expansions."""

    def __init__(self, problem: SLProblem, tol: float = 1e-12):
        self.problem = problem
        self.tol = tol
        self.form = liouville_transform(problem, tol)
        self.green = _green(problem, tol)
        self.pairs: list[EigenSolution] = []

    def pair(self, n: int) -> EigenSolution:
        while len(self.pairs) <= n:
            self.pairs.append(eigenpair(self.form, len(self.pairs), self.tol))
        return self.pairs[n]

    def partial_sum(self, x, y, N: int):
        """sum_{n=0}^{N} phi_n(x) phi_n(y) / lambda_n (unit-norm eigenfunctions)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        terms = []
        for n in range(N + 1):
            e = self.pair(n)
            if e.lam == 0:
                raise ConvergenceError("zero eigenvalue in the expansion")
            terms.append(e.phi(x) * e.phi(y) / e.lam)
        return np.sum(np.array(terms), axis=0)

    def rescaled_error(self, x, y, N: int):
        out = N * (self.green(x, y) - self.partial_sum(x, y, N))
        return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=16)
def expansion(problem: SLProblem, tol: float = 1e-12) -> BilinearExpansion:
    """Cached expansion object for ``problem``."""
    return BilinearExpansion(problem, tol)


def sl_rescaled_error(problem: SLProblem, x, y, N: int, tol: float = 1e-12):
    """N (G(x,y) - sum_{n=0}^{N} phi_n(x) phi_n(y) / (lambda_n int phi_n^2 w))."""
    N = check_degree(N, "N", minimum=1)
    for v in np.ravel(np.asarray([x, y], dtype=float)):
        if not problem.a <= v <= problem.b:
            raise DomainError(f"{v} lies outside [{problem.a}, {problem.b}]")
    return expansion(problem, tol).rescaled_error(x, y, N)


def regular_limit(problem: SLProblem, x) -> float:
    """Limit of N times the diagonal tail at x for a regular problem.

    Interior: c / (pi^2 sqrt(p(x) w(x))) with c = int_a^b sqrt(w/p).  At an
    endpoint the value doubles when the condition there involves phi', and
    is 0 for a Dirichlet end.
    """
    x = check_real(x, "x")
    a, b = problem.a, problem.b
    if not a <= x <= b:
        raise DomainError(f"x={x} lies outside [{a}, {b}]")
    c = quad(lambda z: math.sqrt(float(problem.w(z)) / float(problem.p(z))), a, b, epsrel=1e-13)[0]
    base = c / (math.pi ** 2 * math.sqrt(float(problem.p(x)) * float(problem.w(x))))
    _, a2, _, b2 = problem.bc
    if x == a:
        return 2.0 * base if a2 != 0 else 0.0
    if x == b:
        return 2.0 * base if b2 != 0 else 0.0
    return base


def _base_full(case: str, s: float, t: float) -> float:
    lo, hi = min(s, t), max(s, t)
    if case == "DD":
        return lo - s * t
    if case == "DN":
        return lo
    if case == "NN":
        return 1.0 / 3.0 - hi + 0.5 * (s * s + t * t)
    return 1.0 - hi


def base_case_partial(case: str, s: float, t: float, N: int) -> float:
    """sum_{n=0}^{N} of the named trigonometric series (NN starts at n = 1)."""
    n = np.arange(0, N + 1, dtype=float)
    if case == "DD":
        nu, f = n + 1.0, np.sin
    elif case == "DN":
        nu, f = n + 0.5, np.sin
    elif case == "NN":
        nu, f = n[1:], np.cos
    elif case == "ND":
        nu, f = n + 0.5, np.cos
    else:
        raise ParameterError(f"case must be one of {sorted(CASES)}")
    terms = 2.0 * f(nu * math.pi * s) * f(nu * math.pi * t) / (nu * nu * math.pi ** 2)
    return math.fsum(terms)


def base_case_tail(case: str, s, t, N: int) -> float:
    """N times the tail beyond N of the trigonometric base-case series.

    DD: 2 sin((n+1) pi s) sin((n+1) pi t) / ((n+1)^2 pi^2), sum min(s,t) - s t.
    DN: 2 sin((n+1/2) pi s) sin((n+1/2) pi t) / ((n+1/2)^2 pi^2), sum min(s,t).
    NN: 2 cos(n pi s) cos(n pi t) / (n^2 pi^2), n >= 1, sum 1/3 - max(s,t) + (s^2+t^2)/2.
    ND: 2 cos((n+1/2) pi s) cos((n+1/2) pi t) / ((n+1/2)^2 pi^2), sum 1 - max(s,t).
    Each tail is the closed-form sum minus the compensated prefix.
    """
    s, t = check_real(s, "s"), check_real(t, "t")
    if not (0 <= s <= 1 and 0 <= t <= 1):
        raise DomainError("s and t must lie in [0, 1]")
    N = check_degree(N, "N", minimum=1)
    if case not in CASES:
        raise ParameterError(f"case must be one of {sorted(CASES)}")
    return N * (_base_full(case, s, t) - base_case_partial(case, s, t, N))
