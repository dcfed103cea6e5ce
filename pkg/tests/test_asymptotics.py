import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from greentail import _kernels as K
from greentail import asymptotics as asy
from greentail import orthopoly as op
from greentail.errors import DomainError, ParameterError
from greentail.orthopoly import FamilyKind


def test_hermite_leading_odd_degree_vanishes_at_zero():
    assert asy.hermite_leading(101, 0.0) == 0.0


def test_hermite_leading_matches_normalized_values():
    x = np.linspace(-1, 1, 41)
    ref = op.eval_normalized(FamilyKind.hermite(), 400, x)
    approx = asy.hermite_leading(400, x)
    amp = np.max(np.abs(ref))
    assert np.max(np.abs(ref - approx)) <= 0.02 * amp


def test_hermite_leading_raw_form_against_mpmath():
    # raw term exp(x^2/2) 2^n Gamma((n+1)/2) cos(x sqrt(2n) - n pi/2) / sqrt(pi)
    n, x = 60, 0.37
    raw = (mpmath.exp(x * x / 2) * mpmath.mpf(2) ** n * mpmath.gamma((n + 1) / 2)
           * mpmath.cos(x * mpmath.sqrt(2 * n) - n * mpmath.pi / 2) / mpmath.sqrt(mpmath.pi))
    norm = mpmath.sqrt(mpmath.sqrt(mpmath.pi) * mpmath.mpf(2) ** n * mpmath.factorial(n))
    assert asy.hermite_leading(n, x) == pytest.approx(float(raw / norm), rel=1e-12)


def test_fejer_formula_against_mpmath():
    alpha, n, x = 0.7, 50, 1.3
    ref = (mpmath.exp(x / 2) * mpmath.mpf(n) ** (alpha / 2 - 0.25) / mpmath.sqrt(mpmath.pi)
           * mpmath.mpf(x) ** (-alpha / 2 - 0.25)
           * mpmath.cos(2 * mpmath.sqrt(n * x) - alpha * mpmath.pi / 2 - mpmath.pi / 4))
    assert asy.fejer_laguerre(alpha, n, x) == pytest.approx(float(ref), rel=1e-12)


def test_darboux_amplitude_at_right_angle_legendre():
    # k(pi/2) = sin(pi/4)^(-1/2) cos(pi/4)^(-1/2) / sqrt(pi) = sqrt(2/pi)
    theta = math.pi / 2
    n = 8
    phase = (n + 0.5) * theta - math.pi / 4
    k = asy.darboux_jacobi(0.0, 0.0, n, theta) * math.sqrt(n) / math.cos(phase)
    assert k == pytest.approx(math.sqrt(2 / math.pi), rel=1e-13)


def test_darboux_close_to_legendre_values():
    theta = np.linspace(math.pi / 4, 3 * math.pi / 4, 31)
    exact = op.eval(FamilyKind.legendre(), 500, np.cos(theta))
    approx = asy.darboux_jacobi(0.0, 0.0, 500, theta)
    assert np.max(np.abs(exact - approx)) <= 5e-3 * math.sqrt(2 / (math.pi * 500))


@pytest.mark.parametrize("formula,points,alpha,beta,rate", [
    ("hermite", np.linspace(-1, 1, 201), 0.0, 0.0, 0.5),
    ("fejer", np.linspace(0.5, 2, 201), 0.0, 0.0, 0.5),
    ("fejer", np.linspace(0.5, 2, 201), 1.0, 0.0, 0.5),
    ("darboux", np.linspace(math.pi / 4, 3 * math.pi / 4, 201), 0.0, 0.0, 1.0),
    ("darboux", np.linspace(math.pi / 4, 3 * math.pi / 4, 201), 0.5, -0.3, 1.0),
])
def test_asymptotic_error_decreases_when_degree_doubles(formula, points, alpha, beta, rate):
    e1 = asy.asymptotic_error(formula, 200, points, alpha, beta)
    e2 = asy.asymptotic_error(formula, 400, points, alpha, beta)
    assert e2 <= 0.85 * e1
    assert e2 / (e1 * 2.0 ** -rate) == pytest.approx(1.0, abs=0.05)


def test_asymptotic_formula_domain_errors():
    with pytest.raises(DomainError):
        asy.fejer_laguerre(0.0, 10, 0.0)
    with pytest.raises(DomainError):
        asy.fejer_laguerre(-1.0, 10, 1.0)
    with pytest.raises(DomainError):
        asy.darboux_jacobi(0.0, 0.0, 10, 0.0)
    with pytest.raises(ParameterError):
        asy.asymptotic_error("bessel", 10, [0.1])


def test_log_gamma_reexported():
    assert asy.log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-14)


ENVELOPE_CASES = [
    (FamilyKind.hermite(), (-1.0, 1.5)),
    (FamilyKind.laguerre(0.5), (0.5, 3.0)),
    (FamilyKind.legendre(), (-0.8, 0.6)),
    (FamilyKind.jacobi(0.5, -0.3), (-0.7, 0.7)),
]


def _case_id(v):
    return v.label() if isinstance(v, FamilyKind) else ""


@pytest.mark.parametrize("kind,interval", ENVELOPE_CASES, ids=_case_id)
def test_diagonal_envelope_holds_at_random_probes(kind, interval):
    n0 = 64
    env = asy.envelope_bound(kind, interval, n0)
    rng = np.random.default_rng(7)
    ns = rng.integers(n0, 16 * n0 + 1, size=100)
    al, be = kind.kernel_parameters
    for n in ns:
        x = rng.uniform(*interval, size=100)
        y = op.eval_normalized(kind, int(n), x)
        lam = K.eigenvalue(kind.code, al, be, int(n))
        assert np.all(y * y / lam <= env.bound(n))


@pytest.mark.parametrize("kind,interval", ENVELOPE_CASES[:1] + ENVELOPE_CASES[2:],
                         ids=_case_id)
def test_cd_envelope_holds_at_random_probes(kind, interval):
    n0 = 64
    env = asy.envelope_bound(kind, interval, n0, term="cd")
    rng = np.random.default_rng(11)
    al, be = kind.kernel_parameters
    grid = np.linspace(*interval, 64)
    table = op.normalized_table(kind, 16 * n0 + 1, grid)
    for n in rng.integers(n0, 16 * n0, size=200):
        n = int(n)
        a = K.off_coeff(kind.code, al, be, n + 1)
        gap = 1 / K.eigenvalue(kind.code, al, be, n) - 1 / K.eigenvalue(kind.code, al, be, n + 1)
        majorant = a * np.max(table[n] ** 2 + table[n + 1] ** 2) * gap
        assert majorant <= env.bound(n)


def test_envelope_tail_integral_and_cutoff_roundtrip():
    env = asy.Envelope(2.0, 1.5, 10, (0.0, 1.0))
    M = env.cutoff_for(1e-3)
    assert env.tail_integral(M) == pytest.approx(1e-3, rel=1e-12)


def test_envelope_rejects_non_interior_interval():
    with pytest.raises(DomainError):
        asy.envelope_bound(FamilyKind.legendre(), (-1.0, 0.5), 32)
    with pytest.raises(ParameterError):
        asy.envelope_bound(FamilyKind.legendre(), (0.5, -0.5), 32)
    with pytest.raises(ParameterError):
        asy.envelope_bound(FamilyKind.legendre(), (-0.5, 0.5), 32, term="other")


@given(st.integers(min_value=1, max_value=300), st.floats(min_value=-1.0, max_value=1.0))
def test_hermite_leading_parity(n, x):
    assert asy.hermite_leading(n, -x) == pytest.approx((-1) ** n * asy.hermite_leading(n, x),
                                                       rel=1e-12, abs=1e-300)
