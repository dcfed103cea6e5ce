"""Desk-scale acceptance checks, one test per criterion, each reporting PASS or FAIL."""
import csv
import io
import math
import time

import numpy as np

from greentail import asymptotics as asy
from greentail import cli, kl, moments, slp
from greentail import tails as tl
from greentail.orthopoly import FamilyKind

H = FamilyKind.hermite()
LEG = FamilyKind.legendre()
T = FamilyKind.chebyshev_first()


def test_criterion_01_cd_finite_identity(report):
    rng = np.random.default_rng(101)
    boxes = [(LEG, (-0.95, 0.95)), (FamilyKind.jacobi(0.5, -0.3), (-0.95, 0.95)),
             (FamilyKind.laguerre(0.0), (0.05, 6.0)), (H, (-2.5, 2.5))]
    start = time.perf_counter()
    worst = 0.0
    for kind, box in boxes:
        for _ in range(20):
            x, y = rng.uniform(*box, size=2)
            worst = max(worst, tl.cd_partial_identity_check(kind, x, y, 25))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 1.0
    report(1, ok, f"max relative residual {worst:.2e} (<= 1e-10), {elapsed:.2f} s (< 1 s)")
    assert ok


def test_criterion_02_hermite_diagonal_limit(report):
    target = 1 / (math.sqrt(2) * math.pi)
    start = time.perf_counter()
    study = tl.convergence_study(H, 0.0, 0.0, 0.5, [1024, 2048, 4096])
    elapsed = time.perf_counter() - start
    extrap_err = abs(study.extrapolated - target) / target
    raw_err = abs(study.rows[-1][1] - target) / target
    ok = extrap_err <= 0.01 and raw_err <= 0.05 and elapsed < 30
    report(2, ok, f"extrapolated {study.extrapolated:.6f} ({extrap_err:.1e} rel), raw N=4096 "
                  f"{study.rows[-1][1]:.6f} ({raw_err:.1e} rel), {elapsed:.1f} s")
    assert ok


def test_criterion_03_legendre_diagonal_limit(report):
    target = 1 / (math.pi * math.sqrt(0.96))
    study = tl.convergence_study(LEG, 0.2, 0.2, 1.0, [1024, 2048, 4096])
    err = abs(study.extrapolated - target) / target
    ok = err <= 0.01
    report(3, ok, f"extrapolated {study.extrapolated:.6f} vs {target:.6f} ({err:.1e} rel)")
    assert ok


def test_criterion_04_chebyshev_exactness(report):
    rng = np.random.default_rng(404)
    worst = 0.0
    for N in (1, 10, 100, 1000, 10000):
        for _ in range(4):
            x, y = rng.uniform(-0.99, 0.99, size=2)
            M = N + 20000
            rec = tl.tail_direct(T, x, y, N, cutoff=M, method="direct", accelerate=False).value
            closed = tl.chebyshev_first_partial_closed(x, y, N, M)
            worst = max(worst, abs(rec - closed))
    full = tl.tail_direct(T, 0.4, -0.3, 50, 1e-9, method="direct")
    exact = tl.chebyshev_first_tail_exact(0.4, -0.3, 50)
    full_ok = abs(full.value - exact) <= full.remainder_bound
    diag = 4096 * tl.tail_direct(T, 0.3, 0.3, 4096).value
    ok = worst <= 1e-12 and full_ok and abs(diag - 0.5) <= 0.005
    report(4, ok, f"closed vs recurrence max diff {worst:.1e} (<= 1e-12) for N <= 1e4, full tail "
                  f"within remainder bound: {full_ok}, N=4096 rescaled diagonal {diag:.5f}")
    assert ok


def test_criterion_05_offdiagonal_cd_bound(report):
    Ns = [100 * 2 ** j for j in range(6)]
    details = []
    ok = True
    for kind, x, y, power in ((H, 0.0, 1.0, 1.0), (LEG, 0.3, -0.2, 2.0)):
        bound = tl.cd_tail_bound(kind, x, y, Ns[0], n_max=16 * Ns[-1])
        ok &= math.isfinite(bound.K) and bound.power == power
        for N in Ns:
            direct = tl.tail_direct(kind, x, y, N)
            cd = tl.tail_cd(kind, x, y, N, 1e-4)
            ok &= abs(direct.value) <= bound(N)
            ok &= abs(cd.value) + cd.remainder_bound <= bound(N)
        details.append(f"{kind.name} K={bound.K:.4g}/N^{power:g}")
    report(5, bool(ok), f"{', '.join(details)}; direct and cd tails within the bound for N=100..3200")
    assert ok


def test_criterion_06_exponential_weight_problem(report, tmp_path):
    start = time.perf_counter()
    form = slp.liouville_transform(slp.exponential_weight_problem())
    eig_err = max(abs(slp.prufer_eigenvalue(form, None, n) / ((1 + 4 * (n + 1) ** 2 * math.pi ** 2) / 4) - 1)
                  for n in range(21))
    target = tmp_path / "figure1.csv"
    code = cli.run(["figure1", "-o", str(target)])
    elapsed = time.perf_counter() - start
    rows = list(csv.DictReader(io.StringIO("".join(
        ln for ln in target.read_text().splitlines(True) if not ln.startswith("#")))))
    worst = 0.0
    for r in rows:
        x = float(r["x"])
        if 0.1 <= x <= 0.9:
            limit = math.exp(-3 * x) / math.pi ** 2
            worst = max(worst, abs(float(r["rescaled_error_N100"]) - limit) / limit)
    ok = code == 0 and eig_err <= 1e-8 and len(rows) == 512 and worst <= 0.1 and elapsed < 60
    report(6, ok, f"eigenvalue rel err {eig_err:.1e} (n<=20), figure1 sup rel dev {worst:.3f} "
                  f"(<= 0.1) over [0.1,0.9], {elapsed:.1f} s")
    assert ok


def test_criterion_07_dirichlet_neumann_bracket(report):
    inside = []
    for N in (10, 100, 1000, 10000, 100000):
        v = slp.base_case_tail("DN", 1.0, 1.0, N) * math.pi ** 2 / 2
        inside.append(N / (N + 1.5) <= v <= N / (N + 0.5))
    ok = all(inside)
    report(7, ok, f"bracket membership for N=10..1e5: {inside}")
    assert ok


def test_criterion_08_moment_suite(report):
    from scipy.special import eval_genlaguerre, eval_hermite, roots_genlaguerre, roots_hermite
    worst_cross = 0.0
    for n in range(31):
        y, w = roots_hermite(n + 8)
        ref = float(np.sum(w * eval_hermite(n, y / math.sqrt(2)) ** 2)) / math.sqrt(2)
        worst_cross = max(worst_cross, abs(moments.hermite_crossnorm(n) / ref - 1))
        for alpha in (-0.4, 0.0, 0.5, 2.0):
            u, w = roots_genlaguerre(n + 8, 2 * alpha + 1)
            ref = float(np.sum(w * eval_genlaguerre(n, alpha, u / 2) ** 2)) / 2 ** (2 * alpha + 2)
            worst_cross = max(worst_cross, abs(moments.laguerre_crossnorm(alpha, n) / ref - 1))
    kinds = [H, FamilyKind.laguerre(-0.4), FamilyKind.laguerre(0.0), FamilyKind.laguerre(1.3)]
    worst_res = max(moments.weighted_moment_residual(kind, k) for kind in kinds for k in range(7))
    m0 = moments.tail_moment_estimate(H, 0, 1024)
    m0_err = abs(m0 * math.sqrt(2 * math.pi) - 1)
    ok = worst_cross <= 1e-10 and worst_res <= 1e-9 and m0_err <= 0.02
    report(8, ok, f"cross-norm rel err {worst_cross:.1e}, recurrence residual {worst_res:.1e}, "
                  f"tail moment m_0 {m0:.6f} ({m0_err:.1e} rel)")
    assert ok


def test_criterion_09_karhunen_loeve(report):
    cov = kl.kl_covariance_exact(0.5, 0.5, 1024)
    cov_err = abs(cov * math.pi ** 2 - 1)
    cfg = kl.KLConfig(N=256, M=4096, paths=20000, t_grid=(0.25, 0.5, 0.75, 1.0))
    a = kl.simulate_fluctuation(cfg)
    b = kl.simulate_fluctuation(cfg)
    i = 1
    z = abs(a.empirical_cov[i, i] - a.exact_cov[i, i]) / a.cov_se[i, i]
    same = np.array_equal(a.empirical_cov, b.empirical_cov) and np.array_equal(a.empirical_mean, b.empirical_mean)
    ok = cov_err <= 0.01 and z <= 3 and same
    report(9, ok, f"exact cov {cov:.6f} ({cov_err:.1e} rel to 1/pi^2), simulated variance at t=0.5 "
                  f"{z:.2f} SE from exact, bit-reproducible: {same}")
    assert ok


# constants C in err(n) <= 1.25 C n^(-rate), measured at n = 200 and frozen
FROZEN_ASYMPTOTICS = [
    ("hermite", np.linspace(-1, 1, 201), 0.0, 0.0, 0.5, 0.2293),
    ("fejer", np.linspace(0.5, 2, 201), 0.0, 0.0, 0.5, 0.4270),
    ("fejer", np.linspace(0.5, 2, 201), 1.0, 0.0, 0.5, 1.2878),
    ("darboux", np.linspace(math.pi / 4, 3 * math.pi / 4, 201), 0.0, 0.0, 1.0, 0.2789),
    ("darboux", np.linspace(math.pi / 4, 3 * math.pi / 4, 201), 0.5, -0.3, 1.0, 0.2074),
    ("darboux", np.linspace(math.pi / 4, 3 * math.pi / 4, 201), -1.0, -1.0, 1.0, 0.3740),
]


def test_criterion_10_asymptotic_formulas(report):
    ok = True
    ratios = []
    for formula, pts, a, b, rate, C in FROZEN_ASYMPTOTICS:
        e200 = asy.asymptotic_error(formula, 200, pts, a, b)
        e400 = asy.asymptotic_error(formula, 400, pts, a, b)
        ok &= e400 <= 1.25 * e200 * 2.0 ** -rate
        ok &= e200 <= 1.25 * C * 200 ** -rate and e400 <= 1.25 * C * 400 ** -rate
        ratios.append(e400 / (e200 * 2.0 ** -rate))
    report(10, bool(ok), "err(400)/(err(200) 2^-rate) = " + ", ".join(f"{r:.3f}" for r in ratios) + " (<= 1.25)")
    assert ok


def test_criterion_11_cosine_tail(report):
    values = [tl.cosine_tail_general(a, b, th, 4096)
              for a, b in ((0.0, 0.0), (1.7, -0.3)) for th in (math.pi / 4, math.pi / 2, 2.0)]
    worst = max(abs(v - 1) for v in values)
    ok = worst <= 0.01
    report(11, ok, f"max |value - 1| = {worst:.2e} over 6 cases (<= 0.01)")
    assert ok
