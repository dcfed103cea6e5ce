import math

import numpy as np
import pytest

from greentail import kl
from greentail.errors import ParameterError
from greentail.kl import KLConfig


def direct_covariance(s, t, N, M=400000):
    n = np.arange(N + 1, M + 1) + 0.5
    terms = 2 * np.sin(n * math.pi * s) * np.sin(n * math.pi * t) / (n * math.pi) ** 2
    # beyond M the non-oscillating part of the diagonal is 1/(pi^2 M)
    rest = 1 / (math.pi ** 2 * M) if s == t and 0 < s < 1 else 0.0
    return N * (math.fsum(terms) + rest)


def test_exact_covariance_examples():
    assert kl.kl_covariance_exact(0.5, 0.5, 1024) == pytest.approx(1 / math.pi ** 2, rel=0.01)
    assert kl.kl_covariance_exact(1.0, 1.0, 1024) == pytest.approx(2 / math.pi ** 2, rel=0.01)
    assert abs(kl.kl_covariance_exact(0.25, 0.75, 1024)) <= 1e-3
    assert kl.kl_covariance_exact(0.0, 0.4, 10) == 0.0


@pytest.mark.parametrize("s,t", [(0.5, 0.5), (0.3, 0.8), (1.0, 0.6)])
def test_exact_covariance_matches_direct_summation(s, t):
    N = 64
    ref = direct_covariance(s, t, N)
    assert kl.kl_covariance_exact(s, t, N) == pytest.approx(ref, abs=1e-9)


def test_theoretical_variance():
    assert kl.theoretical_variance(0.0) == 0.0
    assert kl.theoretical_variance(0.4) == pytest.approx(1 / math.pi ** 2)
    assert kl.theoretical_variance(1.0) == pytest.approx(2 / math.pi ** 2)
    with pytest.raises(ParameterError):
        kl.theoretical_variance(1.5)


@pytest.mark.parametrize("kwargs", [
    dict(N=0), dict(N=10, M=10), dict(N=10, M=20), dict(N=10, t_grid=()), dict(N=10, t_grid=(0.5, 1.2)),
    dict(N=10, paths=1), dict(N=10, tail="exact"), dict(N=10, seed=-1), dict(N=10, block=0),
])
def test_config_validation(kwargs):
    with pytest.raises(ParameterError):
        KLConfig(**kwargs)


def test_config_defaults():
    cfg = KLConfig(N=8)
    assert cfg.M == 128 and cfg.seed == kl.DEFAULT_SEED and cfg.t_grid == (0.25, 0.5, 0.75, 1.0)


def test_path_normals_deterministic_and_prefix_stable():
    a = kl.path_normals(7, 3, 50)
    b = kl.path_normals(7, 3, 80)
    assert np.array_equal(a, b[:50])
    assert not np.array_equal(a, kl.path_normals(7, 4, 50))
    assert np.all(np.isfinite(kl.path_normals(1, 0, 100000)))


@pytest.fixture(scope="module")
def small_run():
    return kl.simulate_fluctuation(KLConfig(N=32, M=512, paths=4000, block=512,
                                            t_grid=(0.0, 0.2, 0.5, 0.9, 1.0)))


def test_simulated_moments_within_standard_errors(small_run):
    r = small_run
    inner = slice(1, None)
    assert np.all(np.abs(r.empirical_mean[inner]) <= 4 * r.mean_se[inner])
    diff = np.abs(r.empirical_cov - r.exact_cov)[inner, inner]
    assert np.all(diff <= 4 * r.cov_se[inner, inner])


def test_zero_time_is_deterministic(small_run):
    assert small_run.empirical_cov[0, 0] == 0.0
    assert small_run.empirical_mean[0] == 0.0


def test_simulated_covariance_is_psd(small_run):
    vals = np.linalg.eigvalsh(small_run.empirical_cov)
    assert vals.min() >= -1e-12
    assert np.array_equal(small_run.empirical_cov, small_run.empirical_cov.T)


def test_tail_covariance_is_psd_and_exact():
    cfg = KLConfig(N=16, M=64, t_grid=(0.3, 0.6, 1.0))
    C = kl.tail_covariance(cfg)
    assert np.linalg.eigvalsh(C).min() >= -1e-15
    assert C[1, 1] == pytest.approx(16 / 64 * direct_covariance(0.6, 0.6, 64), abs=1e-9)
    assert C[0, 2] == pytest.approx(16 / 64 * direct_covariance(0.3, 1.0, 64), abs=1e-9)


def test_same_seed_bit_identical_and_block_changes_only_rounding():
    cfg = KLConfig(N=16, M=128, paths=600, block=128)
    a = kl.simulate_fluctuation(cfg)
    b = kl.simulate_fluctuation(cfg)
    assert np.array_equal(a.empirical_cov, b.empirical_cov)
    assert np.array_equal(a.empirical_mean, b.empirical_mean)
    c = kl.simulate_fluctuation(KLConfig(N=16, M=128, paths=600, block=100))
    assert np.allclose(a.empirical_cov, c.empirical_cov, rtol=1e-12, atol=1e-15)


def test_dropping_the_tail_lowers_the_variance():
    cfg = dict(N=16, M=64, paths=3000, t_grid=(0.5,))
    with_tail = kl.simulate_fluctuation(KLConfig(**cfg))
    without = kl.simulate_fluctuation(KLConfig(tail="none", **cfg))
    gap = with_tail.exact_cov[0, 0] - without.empirical_cov[0, 0]
    assert gap == pytest.approx(with_tail.tail_variance[0], abs=4 * without.cov_se[0, 0])
