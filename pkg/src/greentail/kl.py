"""Truncation fluctuations of the Karhunen-Loeve expansion of Brownian motion.

B_t = sum_{n>=0} xi_n sqrt(2) sin((n+1/2) pi t) / ((n+1/2) pi) with iid standard
normal xi_n, and F_t^N = sqrt(N) (B_t - first N+1 terms).  Its covariance is
N sum_{n>N} 2 sin((n+1/2) pi s) sin((n+1/2) pi t) / ((n+1/2)^2 pi^2), which is
computed exactly from sum_{n>=0} (...) = min(s, t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from ._validation import check_degree
from .errors import ParameterError
from .slp import base_case_tail

DEFAULT_SEED = 20240611


def kl_covariance_exact(s: float, t: float, N: int) -> float:
    """Covariance of F_s^N and F_t^N: min(s, t) minus the prefix, times N."""
    return base_case_tail("DN", s, t, N)


def theoretical_variance(t: float) -> float:
    """Limiting variance of F_t: 1/pi^2 inside (0, 1), 2/pi^2 at 1, 0 at 0."""
    t = float(t)
    if not 0 <= t <= 1:
        raise ParameterError("t must lie in [0, 1]")
    if t == 0:
        return 0.0
    return (2.0 if t == 1 else 1.0) / math.pi ** 2


@dataclass(frozen=True)
class KLConfig:
    """Simulation settings.

    Coefficients n = N+1..M are simulated explicitly.  With
    ``tail="gaussian"`` the remainder beyond M is added as a Gaussian vector
    with its exact covariance on the grid, so the simulated covariance
    equals the finite-N covariance; ``tail="none"`` drops it.
    ``block`` is the number of paths per reduction block.
    """

    N: int
    M: int | None = None
    t_grid: tuple = (0.25, 0.5, 0.75, 1.0)
    paths: int = 10000
    seed: int = DEFAULT_SEED
    tail: str = "gaussian"
    block: int = 1024

    def __post_init__(self):
        N = check_degree(self.N, "N", minimum=1)
        M = 16 * N if self.M is None else check_degree(self.M, "M", minimum=1)
        if M <= N:
            raise ParameterError("M must exceed N")
        if M < 4 * N:
            raise ParameterError("M must be at least 4 N")
        grid = tuple(float(v) for v in np.atleast_1d(self.t_grid))
        if not grid or any(not 0 <= v <= 1 for v in grid):
            raise ParameterError("t_grid must be a nonempty list of times in [0, 1]")
        if check_degree(self.paths, "paths", minimum=1) < 2:
            raise ParameterError("need at least two paths for moment estimates")
        if self.tail not in ("gaussian", "none"):
            raise ParameterError("tail must be 'gaussian' or 'none'")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "t_grid", grid)
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "block", check_degree(self.block, "block", minimum=1))


@dataclass
class FluctuationResult:
    """Empirical moments of F^N on the grid with standard errors.

    ``cov_se`` uses the Gaussian formula (s_i^2 s_j^2 + s_ij^2) / paths.
    ``tail_variance`` is the exact variance of the part beyond M.
    """

    t_grid: np.ndarray
    empirical_mean: np.ndarray
    empirical_cov: np.ndarray
    mean_se: np.ndarray
    cov_se: np.ndarray
    tail_variance: np.ndarray
    exact_cov: np.ndarray
    paths: int
    meta: dict = field(default_factory=dict)


def path_normals(seed: int, path: int, count: int) -> np.ndarray:
    """Standard normals for coefficient indices 0..count-1 of one path.

    A Philox stream keyed by the seed, with the path index in the counter,
    gives uniforms at positions = coefficient index; they are mapped to the
    open interval (0, 1) and through the normal quantile function.
    """
    bitgen = np.random.Philox(key=seed, counter=[0, 0, path, 0])
    u = np.random.Generator(bitgen).random(count)
    return ndtri(u + 2.0 ** -54)


def _merge(a, b):
    na, ma, Sa = a
    nb, mb, Sb = b
    n = na + nb
    d = mb - ma
    return n, ma + d * (nb / n), Sa + Sb + np.outer(d, d) * (na * nb / n)


def _tree_reduce(stats):
    while len(stats) > 1:
        nxt = [_merge(stats[i], stats[i + 1]) for i in range(0, len(stats) - 1, 2)]
        if len(stats) % 2:
            nxt.append(stats[-1])
        stats = nxt
    return stats[0]


def tail_covariance(cfg: KLConfig) -> np.ndarray:
    """Exact covariance on the grid of the part of F^N beyond M."""
    t = np.array(cfg.t_grid)
    G = t.size
    out = np.empty((G, G))
    for i in range(G):
        for j in range(i, G):
            v = cfg.N / cfg.M * base_case_tail("DN", t[i], t[j], cfg.M)
            out[i, j] = out[j, i] = v
    return out


def _tail_factor(C: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(C)
    L = vecs * np.sqrt(np.clip(vals, 0.0, None))
    L[np.diag(C) == 0.0] = 0.0
    return L


def simulate_fluctuation(cfg: KLConfig) -> FluctuationResult:
    """Monte-Carlo moments of F^N; bit-identical for a fixed configuration."""
    t = np.array(cfg.t_grid)
    n = np.arange(cfg.N + 1, cfg.M + 1, dtype=float) + 0.5
    basis = math.sqrt(2.0 * cfg.N) * np.sin(np.outer(n, t) * math.pi) / (n * math.pi)[:, None]
    basis[:, t == 0.0] = 0.0
    C_tail = tail_covariance(cfg)
    L = _tail_factor(C_tail) if cfg.tail == "gaussian" else None
    count = cfg.M + 1 + (t.size if L is not None else 0)
    stats = []
    for start in range(0, cfg.paths, cfg.block):
        stop = min(start + cfg.block, cfg.paths)
        xi = np.stack([path_normals(cfg.seed, p, count) for p in range(start, stop)])
        F = xi[:, cfg.N + 1:cfg.M + 1] @ basis
        if L is not None:
            F += xi[:, cfg.M + 1:] @ L.T
        mean = F.mean(axis=0)
        D = F - mean
        stats.append((float(stop - start), mean, D.T @ D))
    total, mean, S = _tree_reduce(stats)
    cov = S / (total - 1.0)
    cov = 0.5 * (cov + cov.T)
    var = np.diag(cov)
    exact = np.array([[kl_covariance_exact(a, b, cfg.N) for b in t] for a in t])
    return FluctuationResult(
        t_grid=t,
        empirical_mean=mean,
        empirical_cov=cov,
        mean_se=np.sqrt(var / total),
        cov_se=np.sqrt((np.outer(var, var) + cov * cov) / total),
        tail_variance=np.diag(C_tail).copy(),
        exact_cov=exact,
        paths=cfg.paths,
        meta={"N": cfg.N, "M": cfg.M, "seed": cfg.seed, "tail": cfg.tail, "block": cfg.block},
    )
