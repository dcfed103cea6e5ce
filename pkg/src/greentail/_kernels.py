"""Compiled loops over the orthonormal three-term recurrence.

Every family is written in Jacobi-matrix form

    x p_n = a_{n+1} p_{n+1} + b_n p_n + a_n p_{n-1},

with family codes 0 Hermite, 1 Laguerre, 2 Jacobi, 3 Chebyshev T,
4 Chebyshev U.  Loops take the state (p_{n0-1}, p_{n0}) at each point and
step it forward; running sums use Neumaier compensation.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

HERMITE, LAGUERRE, JACOBI, CHEB_T, CHEB_U = 0, 1, 2, 3, 4


@njit(cache=True)
def diag_coeff(code, al, be, n):
    if code == LAGUERRE:
        return 2.0 * n + al + 1.0
    if code == JACOBI:
        if n == 0:
            return (be - al) / (al + be + 2.0)
        s = 2.0 * n + al + be
        return (be * be - al * al) / (s * (s + 2.0))
    return 0.0


@njit(cache=True)
def off_coeff(code, al, be, n):
    if n <= 0:
        return 0.0
    if code == HERMITE:
        return math.sqrt(0.5 * n)
    if code == LAGUERRE:
        return -math.sqrt(n * (n + al))
    if code == JACOBI:
        if n == 1:
            ab2 = al + be + 2.0
            return math.sqrt(4.0 * (1.0 + al) * (1.0 + be) / (ab2 * ab2 * (ab2 + 1.0)))
        s = 2.0 * n + al + be
        num = 4.0 * n * (n + al) * (n + be) * (n + al + be)
        return math.sqrt(num / (s * s * (s - 1.0) * (s + 1.0)))
    if code == CHEB_T and n == 1:
        return math.sqrt(0.5)
    return 0.5


@njit(cache=True)
def eigenvalue(code, al, be, n):
    if code == HERMITE:
        return 2.0 * n
    if code == LAGUERRE:
        return 1.0 * n
    if code == JACOBI:
        return n * (n + al + be + 1.0)
    if code == CHEB_T:
        return 1.0 * n * n
    return n * (n + 2.0)


@njit(cache=True)
def _step(code, al, be, n, xs, prev, cur):
    """In place: (p_{n-1}, p_n) -> (p_n, p_{n+1})."""
    b_n = diag_coeff(code, al, be, n)
    a_n = off_coeff(code, al, be, n)
    inv = 1.0 / off_coeff(code, al, be, n + 1)
    for j in range(xs.shape[0]):
        nxt = ((xs[j] - b_n) * cur[j] - a_n * prev[j]) * inv
        prev[j] = cur[j]
        cur[j] = nxt


@njit(cache=True)
def advance(code, al, be, xs, n0, prev, cur, n1):
    """Return (p_{n1-1}, p_{n1}) given (p_{n0-1}, p_{n0}), n1 >= n0."""
    prev = prev.copy()
    cur = cur.copy()
    for n in range(n0, n1):
        _step(code, al, be, n, xs, prev, cur)
    return prev, cur


@njit(cache=True)
def table(code, al, be, xs, n0, prev, cur, n1):
    """Rows p_n(xs) for n = n0-1 .. n1."""
    out = np.empty((n1 - n0 + 2, xs.shape[0]))
    prev = prev.copy()
    cur = cur.copy()
    out[0] = prev
    out[1] = cur
    for n in range(n0, n1):
        _step(code, al, be, n, xs, prev, cur)
        out[n - n0 + 2] = cur
    return out


@njit(cache=True)
def diagonal_sums(code, al, be, x, y, n0, px, cx, py, cy, N, marks):
    """Partial sums of p_n(x) p_n(y) / lambda_n for n = N+1 .. marks[k].

    Returns (sums, next_terms) where next_terms[k] is the summand at
    marks[k] + 1, used for pair averaging.  marks must be increasing.
    """
    xs = np.array([x, y])
    prev = np.array([px, py])
    cur = np.array([cx, cy])
    prev, cur = advance(code, al, be, xs, n0, prev, cur, N)
    sums = np.zeros(marks.shape[0])
    nxt = np.zeros(marks.shape[0])
    s = 0.0
    comp = 0.0
    k = 0
    last = marks[marks.shape[0] - 1]
    for m in range(N, last + 1):
        _step(code, al, be, m, xs, prev, cur)
        term = cur[0] * cur[1] / eigenvalue(code, al, be, m + 1)
        while k < marks.shape[0] and marks[k] == m:
            sums[k] = s + comp
            nxt[k] = term
            k += 1
        t = s + term
        if abs(s) >= abs(term):
            comp += (s - t) + term
        else:
            comp += (term - t) + s
        s = t
    return sums, nxt


@njit(cache=True)
def cd_sums(code, al, be, x, y, n0, px, cx, py, cy, N, marks):
    """Partial sums of a_{n+1} D_{n+1}(x,y) (1/lambda_n - 1/lambda_{n+1}).

    D_{n+1}(x,y) = p_{n+1}(x) p_n(y) - p_n(x) p_{n+1}(y).  Sums run over
    n = N .. marks[k].  Also returns the boundary term a_{N+1} D_{N+1}/lambda_N.
    """
    xs = np.array([x, y])
    prev = np.array([px, py])
    cur = np.array([cx, cy])
    prev, cur = advance(code, al, be, xs, n0, prev, cur, N)
    sums = np.zeros(marks.shape[0])
    s = 0.0
    comp = 0.0
    k = 0
    boundary = 0.0
    last = marks[marks.shape[0] - 1]
    for n in range(N, last + 1):
        qx = cur[0]
        qy = cur[1]
        _step(code, al, be, n, xs, prev, cur)
        t_n = off_coeff(code, al, be, n + 1) * (cur[0] * qy - qx * cur[1])
        lam_n = eigenvalue(code, al, be, n)
        lam_next = eigenvalue(code, al, be, n + 1)
        if n == N:
            boundary = t_n / lam_n
        term = t_n * (1.0 / lam_n - 1.0 / lam_next)
        t = s + term
        if abs(s) >= abs(term):
            comp += (s - t) + term
        else:
            comp += (term - t) + s
        s = t
        while k < marks.shape[0] and marks[k] == n:
            sums[k] = s + comp
            k += 1
    return sums, boundary


@njit(cache=True)
def max_scaled_square(code, al, be, xs, n0, prev, cur, nlo, nhi, power):
    """max over nlo <= n <= nhi and points of p_n(z)^2 n^power / lambda_n."""
    prev, cur = advance(code, al, be, xs, n0, prev, cur, nlo)
    best = 0.0
    for n in range(nlo, nhi + 1):
        scale = n ** power / eigenvalue(code, al, be, n)
        for j in range(xs.shape[0]):
            v = cur[j] * cur[j] * scale
            if v > best:
                best = v
        if n < nhi:
            _step(code, al, be, n, xs, prev, cur)
    return best


@njit(cache=True)
def max_scaled_cd(code, al, be, xs, n0, prev, cur, nlo, nhi, power):
    """max of |a_{n+1}| max_z(p_n^2 + p_{n+1}^2) (1/lambda_n - 1/lambda_{n+1}) n^power."""
    prev, cur = advance(code, al, be, xs, n0, prev, cur, nlo)
    best = 0.0
    for n in range(nlo, nhi + 1):
        old = cur.copy()
        _step(code, al, be, n, xs, prev, cur)
        gap = 1.0 / eigenvalue(code, al, be, n) - 1.0 / eigenvalue(code, al, be, n + 1)
        scale = abs(off_coeff(code, al, be, n + 1)) * abs(gap) * n ** power
        for j in range(xs.shape[0]):
            v = (old[j] * old[j] + cur[j] * cur[j]) * scale
            if v > best:
                best = v
    return best


@njit(cache=True)
def max_abs_cd_ratio(code, al, be, x, y, n0, px, cx, py, cy, nlo, nhi):
    """max over nlo <= n <= nhi of |a_{n+1}| sqrt(E_n(x) E_n(y)), E_n = p_n^2 + p_{n+1}^2."""
    xs = np.array([x, y])
    prev = np.array([px, py])
    cur = np.array([cx, cy])
    prev, cur = advance(code, al, be, xs, n0, prev, cur, nlo)
    best = 0.0
    for n in range(nlo, nhi + 1):
        ox = cur[0]
        oy = cur[1]
        _step(code, al, be, n, xs, prev, cur)
        ex = ox * ox + cur[0] * cur[0]
        ey = oy * oy + cur[1] * cur[1]
        v = abs(off_coeff(code, al, be, n + 1)) * math.sqrt(ex * ey)
        if v > best:
            best = v
    return best


@njit(cache=True)
def weighted_square_sums(code, al, be, xs, weights, n0, prev, cur, n1):
    """I_n = sum_j weights_j p_n(xs_j)^2 for n = n0-1 .. n1."""
    out = np.empty(n1 - n0 + 2)
    prev = prev.copy()
    cur = cur.copy()
    out[0] = np.sum(weights * prev * prev)
    out[1] = np.sum(weights * cur * cur)
    for n in range(n0, n1):
        _step(code, al, be, n, xs, prev, cur)
        out[n - n0 + 2] = np.sum(weights * cur * cur)
    return out


@njit(cache=True)
def clenshaw(t, coef, lo, hi):
    """Chebyshev series sum_k coef[k] T_k(s) at s = (2t - lo - hi)/(hi - lo)."""
    s = (2.0 * t - lo - hi) / (hi - lo)
    b1 = 0.0
    b2 = 0.0
    for k in range(coef.shape[0] - 1, 0, -1):
        b1, b2 = 2.0 * s * b1 - b2 + coef[k], b1
    return s * b1 - b2 + coef[0]
