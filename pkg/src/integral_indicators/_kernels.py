"""Numba kernels for the rolling moment path.

Pair sums live in the upper triangle (diagonal included) of ``S``; ``C``
holds the matching compensation terms, so the represented value of a sum is
``S + C``. Every update adds and later subtracts the *same* double, which is
what lets the compensated sums cancel history exactly enough to stay close
to a from-scratch recomputation.
"""

import numba
import numpy as np


@numba.njit(inline="always")
def _two_sum(a, b):
    s = a + b
    bp = s - a
    return s, (a - (s - bp)) + (b - bp)


@numba.njit(cache=True)
def update_vector(s1, c1, d_new, d_old):
    for i in range(s1.shape[0]):
        s, e = _two_sum(s1[i], d_new[i])
        s, e2 = _two_sum(s, -d_old[i])
        s1[i] = s
        c1[i] += e + e2


@numba.njit(cache=True)
def update_diagonal(S, C, s1, c1, peak, d_new, d_old, k, floor, cond_tol):
    """Update diagonal pair sums; return True if a column lost its precision.

    Two ways to lose it: the window mean drifted far from the stored shift
    (centred moment a tiny fraction of the shifted one), or the window's
    second moment collapsed far below its peak since the last rebuild, so
    the rounding residue of the large terms that left is no longer small.
    """
    ill = False
    for i in range(S.shape[0]):
        s, e = _two_sum(S[i, i], d_new[i] * d_new[i])
        s, e2 = _two_sum(s, -(d_old[i] * d_old[i]))
        S[i, i] = s
        C[i, i] += e + e2
        q = s + C[i, i]
        if q > peak[i]:
            peak[i] = q
        m = s1[i] + c1[i]
        m2 = q - m * m / k
        if q > floor * (k - 1) and m2 < cond_tol * q:
            ill = True
        elif peak[i] > floor * (k - 1) and q < cond_tol * peak[i]:
            ill = True
    return ill


@numba.njit(cache=True)
def update_offdiagonal(S, C, d_new, d_old):
    n = S.shape[0]
    for i in range(n):
        a = d_new[i]
        b = d_old[i]
        for j in range(i + 1, n):
            s, e = _two_sum(S[i, j], a * d_new[j])
            s, e2 = _two_sum(s, -(b * d_old[j]))
            S[i, j] = s
            C[i, j] += e + e2


@numba.njit(inline="always")
def _pearson(sc, mk_i, m_j, w_i, w_j):
    v = (sc - mk_i * m_j) * w_i * w_j
    if v > 1.0:
        return 1.0
    if v < -1.0:
        return -1.0
    return v


@numba.njit(inline="always")
def _raw(sc, a_i, a_j, m_i, m_j, k, w_i, w_j):
    return (sc + a_j * m_i + a_i * m_j + k * a_i * a_j) * w_i * w_j


# Pearson: m = shifted column sums, w = 1/sqrt(centred M2) or 0 if inactive.
# Raw: shift = a, w = 1/sqrt(k-1) for every column.


@numba.njit(cache=True)
def diagonal(S, C, raw, m, shift, w, k):
    n = S.shape[0]
    out = np.empty(n)
    for i in range(n):
        if raw:
            out[i] = _raw(S[i, i] + C[i, i], shift[i], shift[i], m[i], m[i], k, w[i], w[i])
        else:
            out[i] = 1.0 if w[i] != 0.0 else 0.0
    return out


@numba.njit(cache=True)
def fill_matrix(S, C, raw, m, shift, w, k):
    n = S.shape[0]
    R = np.empty((n, n))
    dg = diagonal(S, C, raw, m, shift, w, k)
    mk = m / k
    for i in range(n):
        R[i, i] = dg[i]
        for j in range(i + 1, n):
            sc = S[i, j] + C[i, j]
            if raw:
                v = _raw(sc, shift[i], shift[j], m[i], m[j], k, w[i], w[j])
            else:
                v = _pearson(sc, mk[i], m[j], w[i], w[j])
            R[i, j] = v
            R[j, i] = v
    return R


@numba.njit(cache=True)
def row_sums(S, C, raw, m, shift, w, k, G):
    n = S.shape[0]
    dg = diagonal(S, C, raw, m, shift, w, k)
    mk = m / k
    for i in range(n):
        G[i] = abs(dg[i])
    if raw:
        for i in range(n):
            acc = 0.0
            for j in range(i + 1, n):
                r = abs(_raw(S[i, j] + C[i, j], shift[i], shift[j], m[i], m[j], k, w[i], w[j]))
                acc += r
                G[j] += r
            G[i] += acc
    else:
        for i in range(n):
            acc = 0.0
            for j in range(i + 1, n):
                r = abs(_pearson(S[i, j] + C[i, j], mk[i], m[j], w[i], w[j]))
                acc += r
                G[j] += r
            G[i] += acc


@numba.njit(cache=True)
def _fused_pearson(S, C, d_new, d_old, m, w, k, G):
    n = S.shape[0]
    mk = m / k
    for i in range(n):
        a = d_new[i]
        b = d_old[i]
        mk_i = mk[i]
        w_i = w[i]
        acc = 0.0
        for j in range(i + 1, n):
            s, e = _two_sum(S[i, j], a * d_new[j])
            s, e2 = _two_sum(s, -(b * d_old[j]))
            c = C[i, j] + (e + e2)
            S[i, j] = s
            C[i, j] = c
            r = abs(_pearson(s + c, mk_i, m[j], w_i, w[j]))
            acc += r
            G[j] += r
        G[i] += acc


@numba.njit(cache=True)
def _fused_raw(S, C, d_new, d_old, m, shift, w, k, G):
    n = S.shape[0]
    for i in range(n):
        a = d_new[i]
        b = d_old[i]
        acc = 0.0
        for j in range(i + 1, n):
            s, e = _two_sum(S[i, j], a * d_new[j])
            s, e2 = _two_sum(s, -(b * d_old[j]))
            c = C[i, j] + (e + e2)
            S[i, j] = s
            C[i, j] = c
            r = abs(_raw(s + c, shift[i], shift[j], m[i], m[j], k, w[i], w[j]))
            acc += r
            G[j] += r
        G[i] += acc


@numba.njit(cache=True)
def update_offdiagonal_row_sums(S, C, d_new, d_old, raw, m, shift, w, k, G):
    """Fused off-diagonal update and ``sum_j |r_ij|`` in one sweep."""
    dg = diagonal(S, C, raw, m, shift, w, k)
    for i in range(S.shape[0]):
        G[i] = abs(dg[i])
    if raw:
        _fused_raw(S, C, d_new, d_old, m, shift, w, k, G)
    else:
        _fused_pearson(S, C, d_new, d_old, m, w, k, G)
