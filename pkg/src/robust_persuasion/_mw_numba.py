"""Numba hot loops for multiplicative-weights self-play.

The structured threshold kernels make both matrix-vector products O(m) via
prefix/suffix sums, so the whole iteration is linear in the grid size.  The
pure-numpy twins live in ``matrix_game``; this module must stay importable
only when numba is present.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def mw_threshold_loop(kind, grid, eps, max_iters, check_every):
    """MW self-play on the discretized threshold game.

    kind 0: regret kernel, rows = maximizing x-player, cols = y.
    kind 1: ratio kernel, rows = maximizing y-player, cols = x.
    Returns (S_row, S_col, sum_row, sum_col, iterations).
    """
    m = grid.size
    one_m = 1.0 - grid
    inv_one_m = 1.0 / one_m
    ln_m = np.log(m)
    S_row = np.zeros(m)
    S_col = np.zeros(m)
    sum_row = np.zeros(m)
    sum_col = np.zeros(m)
    p = np.full(m, 1.0 / m)
    q = np.full(m, 1.0 / m)
    pay_row = np.empty(m)
    pay_col = np.empty(m)
    t = 0
    while t < max_iters:
        t += 1
        if kind == 0:
            # (A q)_i = (1 - x_i) - sum_{j >= i} q_j (1 - y_j)
            acc = 0.0
            for i in range(m - 1, -1, -1):
                acc += q[i] * one_m[i]
                pay_row[i] = one_m[i] - acc
            # (A^T p)_j = sum_i p_i (1 - x_i) - (1 - y_j) sum_{i <= j} p_i
            tot = 0.0
            for i in range(m):
                tot += p[i] * one_m[i]
            acc = 0.0
            for j in range(m):
                acc += p[j]
                pay_col[j] = tot - one_m[j] * acc
        else:
            # (M q)_i = (1 - y_i) sum_{j <= i} q_j / (1 - x_j)
            acc = 0.0
            for i in range(m):
                acc += q[i] * inv_one_m[i]
                pay_row[i] = one_m[i] * acc
            # (M^T p)_j = (1 / (1 - x_j)) sum_{i >= j} p_i (1 - y_i)
            acc = 0.0
            for j in range(m - 1, -1, -1):
                acc += p[j] * one_m[j]
                pay_col[j] = inv_one_m[j] * acc
        for i in range(m):
            S_row[i] += pay_row[i]
            S_col[i] += pay_col[i]
            sum_row[i] += p[i]
            sum_col[i] += q[i]
        if t % check_every == 0 or t == max_iters:
            gap = S_row.max() / t - S_col.min() / t
            if gap <= eps:
                break
        eta = np.sqrt(8.0 * ln_m / (t + 1.0))
        zr = eta * S_row
        zr -= zr.max()
        p = np.exp(zr)
        p /= p.sum()
        zc = -eta * S_col
        zc -= zc.max()
        q = np.exp(zc)
        q /= q.sum()
    return S_row, S_col, sum_row, sum_col, t
