"""Closed-form expectations over mixed threshold strategies.

Every density piece has the form c / (1-z)**p with p in {1, 2}, so each
expectation the threshold games need reduces to antiderivatives of u**q and
u**q * ln(u) with u = 1 - z.  No quadrature anywhere; the adaptive-quadrature
cross-check lives in the test suite only.
"""
from __future__ import annotations

import math

import numpy as np

from .core import DensityPiece, MixedThreshold


def _ipow(q: int, lo, hi):
    """Integral of (1-z)**q dz over [lo, hi] (elementwise on arrays)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    a = 1.0 - hi  # lower u-limit
    b = 1.0 - lo
    if q == -1:
        return np.log(b) - np.log(a)
    r = q + 1
    return (b**r - a**r) / r


def _ilog(q: int, lo, hi):
    """Integral of (1-z)**q * ln(1-z) dz over [lo, hi]."""
    a = 1.0 - np.asarray(hi, dtype=float)
    b = 1.0 - np.asarray(lo, dtype=float)
    if q == -1:
        return (np.log(b) ** 2 - np.log(a) ** 2) / 2.0
    r = q + 1

    def anti(u):
        return u**r * (np.log(u) / r - 1.0 / (r * r))

    return anti(b) - anti(a)


def mean_one_minus(m: MixedThreshold) -> float:
    """E[1 - t] for t distributed as the mixed threshold."""
    total = sum(w * (1.0 - loc) for loc, w in m.atoms)
    for pc in m.density_pieces:
        total += pc.coef * _ipow(1 - pc.power, pc.lo, pc.hi)
    return float(total)


def _piece_pair(px: DensityPiece, py: DensityPiece, x_pow: int) -> float:
    """Integral of fx(x) (1-x)**x_pow * fy(y) (1-y) over {y >= x}."""
    total = 0.0
    qx = x_pow - px.power
    s = 1 - py.power  # weighted y-density exponent: (1-y) * fy ~ (1-y)**s
    # Region where the whole y-piece lies above x.
    a0, a1 = px.lo, min(px.hi, py.lo)
    if a1 > a0:
        total += py.coef * _ipow(s, py.lo, py.hi) * px.coef * _ipow(qx, a0, a1)
    # Region where the inner integral starts at x.
    b0, b1 = max(px.lo, py.lo), min(px.hi, py.hi)
    if b1 > b0:
        if s == 0:
            # inner = cy * (py.hi - x) = cy * ((py.hi - 1) + (1 - x))
            total += px.coef * py.coef * (
                (py.hi - 1.0) * _ipow(qx, b0, b1) + _ipow(qx + 1, b0, b1)
            )
        else:
            # inner = cy * (ln(1-x) - ln(1-py.hi))
            total += px.coef * py.coef * (
                _ilog(qx, b0, b1) - math.log(1.0 - py.hi) * _ipow(qx, b0, b1)
            )
    return float(total)


def expected_weighted_indicator(mx: MixedThreshold, my: MixedThreshold, x_pow: int) -> float:
    """E[(1-x)**x_pow * (1-y) * 1{y >= x}] for independent x ~ mx, y ~ my.

    x_pow = 0 gives the term needed by the regret kernel, x_pow = -1 the
    whole approximation kernel.  Ties y == x count (sender-favorable rule).
    """
    total = 0.0
    for x0, wx in mx.atoms:
        ax = wx * (1.0 - x0) ** x_pow
        for y0, wy in my.atoms:
            if y0 >= x0:
                total += ax * wy * (1.0 - y0)
        for py in my.density_pieces:
            lo = max(py.lo, x0)
            if lo < py.hi:
                total += ax * py.coef * _ipow(1 - py.power, lo, py.hi)
    for px in mx.density_pieces:
        qx = x_pow - px.power
        for y0, wy in my.atoms:
            hi = min(px.hi, y0)
            if hi > px.lo:
                total += wy * (1.0 - y0) * px.coef * _ipow(qx, px.lo, hi)
        for py in my.density_pieces:
            total += _piece_pair(px, py, x_pow)
    return float(total)


def indicator_curve_vs_x(xs: np.ndarray, my: MixedThreshold, x_pow: int) -> np.ndarray:
    """(1-x)**x_pow * E_y[(1-y) 1{y >= x}] for each pure x in ``xs``."""
    xs = np.asarray(xs, dtype=float)
    inner = np.zeros_like(xs)
    for y0, wy in my.atoms:
        inner += wy * (1.0 - y0) * (y0 >= xs)
    for pc in my.density_pieces:
        lo = np.clip(xs, pc.lo, pc.hi)
        inner += pc.coef * _ipow(1 - pc.power, lo, pc.hi)
    if x_pow == 0:
        return inner
    return inner * (1.0 - xs) ** x_pow


def indicator_curve_vs_y(mx: MixedThreshold, ys: np.ndarray, x_pow: int) -> np.ndarray:
    """(1-y) * E_x[(1-x)**x_pow 1{x <= y}] for each pure y in ``ys``."""
    ys = np.asarray(ys, dtype=float)
    inner = np.zeros_like(ys)
    for x0, wx in mx.atoms:
        inner += wx * (1.0 - x0) ** x_pow * (x0 <= ys)
    for pc in mx.density_pieces:
        hi = np.clip(ys, pc.lo, pc.hi)
        inner += pc.coef * _ipow(x_pow - pc.power, pc.lo, hi)
    return inner * (1.0 - ys)
