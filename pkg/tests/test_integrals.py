"""Cross-check of the closed-form integration engine against adaptive
quadrature.  The engine is the production path; quadrature appears nowhere
outside these tests."""
import numpy as np
import pytest
from scipy import integrate

from robust_persuasion._integrals import (
    expected_weighted_indicator,
    indicator_curve_vs_x,
    indicator_curve_vs_y,
    mean_one_minus,
)
from robust_persuasion.core import DensityPiece, MixedThreshold

QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=400)


def _piece_fun(pc):
    return lambda z: pc.coef / (1.0 - z) ** pc.power


def _numeric_weighted_indicator(mx, my, x_pow):
    """Brute-force expectation: quadrature piece by piece, with the inner
    integration bound adapted to the indicator so every integrand is smooth."""
    total = 0.0
    for x0, wx in mx.atoms:
        ax = wx * (1.0 - x0) ** x_pow
        for y0, wy in my.atoms:
            if y0 >= x0:
                total += ax * wy * (1.0 - y0)
        for py in my.density_pieces:
            lo = max(py.lo, x0)
            if lo < py.hi:
                fy = _piece_fun(py)
                total += ax * integrate.quad(lambda y: fy(y) * (1.0 - y), lo, py.hi, **QUAD_OPTS)[0]
    for px in mx.density_pieces:
        fx = _piece_fun(px)
        for y0, wy in my.atoms:
            hi = min(px.hi, y0)
            if hi > px.lo:
                total += wy * (1.0 - y0) * integrate.quad(
                    lambda x: fx(x) * (1.0 - x) ** x_pow, px.lo, hi, **QUAD_OPTS
                )[0]
        for py in my.density_pieces:
            fy = _piece_fun(py)

            def outer(x):
                lo = max(x, py.lo)
                if lo >= py.hi:
                    return 0.0
                inner = integrate.quad(lambda y: fy(y) * (1.0 - y), lo, py.hi, **QUAD_OPTS)[0]
                return fx(x) * (1.0 - x) ** x_pow * inner

            split = sorted({px.lo, px.hi, min(max(py.lo, px.lo), px.hi), min(py.hi, px.hi)})
            for a, b in zip(split, split[1:]):
                if b > a:
                    total += integrate.quad(outer, a, b, **QUAD_OPTS)[0]
    return total


def _random_mixture(rng):
    pieces = []
    cursor = 0.0
    mass = 0.0
    for _ in range(rng.integers(1, 3)):
        lo = cursor + rng.uniform(0.0, 0.15)
        hi = lo + rng.uniform(0.05, 0.25)
        if hi >= 0.85:
            break
        power = int(rng.integers(1, 3))
        coef = rng.uniform(0.1, 0.8)
        pc = DensityPiece(lo, hi, coef, power)
        pieces.append(pc)
        mass += pc.mass
        cursor = hi
    atom_w = 1.0 - mass
    atoms = []
    if atom_w > 1e-9:
        split = rng.uniform(0.2, 0.8)
        atoms = [(rng.uniform(0.0, 0.95), atom_w * split), (rng.uniform(0.0, 0.95), atom_w * (1 - split))]
    return MixedThreshold(atoms=tuple(atoms), density_pieces=tuple(pieces))


@pytest.mark.parametrize("x_pow", [0, -1])
def test_engine_matches_quadrature(x_pow):
    rng = np.random.default_rng(42 + x_pow)
    for _ in range(12):
        mx = _random_mixture(rng)
        my = _random_mixture(rng)
        exact = expected_weighted_indicator(mx, my, x_pow)
        numeric = _numeric_weighted_indicator(mx, my, x_pow)
        assert exact == pytest.approx(numeric, abs=1e-9)


def test_mean_one_minus_matches_quadrature():
    rng = np.random.default_rng(7)
    for _ in range(8):
        m = _random_mixture(rng)
        numeric = sum(w * (1.0 - loc) for loc, w in m.atoms)
        for pc in m.density_pieces:
            fz = _piece_fun(pc)
            numeric += integrate.quad(lambda z: fz(z) * (1.0 - z), pc.lo, pc.hi, **QUAD_OPTS)[0]
        assert mean_one_minus(m) == pytest.approx(numeric, abs=1e-10)


@pytest.mark.parametrize("x_pow", [0, -1])
def test_point_curves_match_engine(x_pow):
    rng = np.random.default_rng(3)
    m = _random_mixture(rng)
    pts = np.linspace(0.0, 0.95, 40)
    from robust_persuasion.core import point_mass

    curve_x = indicator_curve_vs_x(pts, m, x_pow)
    curve_y = indicator_curve_vs_y(m, pts, x_pow)
    for i, t in enumerate(pts):
        assert curve_x[i] == pytest.approx(
            expected_weighted_indicator(point_mass(t), m, x_pow), abs=1e-12
        )
        assert curve_y[i] == pytest.approx(
            expected_weighted_indicator(m, point_mass(t), x_pow), abs=1e-12
        )
