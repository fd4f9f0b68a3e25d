"""Regret minimization with monotone receiver utilities.

With the receiver's adoption utility known only to be nondecreasing in the
state, both the sender and the adversary effectively choose thresholds on
the real-valued state, and the interaction becomes a zero-sum game on
[0, 1 - alpha]^2 with kernel g(x, y) = (1 - x) - (1 - y) 1{y >= x}, where
alpha is the prior mass of the top state.  This module carries the analytic
value of that game, the optimal mixed strategies of both players, exact
expectations of g under mixed strategies, best-response searches, the
threshold-indexed adversarial utilities, and the binary-state reduction
used to certify that threshold schemes are best replies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _integrals
from .core import (
    DensityPiece,
    FiniteScheme,
    MixedThreshold,
    Prior,
    ReceiverUtility,
    point_mass,
    sender_utility,
)
from .standard import PiecewiseLinear, optimal_knapsack

__all__ = [
    "ThresholdGameSpec",
    "g_payoff",
    "reg_mon_value",
    "sender_opt",
    "adversary_opt",
    "expected_g",
    "expected_g_vs_x",
    "expected_g_vs_y",
    "best_response_x",
    "best_response_y",
    "adversary_utility_from_threshold",
    "regret_of_scheme",
    "binary_reduction_uprime",
]

_INV_E = 1.0 / math.e


@dataclass(frozen=True)
class ThresholdGameSpec:
    """The threshold game for top-state prior mass ``alpha``."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        object.__setattr__(self, "alpha", a)

    @property
    def interval(self) -> tuple[float, float]:
        return (0.0, 1.0 - self.alpha)

    @property
    def value(self) -> float:
        return reg_mon_value(self.alpha)


def g_payoff(x, y):
    """Regret kernel (1 - x) - (1 - y) 1{y >= x}; ties y == x count."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = (1.0 - x) - np.where(y >= x, 1.0 - y, 0.0)
    return float(out) if out.ndim == 0 else out


def reg_mon_value(mu_n: float) -> float:
    """Minimal worst-case regret under monotone utilities: 1/e when the top
    state's prior mass is at most 1/e, else -mu_n ln(mu_n)."""
    mu_n = float(mu_n)
    if not (0.0 < mu_n <= 1.0):
        raise ValueError("top-state mass must lie in (0, 1]")
    if mu_n <= _INV_E:
        return _INV_E
    return -mu_n * math.log(mu_n)


def sender_opt(alpha: float) -> MixedThreshold:
    """Optimal sender threshold distribution for the regret game.

    Density 1/(1-y) on [0, min(1-alpha, 1-1/e)]; for alpha above 1/e the
    remaining weight 1 + ln(alpha) sits as an atom on 1 - alpha.
    """
    alpha = _check_alpha(alpha)
    if alpha >= _INV_E:
        atom_w = 1.0 + math.log(alpha)
        atoms = ((1.0 - alpha, atom_w),) if atom_w > 1e-12 else ()
        return MixedThreshold(
            atoms=atoms,
            density_pieces=(DensityPiece(0.0, 1.0 - alpha, 1.0, 1),),
        )
    return MixedThreshold(density_pieces=(DensityPiece(0.0, 1.0 - _INV_E, 1.0, 1),))


def adversary_opt(alpha: float) -> MixedThreshold:
    """Optimal adversary threshold distribution for the regret game.

    Atom max(alpha, 1/e) on x = 0 plus density max(alpha, 1/e)/(1-x)^2 on
    [0, min(1-alpha, 1-1/e)]; the two case formulas coincide at alpha = 1/e.
    """
    alpha = _check_alpha(alpha)
    c = max(alpha, _INV_E)
    hi = 1.0 - c
    return MixedThreshold(
        atoms=((0.0, c),),
        density_pieces=(DensityPiece(0.0, hi, c, 2),),
    )


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    return alpha


def expected_g(strategy_x: MixedThreshold, strategy_y: MixedThreshold) -> float:
    """Exact E[g(x, y)] for independent mixed thresholds, by closed-form
    piecewise integration over the supported density forms and atoms."""
    return _integrals.mean_one_minus(strategy_x) - _integrals.expected_weighted_indicator(
        strategy_x, strategy_y, 0
    )


def expected_g_vs_x(xs, strategy_y: MixedThreshold) -> np.ndarray:
    """E_y[g(x, y)] for each pure adversary threshold x in ``xs``."""
    xs = np.asarray(xs, dtype=float)
    return (1.0 - xs) - _integrals.indicator_curve_vs_x(xs, strategy_y, 0)


def expected_g_vs_y(strategy_x: MixedThreshold, ys) -> np.ndarray:
    """E_x[g(x, y)] for each pure sender threshold y in ``ys``."""
    ys = np.asarray(ys, dtype=float)
    return _integrals.mean_one_minus(strategy_x) - _integrals.indicator_curve_vs_y(
        strategy_x, ys, 0
    )


def _golden_refine(fun, lo: float, hi: float, iters: int = 60) -> tuple[float, float]:
    """Golden-section maximization of a unimodal-ish bracket; returns the best
    point seen, which is all the grid refinement needs."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = fun(c), fun(d)
    best = max((fc, c), (fd, d))
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fun(d)
        best = max(best, (fc, c), (fd, d))
    return best[1], best[0]


def _grid_best(curve_fun, point_fun, grid: int, lo: float, hi: float, maximize: bool):
    if grid < 2:
        raise ValueError("grid must be at least 2")
    xs = np.linspace(lo, hi, grid)
    vals = curve_fun(xs)
    signed = vals if maximize else -vals
    k = int(np.argmax(signed))  # lowest index on ties
    # One local refinement pass over the bracketing cells.  The kernels are
    # piecewise smooth with a single jump along y = x, and the exact
    # closed-form evaluation means the jump only affects where the optimum
    # sits, not the values sampled.
    b_lo = xs[max(k - 1, 0)]
    b_hi = xs[min(k + 1, grid - 1)]
    fun = (lambda t: float(point_fun(np.asarray([t]))[0])) if maximize else (
        lambda t: -float(point_fun(np.asarray([t]))[0])
    )
    x_ref, v_ref = _golden_refine(fun, float(b_lo), float(b_hi))
    if v_ref > signed[k]:
        return float(x_ref), float(v_ref if maximize else -v_ref)
    return float(xs[k]), float(vals[k])


def best_response_x(strategy_y: MixedThreshold, grid: int, lo: float = 0.0, hi: float = 1.0):
    """Maximize E_y[g(x, y)] over a uniform grid on [lo, hi] plus one
    golden-section refinement; returns (argmax, value)."""
    curve = lambda xs: expected_g_vs_x(xs, strategy_y)
    return _grid_best(curve, curve, grid, lo, hi, maximize=True)


def best_response_y(strategy_x: MixedThreshold, grid: int, lo: float = 0.0, hi: float = 1.0):
    """Minimize E_x[g(x, y)] over a uniform grid on [lo, hi] plus one
    golden-section refinement; returns (argmin, value)."""
    curve = lambda ys: expected_g_vs_y(strategy_x, ys)
    return _grid_best(curve, curve, grid, lo, hi, maximize=False)


def adversary_utility_from_threshold(t: float, mu: Prior) -> ReceiverUtility:
    """Monotone utility whose optimal knapsack threshold is exactly ``t``:
    -mu_n on every state but the last, 1 - mu_n - t on the last."""
    t = float(t)
    mu_n = mu.top_mass
    if not (0.0 <= t <= 1.0 - mu_n + 1e-12):
        raise ValueError("threshold must lie in [0, 1 - mu_n]")
    utils = np.full(mu.n, -mu_n)
    utils[-1] = 1.0 - mu_n - t
    return ReceiverUtility(utils)


def regret_of_scheme(s: FiniteScheme | MixedThreshold, mu: Prior, u: ReceiverUtility) -> float:
    """Regret of a scheme at one utility: knapsack optimum minus the scheme's
    adoption probability.

    For a mixed threshold scheme the sender utility is E[(1 - y) 1{y >= x*}]
    with x* the knapsack threshold, computed in closed form.  That is the
    adopt-after-high accounting: the high signal adopts iff y >= x*, the low
    signal is counted as rejecting (exact whenever pooling any bottom prefix
    keeps the receiver's expectation negative, which holds for every
    adversarial utility used here).
    """
    sol = optimal_knapsack(mu, u)
    if isinstance(s, MixedThreshold):
        achieved = _integrals.indicator_curve_vs_x(
            np.asarray([sol.threshold_x]), s, 0
        )[0]
    else:
        achieved = sender_utility(s, u)
    return float(sol.optimal_utility - achieved)


def binary_reduction_uprime(mu_n: float) -> PiecewiseLinear:
    """Sender's expected adoption probability against the optimal threshold
    adversary, as a function of the binary-reduced posterior q = p(not-top).

    For mu_n >= 1/e this is 1 - q up to q = 1 - mu_n and 0 beyond; for
    mu_n < 1/e it is 1 up to 1 - mu_n e, then (1 - q)/(mu_n e) up to
    1 - mu_n, then 0.
    """
    mu_n = float(mu_n)
    if not (0.0 < mu_n < 1.0):
        raise ValueError("mu_n must lie in (0, 1)")
    mu0 = 1.0 - mu_n
    if mu_n >= _INV_E:
        xs = np.array([0.0, mu0, 1.0])
        left = np.array([1.0, mu_n, 0.0])
        right = np.array([1.0, 0.0, 0.0])
        return PiecewiseLinear(xs, left, right)
    knee = 1.0 - mu_n * math.e
    xs = np.array([0.0, knee, mu0, 1.0])
    left = np.array([1.0, 1.0, _INV_E, 0.0])
    right = np.array([1.0, 1.0, 0.0, 0.0])
    return PiecewiseLinear(xs, left, right)
