"""Adversarial approximation with monotone receiver utilities.

The multiplicative analogue of the regret game: both players pick thresholds
and the payoff is h(x, y) = (1 - y) 1{y >= x} / (1 - x), the ratio of the
sender's threshold-scheme utility to the knowledgeable-sender optimum.  The
value is beta(alpha) = 1 / (1 + ln(1/alpha)), so no constant fraction of the
optimum can be guaranteed as the top state's prior mass vanishes.
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
    sender_utility,
)
from .standard import PiecewiseLinear, optimal_knapsack

__all__ = [
    "ApproxGameSpec",
    "h_payoff",
    "apr_mon_value",
    "approx_sender_opt",
    "approx_adversary_opt",
    "expected_h",
    "expected_h_vs_x",
    "expected_h_vs_y",
    "approx_of_scheme",
    "check_reg_apr",
    "ratio_reduction_uprime",
]


@dataclass(frozen=True)
class ApproxGameSpec:
    """The ratio game for top-state prior mass ``alpha``."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        object.__setattr__(self, "alpha", a)

    @property
    def beta(self) -> float:
        return apr_mon_value(self.alpha)

    @property
    def interval(self) -> tuple[float, float]:
        return (0.0, 1.0 - self.alpha)


def h_payoff(x, y):
    """Ratio kernel (1 - y) 1{y >= x} / (1 - x); x = 1 is rejected since the
    adversary's threshold never exceeds 1 - alpha."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x >= 1.0):
        raise ValueError("x must lie in [0, 1)")
    out = np.where(y >= x, (1.0 - y) / (1.0 - x), 0.0)
    return float(out) if out.ndim == 0 else out


def apr_mon_value(mu_n: float) -> float:
    """Best guaranteed approximation ratio: 1 / (1 + ln(1/mu_n))."""
    mu_n = float(mu_n)
    if not (0.0 < mu_n <= 1.0):
        raise ValueError("top-state mass must lie in (0, 1]")
    return 1.0 / (1.0 - math.log(mu_n))


def approx_sender_opt(alpha: float) -> MixedThreshold:
    """Sender optimum: atom beta on y = 1 - alpha plus density beta/(1-y)."""
    alpha, beta = _alpha_beta(alpha)
    return MixedThreshold(
        atoms=((1.0 - alpha, beta),),
        density_pieces=(DensityPiece(0.0, 1.0 - alpha, beta, 1),),
    )


def approx_adversary_opt(alpha: float) -> MixedThreshold:
    """Adversary optimum: atom beta on x = 0 plus density beta/(1-x)."""
    alpha, beta = _alpha_beta(alpha)
    return MixedThreshold(
        atoms=((0.0, beta),),
        density_pieces=(DensityPiece(0.0, 1.0 - alpha, beta, 1),),
    )


def _alpha_beta(alpha: float) -> tuple[float, float]:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    return alpha, apr_mon_value(alpha)


def expected_h(strategy_x: MixedThreshold, strategy_y: MixedThreshold) -> float:
    """Exact E[h(x, y)] by closed-form piecewise integration."""
    return _integrals.expected_weighted_indicator(strategy_x, strategy_y, -1)


def expected_h_vs_x(xs, strategy_y: MixedThreshold) -> np.ndarray:
    """E_y[h(x, y)] for each pure x."""
    return _integrals.indicator_curve_vs_x(np.asarray(xs, dtype=float), strategy_y, -1)


def expected_h_vs_y(strategy_x: MixedThreshold, ys) -> np.ndarray:
    """E_x[h(x, y)] for each pure y."""
    return _integrals.indicator_curve_vs_y(strategy_x, np.asarray(ys, dtype=float), -1)


def approx_of_scheme(s: FiniteScheme | MixedThreshold, mu: Prior, u: ReceiverUtility) -> float:
    """Ratio of the scheme's utility to the knapsack optimum, with the 0/0
    case defined as 1 (nothing is lost when even the knowledgeable sender
    earns nothing)."""
    sol = optimal_knapsack(mu, u)
    if sol.optimal_utility <= 0.0:
        return 1.0
    if isinstance(s, MixedThreshold):
        achieved = _integrals.indicator_curve_vs_x(np.asarray([sol.threshold_x]), s, 0)[0]
    else:
        achieved = sender_utility(s, u)
    return float(achieved / sol.optimal_utility)


def check_reg_apr(reg: float, apr: float, tol: float = 1e-9) -> bool:
    """The link between the two robustness measures: Apr <= 1/Reg - 1.

    Vacuously true at reg == 0 (the bound is infinite)."""
    reg = float(reg)
    apr = float(apr)
    if reg < 0.0 or reg > 1.0 or apr < -tol or apr > 1.0 + tol:
        raise ValueError("reg must lie in [0, 1] and apr in [0, 1]")
    if reg == 0.0:
        return True
    return apr <= 1.0 / reg - 1.0 + tol


def ratio_reduction_uprime(mu_n: float) -> PiecewiseLinear:
    """Sender's expected ratio against the optimal threshold adversary as a
    function of the binary-reduced posterior: beta (1 - q) / mu_n on
    [0, 1 - mu_n], then 0."""
    mu_n = float(mu_n)
    if not (0.0 < mu_n < 1.0):
        raise ValueError("mu_n must lie in (0, 1)")
    beta = apr_mon_value(mu_n)
    mu0 = 1.0 - mu_n
    xs = np.array([0.0, mu0, 1.0])
    left = np.array([beta / mu_n, beta, 0.0])
    right = np.array([beta / mu_n, 0.0, 0.0])
    return PiecewiseLinear(xs, left, right)
