"""Optimal persuasion with a known receiver utility.

Two classic tools: the greedy fractional knapsack over states sorted by
adoption utility, which yields the optimal threshold scheme, and the
concavification of a piecewise-linear posterior-indexed utility, evaluated
at the prior.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    FiniteScheme,
    Prior,
    ReceiverUtility,
    StateOrdering,
    ThresholdScheme,
    threshold_to_finite,
)

__all__ = [
    "KnapsackSolution",
    "PiecewiseLinear",
    "optimal_knapsack",
    "optimal_scheme",
    "concavify_at",
]

_HULL_TOL = 1e-12


@dataclass(frozen=True)
class KnapsackSolution:
    """Greedy knapsack outcome: pooled top mass 1 - threshold_x adopts."""

    threshold_x: float
    ordering: StateOrdering  # descending adoption utility, stable in index
    optimal_utility: float   # == 1 - threshold_x


def optimal_knapsack(mu: Prior, u: ReceiverUtility) -> KnapsackSolution:
    """Pool the maximal prefix of states (sorted by descending utility,
    fractional at the margin) keeping the pooled expectation nonnegative.

    Applies to any binary-action instance; multidimensional utilities enter
    flattened.  An exactly zero marginal expectation includes the marginal
    mass (ties go to the sender).  If even the top state has negative
    utility the pool is empty and the optimal utility is 0.
    """
    if mu.n != u.n:
        raise ValueError("prior and utility dimensions differ")
    ordering = StateOrdering.by_utility(mu, u, descending=True)
    masses = mu.probs[ordering.order]
    utils = u.adopt_utils[ordering.order]
    pooled = 0.0
    expectation = 0.0
    for m, v in zip(masses, utils):
        if v >= 0.0:
            pooled += m
            expectation += m * v
            continue
        frac = min(1.0, expectation / (-v * m))
        pooled += frac * m
        if frac < 1.0:
            break
        expectation += m * v
    pooled = min(pooled, 1.0)
    return KnapsackSolution(
        threshold_x=1.0 - pooled,
        ordering=ordering,
        optimal_utility=pooled,
    )


def optimal_scheme(mu: Prior, u: ReceiverUtility) -> FiniteScheme:
    """The optimal threshold scheme as a two-atom posterior distribution.

    When the knapsack stops at a fractional state the high posterior leaves
    the receiver exactly indifferent, so evaluating its adoption in floats
    belongs behind a small tie epsilon (e.g. ``sender_utility(s, u, 1e-9)``).
    """
    sol = optimal_knapsack(mu, u)
    ascending = StateOrdering.from_prior(mu, sol.ordering.order[::-1])
    return threshold_to_finite(ThresholdScheme(sol.threshold_x, ascending), mu)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear function on [0, 1] with jump discontinuities.

    ``xs`` are the sorted breakpoints covering [0, 1]; between consecutive
    breakpoints the function interpolates right_values[k] -> left_values[k+1].
    Evaluation at a breakpoint returns the larger one-sided limit (the
    upper-semicontinuous convention, which is what concavification sees).
    """

    xs: np.ndarray
    left_values: np.ndarray
    right_values: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        lv = np.asarray(self.left_values, dtype=float)
        rv = np.asarray(self.right_values, dtype=float)
        if xs.ndim != 1 or xs.size < 2:
            raise ValueError("need at least the two endpoint breakpoints")
        if np.any(np.diff(xs) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if abs(xs[0]) > _HULL_TOL or abs(xs[-1] - 1.0) > _HULL_TOL:
            raise ValueError("breakpoints must cover [0, 1]")
        if lv.shape != xs.shape or rv.shape != xs.shape:
            raise ValueError("one left and one right value per breakpoint")
        for arr, name in ((xs, "xs"), (lv, "left_values"), (rv, "right_values")):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "xs", xs.copy())
        object.__setattr__(self, "left_values", lv.copy())
        object.__setattr__(self, "right_values", rv.copy())

    def __call__(self, q: float | np.ndarray):
        q = np.asarray(q, dtype=float)
        scalar = q.ndim == 0
        q = np.atleast_1d(q)
        out = np.empty_like(q)
        for i, qi in enumerate(q):
            k = int(np.searchsorted(self.xs, qi, side="left"))
            k = min(k, self.xs.size - 1)
            if abs(qi - self.xs[k]) <= _HULL_TOL:
                out[i] = max(self.left_values[k], self.right_values[k])
            else:
                # qi strictly between xs[k-1] and xs[k]
                x0, x1 = self.xs[k - 1], self.xs[k]
                y0, y1 = self.right_values[k - 1], self.left_values[k]
                out[i] = y0 + (y1 - y0) * (qi - x0) / (x1 - x0)
        return float(out[0]) if scalar else out


def _upper_hull(points: np.ndarray) -> np.ndarray:
    """Upper convex hull by monotone chain; collinear points are dropped."""
    # Keep only the highest value per x.
    order = np.lexsort((-points[:, 1], points[:, 0]))
    pts = []
    for i in order:
        if pts and abs(points[i, 0] - pts[-1][0]) <= _HULL_TOL:
            continue
        pts.append((points[i, 0], points[i, 1]))
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])
            if cross >= -_HULL_TOL:  # b on or below chord a-p: not a strict peak
                hull.pop()
            else:
                break
        hull.append(p)
    return np.asarray(hull)


def concavify_at(f: PiecewiseLinear, q0: float) -> tuple[float, tuple[float, float]]:
    """Value of the least concave majorant of ``f`` at ``q0`` plus the chord.

    Returns (value, (a, b)) where [a, b] is the hull edge whose chord attains
    the value; a == b when q0 sits exactly on a hull vertex (in particular
    whenever f is concave and q0 is one of its breakpoints).
    """
    q0 = float(q0)
    if not (0.0 <= q0 <= 1.0):
        raise ValueError("q0 must lie in [0, 1]")
    pts = np.concatenate(
        [
            np.column_stack([f.xs, f.left_values]),
            np.column_stack([f.xs, f.right_values]),
        ]
    )
    hull = _upper_hull(pts)
    k = int(np.searchsorted(hull[:, 0], q0, side="left"))
    k = min(k, hull.shape[0] - 1)
    if abs(hull[k, 0] - q0) <= _HULL_TOL:
        return float(hull[k, 1]), (q0, q0)
    x0, y0 = hull[k - 1]
    x1, y1 = hull[k]
    value = y0 + (y1 - y0) * (q0 - x0) / (x1 - x0)
    return float(value), (float(x0), float(x1))
