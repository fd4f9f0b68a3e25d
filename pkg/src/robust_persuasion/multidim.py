"""Multidimensional monotone utilities over attribute grids.

States are points of a k-dimensional quality grid and adoption utility is
monotone in every coordinate.  For product priors, revealing whether every
attribute's continuous value lies in the top half of its marginal (the
median knapsack scheme) caps the regret at 1 - 2^{-k}; for general priors
the anti-diagonal embedding imports the arbitrary-utility lower bound.

The continuous-cube convention mirrors the single-dimensional real-valued
state: each level owns the half-open box of its marginals' cumulative
segments, and the median cut splits a straddling level fractionally, so the
high signal fires with probability exactly 2^{-k} under any product prior.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .core import FiniteScheme, Prior, ReceiverUtility, sender_utility
from .standard import optimal_knapsack

__all__ = [
    "GridInstance",
    "KnapsackRegion",
    "is_monotone_grid",
    "median_knapsack_scheme",
    "md_regret_bound_check",
    "antidiagonal_embedding",
    "lift_antidiagonal_utility",
    "sample_monotone_utility",
    "grid_instance_to_dict",
    "grid_instance_from_dict",
]

_MONOTONE_TOL = 1e-12


def is_monotone_grid(utility: np.ndarray, tol: float = _MONOTONE_TOL) -> bool:
    """Monotone w.r.t. Pareto dominance iff nondecreasing along every axis."""
    u = np.asarray(utility, dtype=float)
    return all(bool(np.all(np.diff(u, axis=ax) >= -tol)) for ax in range(u.ndim))


@dataclass(frozen=True)
class GridInstance:
    """A persuasion instance on a quality grid.

    Exactly one of ``marginals`` (product prior) and ``joint`` must be given.
    ``utility`` may be deferred (None) for prior-only constructions; when
    present it must be monotone in every dimension.
    """

    dims: tuple[int, ...]
    marginals: tuple[np.ndarray, ...] | None = None
    joint: np.ndarray | None = None
    utility: np.ndarray | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError("every dimension needs at least one level")
        object.__setattr__(self, "dims", dims)
        if (self.marginals is None) == (self.joint is None):
            raise ValueError("exactly one of marginals and joint is required")
        if self.marginals is not None:
            margs = tuple(np.asarray(m, dtype=float) for m in self.marginals)
            if len(margs) != len(dims) or any(m.shape != (d,) for m, d in zip(margs, dims)):
                raise ValueError("one marginal per dimension, matching its size")
            for m in margs:
                Prior(m)  # positivity and normalization
            object.__setattr__(self, "marginals", margs)
        else:
            joint = np.asarray(self.joint, dtype=float)
            if joint.shape != dims:
                raise ValueError("joint prior shape must equal dims")
            Prior(joint.ravel())
            object.__setattr__(self, "joint", joint)
        if self.utility is not None:
            u = np.asarray(self.utility, dtype=float)
            if u.shape != dims:
                raise ValueError("utility shape must equal dims")
            if not np.all(np.isfinite(u)):
                raise ValueError("utility entries must be finite")
            if not is_monotone_grid(u):
                raise ValueError("utility must be monotone in every dimension")
            object.__setattr__(self, "utility", u)

    @property
    def k(self) -> int:
        return len(self.dims)

    @property
    def is_product(self) -> bool:
        return self.marginals is not None

    def joint_probs(self) -> np.ndarray:
        if self.joint is not None:
            return self.joint
        return reduce(np.multiply.outer, self.marginals)

    def flatten(self) -> tuple[Prior, ReceiverUtility]:
        """Row-major flattening into an ordinary finite-state instance."""
        if self.utility is None:
            raise ValueError("instance has no utility to flatten")
        return Prior(self.joint_probs().ravel()), ReceiverUtility(self.utility.ravel())


@dataclass(frozen=True)
class KnapsackRegion:
    """Upward-closed box in cumulative-mass coordinates: the region contains
    every continuous state whose coordinate exceeds the per-dimension cut."""

    thresholds: tuple[float, ...]

    def __post_init__(self):
        thr = tuple(float(t) for t in self.thresholds)
        if not thr or any(not 0.0 <= t <= 1.0 for t in thr):
            raise ValueError("thresholds must lie in [0, 1]")
        object.__setattr__(self, "thresholds", thr)

    def contains(self, v) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.all(v >= np.asarray(self.thresholds)))


def _upper_weights(marginal: np.ndarray, cut: float) -> np.ndarray:
    """Mass each level contributes above the cumulative cut."""
    cum = np.cumsum(marginal)
    cum[-1] = 1.0
    lo = np.concatenate([[0.0], cum[:-1]])
    return np.clip(np.minimum(cum, 1.0) - np.maximum(lo, cut), 0.0, None)


def median_knapsack_scheme(inst: GridInstance) -> FiniteScheme:
    """Binary scheme revealing whether every attribute's continuous value is
    in the top half of its marginal.

    Needs a product prior: only then is the high-signal probability exactly
    2^{-k} regardless of the marginals, which is what the regret guarantee
    uses.  The high posterior is the product of the conditioned marginals.
    """
    if not inst.is_product:
        raise ValueError("the median scheme guarantee needs a product prior")
    k = inst.k
    uppers = [_upper_weights(m, 0.5) for m in inst.marginals]
    high_weight = 0.5**k
    high_mass = reduce(np.multiply.outer, uppers)
    if k == 1:
        high_mass = np.asarray(high_mass)
    joint = inst.joint_probs()
    high_post = high_mass / high_weight
    low_post = (joint - high_mass) / (1.0 - high_weight)
    return FiniteScheme(
        np.vstack([high_post.ravel(), low_post.ravel()]),
        np.array([high_weight, 1.0 - high_weight]),
    )


def md_regret_bound_check(inst: GridInstance) -> tuple[float, float]:
    """Regret of the median scheme on a flattened instance, checked against
    the 1 - 2^{-k} guarantee; returns (regret, bound)."""
    mu, u = inst.flatten()
    scheme = median_knapsack_scheme(inst)
    regret = optimal_knapsack(mu, u).optimal_utility - sender_utility(scheme, u)
    bound = 1.0 - 0.5**inst.k
    if regret > bound + 1e-9:
        raise ValueError(f"median-scheme regret {regret!r} exceeds the bound {bound!r}")
    return float(regret), bound


def antidiagonal_embedding(m: int, eps: float) -> tuple[GridInstance, Prior]:
    """Joint (non-product) prior concentrating 1 - eps uniformly on the m
    anti-diagonal states of an m x m grid, eps spread over the rest.

    Anti-diagonal states are pairwise Pareto-incomparable, so per-dimension
    monotonicity puts no restriction there and the embedded instance is an
    arbitrary-utility one on m states (returned as its uniform prior).
    """
    if m < 2:
        raise ValueError("need an m x m grid with m >= 2")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    joint = np.full((m, m), eps / (m * m - m))
    idx = np.arange(m)
    joint[idx, m - 1 - idx] = (1.0 - eps) / m
    grid = GridInstance(dims=(m, m), joint=joint)
    return grid, Prior(np.full(m, 1.0 / m))


def lift_antidiagonal_utility(m: int, values, slack: float = 1.0) -> np.ndarray:
    """Monotone grid utility agreeing with ``values[i]`` at anti-diagonal
    state (i, m-1-i): everything Pareto-below the diagonal sits under the
    smallest value, everything above sits over the largest."""
    values = np.asarray(values, dtype=float)
    if values.shape != (m,):
        raise ValueError("need one value per anti-diagonal state")
    if slack < 0.0:
        raise ValueError("slack must be nonnegative")
    u = np.empty((m, m))
    below = float(values.min()) - slack
    above = float(values.max()) + slack
    for i in range(m):
        for j in range(m):
            s = i + j
            if s < m - 1:
                u[i, j] = below
            elif s > m - 1:
                u[i, j] = above
            else:
                u[i, j] = values[i]
    return u


def grid_instance_to_dict(inst: GridInstance) -> dict:
    """JSON form: dims plus either marginals or a row-major joint prior; the
    utility, when present, is row-major too."""
    out: dict = {"dims": list(inst.dims)}
    if inst.marginals is not None:
        out["marginals"] = [[float(v) for v in m] for m in inst.marginals]
    else:
        out["joint"] = [float(v) for v in inst.joint.ravel()]
    if inst.utility is not None:
        out["utility"] = [float(v) for v in inst.utility.ravel()]
    return out


def grid_instance_from_dict(obj: dict) -> GridInstance:
    if not isinstance(obj, dict) or "dims" not in obj:
        raise ValueError("grid instance must be an object with a 'dims' field")
    dims = tuple(int(d) for d in obj["dims"])
    utility = None
    if obj.get("utility") is not None:
        utility = np.asarray(obj["utility"], dtype=float).reshape(dims)
    if obj.get("marginals") is not None:
        marginals = tuple(np.asarray(m, dtype=float) for m in obj["marginals"])
        return GridInstance(dims=dims, marginals=marginals, utility=utility)
    if obj.get("joint") is not None:
        joint = np.asarray(obj["joint"], dtype=float).reshape(dims)
        return GridInstance(dims=dims, joint=joint, utility=utility)
    raise ValueError("grid instance needs 'marginals' or 'joint'")


def sample_monotone_utility(dims, seed: int) -> np.ndarray:
    """Random monotone utility by multidimensional prefix sums of
    nonnegative increments, shifted by a random offset so both signs occur."""
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) > 10_000:
        raise ValueError("generator is meant for small grids")
    rng = np.random.default_rng(seed)
    grid = rng.exponential(1.0, size=dims)
    for ax in range(len(dims)):
        grid = np.cumsum(grid, axis=ax)
    offset = rng.uniform(float(grid.min()), float(grid.max()))
    return grid - offset
