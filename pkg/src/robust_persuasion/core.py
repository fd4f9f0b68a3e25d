"""Domain primitives for binary-action persuasion instances.

Priors, posteriors, receiver utilities, finite signaling schemes, state
orderings, threshold schemes and mixed threshold distributions (atoms plus
closed-form density pieces), together with the primitive operations on them:
adoption, Bayes-plausibility, threshold-scheme expansion, sender utility and
seeded inverse-CDF sampling.

All types are immutable after construction and all operations are pure;
randomness enters only through explicit seeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Validation of user-supplied probability vectors.
PROB_TOL = 1e-12
# Bayes-plausibility of computed schemes; looser because it follows arithmetic.
PLAUSIBILITY_TOL = 1e-9

__all__ = [
    "PROB_TOL",
    "PLAUSIBILITY_TOL",
    "Prior",
    "ReceiverUtility",
    "Posterior",
    "FiniteScheme",
    "StateOrdering",
    "ThresholdScheme",
    "DensityPiece",
    "MixedThreshold",
    "point_mass",
    "adopts",
    "is_bayes_plausible",
    "threshold_to_finite",
    "sender_utility",
    "sample_mixed",
    "load_instance",
    "scheme_to_dict",
    "scheme_from_dict",
]


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} entries must be finite")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Prior:
    """Strictly positive probability vector over the n states of nature."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _as_vector(self.probs, "prior")
        if np.any(arr <= 0.0):
            # Zero-mass states are rejected rather than silently dropped.
            raise ValueError("prior entry must be positive")
        if abs(float(arr.sum()) - 1.0) > PROB_TOL:
            raise ValueError(f"prior must sum to 1, got {float(arr.sum())!r}")
        object.__setattr__(self, "probs", _freeze(arr))

    @property
    def n(self) -> int:
        return int(self.probs.size)

    @property
    def top_mass(self) -> float:
        """Prior mass of the last state (the highest-utility one when
        utilities are monotone nondecreasing in the state index)."""
        return float(self.probs[-1])


@dataclass(frozen=True)
class ReceiverUtility:
    """Per-state adoption utilities; rejection utility is normalized to 0."""

    adopt_utils: np.ndarray

    def __post_init__(self):
        arr = _as_vector(self.adopt_utils, "utility")
        object.__setattr__(self, "adopt_utils", _freeze(arr))

    @property
    def n(self) -> int:
        return int(self.adopt_utils.size)


@dataclass(frozen=True)
class Posterior:
    """Probability vector over states; entries may be zero."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _as_vector(self.probs, "posterior")
        if np.any(arr < -PROB_TOL):
            raise ValueError("posterior entries must be nonnegative")
        if abs(float(arr.sum()) - 1.0) > PLAUSIBILITY_TOL:
            raise ValueError(f"posterior must sum to 1, got {float(arr.sum())!r}")
        object.__setattr__(self, "probs", _freeze(np.clip(arr, 0.0, None)))

    @property
    def n(self) -> int:
        return int(self.probs.size)


@dataclass(frozen=True)
class FiniteScheme:
    """Finite-support distribution over posteriors.

    By Bayes-plausibility this is exactly the data of a signaling scheme:
    a scheme is implementable iff the weighted average of its posteriors
    equals the prior.  Stored as a (k, n) posterior matrix plus a length-k
    weight vector; ``atoms`` exposes the (posterior, weight) pair view.
    """

    posteriors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        post = np.asarray(self.posteriors, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if post.ndim != 2 or post.shape[0] == 0:
            raise ValueError("scheme posteriors must form a (k, n) matrix")
        if w.shape != (post.shape[0],):
            raise ValueError("scheme needs one weight per posterior")
        if not (np.all(np.isfinite(post)) and np.all(np.isfinite(w))):
            raise ValueError("scheme entries must be finite")
        if np.any(w < -PROB_TOL):
            raise ValueError("scheme weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > PLAUSIBILITY_TOL:
            raise ValueError(f"scheme weights must sum to 1, got {float(w.sum())!r}")
        if np.any(post < -PROB_TOL):
            raise ValueError("scheme posteriors must be nonnegative")
        row_sums = post.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > PLAUSIBILITY_TOL):
            raise ValueError("every scheme posterior must sum to 1")
        object.__setattr__(self, "posteriors", _freeze(np.clip(post, 0.0, None)))
        object.__setattr__(self, "weights", _freeze(np.clip(w, 0.0, None)))

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[Posterior | Sequence[float], float]]) -> "FiniteScheme":
        pairs = [(np.asarray(p.probs if isinstance(p, Posterior) else p, dtype=float), float(w)) for p, w in atoms]
        if not pairs:
            raise ValueError("scheme needs at least one atom")
        return cls(np.vstack([p for p, _ in pairs]), np.array([w for _, w in pairs]))

    @property
    def atoms(self) -> tuple[tuple[Posterior, float], ...]:
        return tuple((Posterior(row), float(w)) for row, w in zip(self.posteriors, self.weights))

    @property
    def n(self) -> int:
        return int(self.posteriors.shape[1])

    def mean_posterior(self) -> np.ndarray:
        return self.weights @ self.posteriors


@dataclass(frozen=True)
class StateOrdering:
    """Permutation of the states plus cumulative prior masses along it."""

    order: np.ndarray
    cum: np.ndarray

    def __post_init__(self):
        order = np.asarray(self.order, dtype=int)
        cum = np.asarray(self.cum, dtype=float)
        n = order.size
        if sorted(order.tolist()) != list(range(n)):
            raise ValueError("ordering must be a permutation of 0..n-1")
        if cum.shape != (n,):
            raise ValueError("one cumulative mass per state required")
        if np.any(np.diff(cum) <= 0.0) or cum[0] <= 0.0:
            raise ValueError("cumulative masses must be strictly increasing")
        if abs(float(cum[-1]) - 1.0) > PROB_TOL:
            raise ValueError("cumulative masses must end at 1")
        object.__setattr__(self, "order", _freeze(order))
        object.__setattr__(self, "cum", _freeze(cum))

    @classmethod
    def from_prior(cls, mu: Prior, order: Sequence[int] | None = None) -> "StateOrdering":
        idx = np.arange(mu.n) if order is None else np.asarray(order, dtype=int)
        return cls(idx, np.cumsum(mu.probs[idx]))

    @classmethod
    def by_utility(cls, mu: Prior, u: ReceiverUtility, descending: bool = False) -> "StateOrdering":
        """Stable sort of the states by adoption utility (ties keep index order)."""
        if mu.n != u.n:
            raise ValueError("prior and utility dimensions differ")
        key = -u.adopt_utils if descending else u.adopt_utils
        idx = np.argsort(key, kind="stable")
        return cls.from_prior(mu, idx)

    @property
    def n(self) -> int:
        return int(self.order.size)


@dataclass(frozen=True)
class ThresholdScheme:
    """Binary-signal scheme revealing whether the real-valued state is below t.

    The real-valued state is the uniform reparameterization of the prior along
    ``ordering``: position z in [0, 1) maps to the state whose cumulative-mass
    segment contains z.  t = 0 reveals nothing.  t = 1 is a convention the
    formulas extend to continuously: the low signal always fires, pooling
    everything at the prior.
    """

    t: float
    ordering: StateOrdering

    def __post_init__(self):
        t = float(self.t)
        if not (0.0 <= t <= 1.0):
            raise ValueError("threshold must lie in [0, 1]")
        object.__setattr__(self, "t", t)


def adopts(p: Posterior, u: ReceiverUtility, eps: float = 0.0) -> bool:
    """Whether the receiver adopts at posterior ``p``: expected adoption
    utility >= 0, ties broken toward adoption.

    ``eps`` widens (eps > 0) or shrinks (eps < 0) the tie region; the default
    0 is the exact rule.  It exists for sensitivity experiments only.
    """
    if p.n != u.n:
        raise ValueError("posterior and utility dimensions differ")
    return bool(float(p.probs @ u.adopt_utils) >= -eps)


def is_bayes_plausible(s: FiniteScheme, mu: Prior, tol: float = PLAUSIBILITY_TOL) -> bool:
    """True iff the scheme's mean posterior equals the prior componentwise."""
    if s.n != mu.n:
        raise ValueError("scheme and prior dimensions differ")
    return bool(np.max(np.abs(s.mean_posterior() - mu.probs)) <= tol)


def threshold_to_finite(ts: ThresholdScheme, mu: Prior) -> FiniteScheme:
    """Expand a t-threshold scheme into its two-atom posterior distribution.

    The high signal carries weight 1 - t and pools the real-valued states in
    [t, 1); the low signal carries weight t and pools [0, t).  The straddling
    state is split fractionally.  Always Bayes-plausible by construction.
    """
    if ts.ordering.n != mu.n:
        raise ValueError("ordering and prior dimensions differ")
    order = ts.ordering.order
    masses = mu.probs[order]
    cum = np.cumsum(masses)
    t = ts.t
    if t <= 0.0 or t >= 1.0:
        return FiniteScheme(mu.probs[None, :].copy(), np.array([1.0]))
    j = min(int(np.searchsorted(cum, t, side="left")), mu.n - 1)
    high = np.zeros(mu.n)
    high[order[j + 1 :]] = masses[j + 1 :]
    high[order[j]] = cum[j] - t
    low = np.zeros(mu.n)
    low[order[:j]] = masses[:j]
    low[order[j]] = t - (cum[j] - masses[j])
    w_high, w_low = float(high.sum()), float(low.sum())
    if w_low <= 0.0 or w_high <= 0.0:  # threshold below float resolution
        return FiniteScheme(mu.probs[None, :].copy(), np.array([1.0]))
    total = w_high + w_low
    return FiniteScheme(
        np.vstack([high / w_high, low / w_low]),
        np.array([w_high / total, w_low / total]),
    )


def sender_utility(s: FiniteScheme, u: ReceiverUtility, eps: float = 0.0) -> float:
    """Adoption probability under the scheme: total weight of adopting atoms."""
    if s.n != u.n:
        raise ValueError("scheme and utility dimensions differ")
    adopting = (s.posteriors @ u.adopt_utils) >= -eps
    return float(s.weights[adopting].sum())


# ---------------------------------------------------------------------------
# Mixed threshold distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityPiece:
    """Density coef / (1 - z)**power on [lo, hi), power in {1, 2}.

    These two closed forms are the only ones the optimal strategies need;
    restricting to them keeps the CDF, its inverse and every expectation
    exactly integrable, with no quadrature in the sampling path.
    """

    lo: float
    hi: float
    coef: float
    power: int

    def __post_init__(self):
        lo, hi, coef = float(self.lo), float(self.hi), float(self.coef)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "power", int(self.power))
        if self.power not in (1, 2):
            raise ValueError("density power must be 1 or 2")
        if not (0.0 <= lo < hi < 1.0):
            raise ValueError("density piece needs 0 <= lo < hi < 1")
        if coef <= 0.0:
            raise ValueError("density coefficient must be positive")

    def mass_below(self, t: float | np.ndarray):
        """Integral of the density over [lo, min(t, hi)]."""
        t = np.clip(t, self.lo, self.hi)
        if self.power == 1:
            return self.coef * np.log((1.0 - self.lo) / (1.0 - t))
        return self.coef * (1.0 / (1.0 - t) - 1.0 / (1.0 - self.lo))

    @property
    def mass(self) -> float:
        return float(self.mass_below(self.hi))

    def inverse_mass(self, m: float | np.ndarray):
        """Location t in [lo, hi] with mass_below(t) == m."""
        if self.power == 1:
            t = 1.0 - (1.0 - self.lo) * np.exp(-np.asarray(m) / self.coef)
        else:
            t = 1.0 - 1.0 / (np.asarray(m) / self.coef + 1.0 / (1.0 - self.lo))
        return np.clip(t, self.lo, self.hi)


@dataclass(frozen=True)
class MixedThreshold:
    """Distribution over thresholds: atoms plus closed-form density pieces.

    Total mass must be 1 within PLAUSIBILITY_TOL.  The CDF is nondecreasing
    and right-continuous with CDF(1) = 1.  Pieces must not overlap; an atom
    interior to a piece splits it during normalization.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    density_pieces: tuple[DensityPiece, ...] = ()

    def __post_init__(self):
        atoms = []
        for loc, w in self.atoms:
            loc, w = float(loc), float(w)
            if not (0.0 <= loc <= 1.0):
                raise ValueError("atom locations must lie in [0, 1]")
            if w < -PROB_TOL:
                raise ValueError("atom weights must be nonnegative")
            if w > PROB_TOL:
                atoms.append((loc, w))
        atoms.sort()
        pieces = sorted(self.density_pieces, key=lambda pc: pc.lo)
        for a, b in zip(pieces, pieces[1:]):
            if b.lo < a.hi - PROB_TOL:
                raise ValueError("density pieces must not overlap")
        # Split pieces at interior atom locations so segments stay ordered.
        for loc, _ in atoms:
            split = []
            for pc in pieces:
                if pc.lo < loc < pc.hi:
                    split.append(DensityPiece(pc.lo, loc, pc.coef, pc.power))
                    split.append(DensityPiece(loc, pc.hi, pc.coef, pc.power))
                else:
                    split.append(pc)
            pieces = split
        total = sum(w for _, w in atoms) + sum(pc.mass for pc in pieces)
        if abs(total - 1.0) > PLAUSIBILITY_TOL:
            raise ValueError(f"mixed threshold mass must be 1, got {total!r}")
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "density_pieces", tuple(pieces))

    def _segments(self) -> list[tuple[float, object]]:
        """Mass segments in increasing position: (mass, atom-loc or piece)."""
        events: list[tuple[float, int, float, object]] = []
        for loc, w in self.atoms:
            events.append((loc, 0, w, loc))
        for pc in self.density_pieces:
            events.append((pc.lo, 1, pc.mass, pc))
        events.sort(key=lambda e: (e[0], e[1]))
        return [(mass, obj) for _, _, mass, obj in events]

    def cdf(self, t: float | np.ndarray):
        """Right-continuous CDF at t (t below 0 gives 0, above 1 gives 1)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for loc, w in self.atoms:
            out = out + w * (t >= loc)
        for pc in self.density_pieces:
            out = out + pc.mass_below(np.clip(t, pc.lo, pc.hi))
        return float(out) if out.ndim == 0 else out

    def inverse_cdf(self, z: float | np.ndarray):
        """Generalized inverse CDF; exact on each atom and density segment."""
        z = np.asarray(z, dtype=float)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        if np.any((z < -PROB_TOL) | (z > 1.0 + PROB_TOL)):
            raise ValueError("inverse CDF argument must lie in [0, 1]")
        segments = self._segments()
        masses = np.array([m for m, _ in segments])
        ends = np.cumsum(masses)
        starts = ends - masses
        idx = np.searchsorted(ends, np.clip(z, 0.0, ends[-1]), side="left")
        idx = np.minimum(idx, len(segments) - 1)
        out = np.empty_like(z)
        for k, (_, obj) in enumerate(segments):
            sel = idx == k
            if not np.any(sel):
                continue
            if isinstance(obj, DensityPiece):
                out[sel] = obj.inverse_mass(z[sel] - starts[k])
            else:
                out[sel] = obj
        return float(out[0]) if scalar else out

    @property
    def support_max(self) -> float:
        hi = max((loc for loc, _ in self.atoms), default=0.0)
        if self.density_pieces:
            hi = max(hi, max(pc.hi for pc in self.density_pieces))
        return hi


def point_mass(loc: float) -> MixedThreshold:
    return MixedThreshold(atoms=((loc, 1.0),))


def sample_mixed(m: MixedThreshold, seed: int, size: int | None = None):
    """Draw thresholds from ``m`` by inverse-CDF transform of U[0,1].

    Deterministic given the seed; returns a scalar when ``size`` is None.
    """
    rng = np.random.default_rng(seed)
    z = rng.random() if size is None else rng.random(size)
    return m.inverse_cdf(z)


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------

def load_instance(obj: dict) -> tuple[Prior, ReceiverUtility]:
    """Parse {"prior": [...], "utility": [...]} into validated types."""
    if not isinstance(obj, dict):
        raise ValueError("instance must be a JSON object")
    if "prior" not in obj:
        raise ValueError("instance is missing the 'prior' field")
    if "utility" not in obj:
        raise ValueError("instance is missing the 'utility' field")
    mu = Prior(np.asarray(obj["prior"], dtype=float))
    u = ReceiverUtility(np.asarray(obj["utility"], dtype=float))
    if mu.n != u.n:
        raise ValueError("prior and utility lengths differ")
    return mu, u


def scheme_to_dict(s: FiniteScheme) -> dict:
    return {
        "atoms": [
            {"posterior": [float(v) for v in row], "weight": float(w)}
            for row, w in zip(s.posteriors, s.weights)
        ]
    }


def scheme_from_dict(obj: dict) -> FiniteScheme:
    if not isinstance(obj, dict) or "atoms" not in obj:
        raise ValueError("scheme must be an object with an 'atoms' field")
    atoms = [(a["posterior"], a["weight"]) for a in obj["atoms"]]
    return FiniteScheme.from_atoms(atoms)
