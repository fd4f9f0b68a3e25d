"""Arbitrary receiver utilities: constructions and adversaries.

With nothing known about the receiver, adoption regions are half-space cuts
of the simplex and the worst-case regret is 1/2 for two states (and for the
uniform ternary prior), while for n states it sits between 1 - 2/sqrt(n)
and 1 - 1/(4 n^2).  This module carries the binary scheme and its
proof-driven adversary, the angle-uniform boundary scheme on the ternary
simplex with exact half-plane masses, the pairing scheme behind the upper
bound, and the exact combinatorics of the good/normal/bad lower bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import FiniteScheme, Posterior, Prior, ReceiverUtility, sender_utility
from .standard import optimal_knapsack

__all__ = [
    "HalfPlaneAdoption",
    "TernaryBoundaryScheme",
    "GoodNormalBadInstance",
    "prop1_scheme",
    "prop1_adversary",
    "prop1_threshold_sweep",
    "ternary_sample",
    "ternary_mass_in",
    "ternary_regret",
    "ternary_sweep",
    "thm2_upper_scheme",
    "thm2_lower_adoption_prob",
    "thm2_lower_bound_check",
    "signed_exponential_utilities",
    "structured_utilities",
    "batch_knapsack_values",
    "batch_scheme_utilities",
]

_SQRT3 = math.sqrt(3.0)
# Equilateral embedding of the ternary simplex used throughout.
TERNARY_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, _SQRT3 / 2.0]])
TERNARY_CENTROID = np.array([0.5, _SQRT3 / 6.0])
_DEGENERACY_EPS = 1e-12


# ---------------------------------------------------------------------------
# Proposition 1: two states
# ---------------------------------------------------------------------------

def prop1_scheme(mu: Prior) -> FiniteScheme:
    """Binary scheme with posteriors 0 and 2*mu_a at weight 1/2 each on the
    axis of the less likely state a; guarantees regret 1/2 for n = 2."""
    if mu.n != 2:
        raise ValueError("this construction needs exactly 2 states")
    a = 0 if mu.probs[0] <= 0.5 else 1
    mua = float(mu.probs[a])
    low = np.zeros(2)
    low[1 - a] = 1.0
    high = np.zeros(2)
    high[a] = 2.0 * mua
    high[1 - a] = 1.0 - 2.0 * mua
    return FiniteScheme(np.vstack([low, high]), np.array([0.5, 0.5]))


def _halfline_utility(t: float, a: int, upper: bool) -> ReceiverUtility:
    """Utility whose adoption set on the p_a axis is [t, 1] (upper) or [0, t]."""
    u = np.empty(2)
    if upper:
        u[a], u[1 - a] = 1.0 - t, -t
    else:
        u[a], u[1 - a] = t - 1.0, t
    return ReceiverUtility(u)


def prop1_adversary(s: FiniteScheme, mu: Prior) -> tuple[ReceiverUtility, float]:
    """The two-case best response from the binary lower-bound argument.

    If the scheme keeps at most half its mass at or below mu_a on the a-axis,
    adopt exactly there (the no-information optimum earns 1); otherwise push
    the adoption cutoff to mu_a / (1 - eps) where eps is the shortfall of
    mass above mu_a.  Returns the utility and the regret it achieves.
    """
    if mu.n != 2 or s.n != 2:
        raise ValueError("this adversary needs exactly 2 states")
    a = 0 if mu.probs[0] <= 0.5 else 1
    mua = float(mu.probs[a])
    pos = s.posteriors[:, a]
    mass_low = float(s.weights[pos <= mua].sum())
    if mass_low <= 0.5 + _DEGENERACY_EPS:
        u = _halfline_utility(mua, a, upper=False)
    else:
        eps = mass_low - 0.5
        u = _halfline_utility(mua / (1.0 - eps), a, upper=True)
    regret = optimal_knapsack(mu, u).optimal_utility - sender_utility(s, u)
    return u, float(regret)


def prop1_threshold_sweep(s: FiniteScheme, mu: Prior, step: float = 1e-4) -> float:
    """Max regret over all half-line adoption sets [0, t] and [t, 1] on a
    uniform t-grid, using the closed-form knowledgeable-sender optimum
    (1 when the prior adopts, otherwise the tight Markov pooling)."""
    if mu.n != 2 or s.n != 2:
        raise ValueError("the sweep needs exactly 2 states")
    mu1 = float(mu.probs[0])
    pos = s.posteriors[:, 0]
    w = s.weights
    ts = np.arange(0.0, 1.0 + step / 2.0, step)
    ts = np.clip(ts, 0.0, 1.0)
    # A = [t, 1] on the p_1 axis.
    ustar_up = np.where(ts <= mu1, 1.0, mu1 / np.where(ts > mu1, ts, 1.0))
    mass_up = (pos[None, :] >= ts[:, None]) @ w
    # A = [0, t].
    ustar_dn = np.where(ts >= mu1, 1.0, (1.0 - mu1) / np.where(ts < mu1, 1.0 - ts, 1.0))
    mass_dn = (pos[None, :] <= ts[:, None]) @ w
    return float(max((ustar_up - mass_up).max(), (ustar_dn - mass_dn).max()))


# ---------------------------------------------------------------------------
# Proposition 2: uniform ternary prior
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfPlaneAdoption:
    """Adoption iff the linear functional ``normal . p`` is nonnegative."""

    normal: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.normal, dtype=float)
        if arr.shape != (3,):
            raise ValueError("half-plane normal must be a 3-vector")
        if not np.all(np.isfinite(arr)) or np.all(arr == 0.0):
            raise ValueError("half-plane normal must be finite and nonzero")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "normal", arr)

    def utility(self) -> ReceiverUtility:
        return ReceiverUtility(self.normal)


def _bary_to_cart(p: np.ndarray) -> np.ndarray:
    return p @ TERNARY_VERTICES


def _cart_to_bary(z: np.ndarray) -> np.ndarray:
    z = np.atleast_2d(z)
    p3 = 2.0 * z[:, 1] / _SQRT3
    p2 = z[:, 0] - z[:, 1] / _SQRT3
    p1 = 1.0 - p2 - p3
    return np.column_stack([p1, p2, p3])


def _boundary_hits(theta: np.ndarray) -> np.ndarray:
    """Cartesian boundary point hit by the ray from the centroid at each
    angle; vectorized over the three edges."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    d = np.column_stack([np.cos(theta), np.sin(theta)])
    best = np.full(theta.shape, np.inf)
    for k in range(3):
        p0 = TERNARY_VERTICES[k]
        edge = TERNARY_VERTICES[(k + 1) % 3] - p0
        rel = p0 - TERNARY_CENTROID
        det = d[:, 0] * (-edge[1]) - d[:, 1] * (-edge[0])
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (rel[0] * (-edge[1]) + rel[1] * edge[0]) / det
            r = (d[:, 0] * rel[1] - d[:, 1] * rel[0]) / det
        ok = np.isfinite(s) & (s > 1e-12) & (r >= -1e-12) & (r <= 1.0 + 1e-12)
        best = np.where(ok & (s < best), s, best)
    return TERNARY_CENTROID + best[:, None] * d


@dataclass(frozen=True)
class TernaryBoundaryScheme:
    """Distribution on the simplex boundary assigning each arc the angle it
    subtends at the centroid (divided by 2 pi).

    Every half-plane whose boundary line passes through the centroid gets
    mass exactly 1/2, and by threefold symmetry the mean is the centroid,
    so the scheme is Bayes-plausible for the uniform prior.
    """

    def sample(self, seed: int, size: int | None = None):
        """One Posterior draw, or a (size, 3) barycentric array."""
        rng = np.random.default_rng(seed)
        theta = rng.uniform(0.0, 2.0 * math.pi, size=1 if size is None else size)
        bary = np.clip(_cart_to_bary(_boundary_hits(theta)), 0.0, None)
        bary /= bary.sum(axis=1, keepdims=True)
        return Posterior(bary[0]) if size is None else bary

    def mass_in(self, region: HalfPlaneAdoption) -> float:
        return float(_mass_in_many(region.normal[None, :])[0])


def _mass_in_many(normals: np.ndarray) -> np.ndarray:
    """Exact boundary-scheme mass of each half-plane {p : w . p >= 0}.

    The mass is the angle under which the in-region boundary arc is seen
    from the centroid, over 2 pi, computed from the two edge intersections
    of the cutting line.  Lines through a vertex are perturbed slightly
    first so exactly two crossings exist whenever signs are mixed.
    """
    W = np.asarray(normals, dtype=float).copy()
    scale = np.abs(W).max(axis=1, keepdims=True)
    lv = W  # functional values at the vertices: l(v_k) = w_k
    degenerate = (np.abs(lv) <= _DEGENERACY_EPS * scale).any(axis=1)
    if np.any(degenerate):
        bump = _DEGENERACY_EPS * scale[degenerate, 0][:, None] * np.array([1.0, 1.37, 2.11])
        W = W.copy()
        W[degenerate] += bump
        lv = W
    center_val = lv.mean(axis=1)  # functional at the centroid
    out = np.where(center_val >= 0.0, 1.0, 0.0)
    mixed = (lv.max(axis=1) > 0.0) & (lv.min(axis=1) < 0.0)
    if not np.any(mixed):
        return out
    lvm = lv[mixed]
    pts = np.zeros((lvm.shape[0], 2, 2))
    count = np.zeros(lvm.shape[0], dtype=int)
    for k in range(3):
        a, b = lvm[:, k], lvm[:, (k + 1) % 3]
        cross = ((a > 0.0) & (b <= 0.0)) | ((a <= 0.0) & (b > 0.0))
        t = np.where(cross, a / np.where(a == b, 1.0, a - b), 0.0)
        pt = TERNARY_VERTICES[k] + t[:, None] * (TERNARY_VERTICES[(k + 1) % 3] - TERNARY_VERTICES[k])
        for i in np.nonzero(cross)[0]:
            if count[i] < 2:
                pts[i, count[i]] = pt[i]
                count[i] += 1
    v1 = pts[:, 0] - TERNARY_CENTROID
    v2 = pts[:, 1] - TERNARY_CENTROID
    ang = np.abs(np.arctan2(v1[:, 1], v1[:, 0]) - np.arctan2(v2[:, 1], v2[:, 0]))
    cone = np.where(ang > math.pi, 2.0 * math.pi - ang, ang)
    frac = cone / (2.0 * math.pi)
    out[mixed] = np.where(center_val[mixed] >= 0.0, 1.0 - frac, frac)
    return out


def ternary_sample(seed: int, size: int | None = None):
    """Posterior(s) drawn from the boundary scheme, in barycentric coords."""
    return TernaryBoundaryScheme().sample(seed, size)


def ternary_mass_in(region: HalfPlaneAdoption) -> float:
    """Exact scheme mass of the half-plane (angular measure of its arc)."""
    return TernaryBoundaryScheme().mass_in(region)


def _uniform3_knapsack(W: np.ndarray) -> np.ndarray:
    """Knowledgeable-sender optimum under the uniform ternary prior for each
    utility row; vectorized greedy pooling of the sorted utilities."""
    s = -np.sort(-W, axis=1)
    u1, u2, u3 = s[:, 0], s[:, 1], s[:, 2]
    third = 1.0 / 3.0
    pooled = np.zeros(W.shape[0])
    # Top state.
    take1 = u1 >= 0.0
    pooled = np.where(take1, third, 0.0)
    e1 = np.where(take1, u1 * third, 0.0)
    # Second state: full if nonnegative, else the budgeted fraction.
    frac2 = np.where(u2 < 0.0, np.minimum(1.0, e1 / np.where(u2 < 0.0, -u2 * third, 1.0)), 1.0)
    pooled = np.where(take1, pooled + frac2 * third, pooled)
    full2 = take1 & (frac2 >= 1.0)
    e2 = e1 + u2 * third
    # Third state, only reachable when the second went in fully.
    frac3 = np.where(u3 < 0.0, np.minimum(1.0, e2 / np.where(u3 < 0.0, -u3 * third, 1.0)), 1.0)
    pooled = np.where(full2, pooled + frac3 * third, pooled)
    return pooled


def ternary_regret(region: HalfPlaneAdoption) -> float:
    """Knapsack optimum minus the boundary scheme's mass, for one half-plane
    adoption region under the uniform ternary prior."""
    ustar = float(_uniform3_knapsack(region.normal[None, :])[0])
    return ustar - ternary_mass_in(region)


def ternary_sweep(grid: int = 400) -> np.ndarray:
    """Regret over a grid of cutting lines through D = (d, sqrt(3) d) and
    E = (e, 0), for the three rotations of the vertex roles.

    Returns a structured record array with fields d, e, assignment, regret;
    the regret of each line is the better of its two adoption sides.  Lines
    through a vertex are perturbed as in ``ternary_mass_in``.
    """
    if grid < 2:
        raise ValueError("need at least a 2-point grid")
    ds = np.linspace(0.0, 0.5, grid)
    es = np.linspace(0.0, 1.0, grid)
    D, E = np.meshgrid(ds, es, indexing="ij")
    d, e = D.ravel(), E.ravel()
    # Functional values at the three vertices for the line through D and E,
    # oriented so the omega_1 corner is the nonnegative side.
    px, py = d, _SQRT3 * d
    qx = e
    ax = qx - px
    ay = -py
    def ell(zx, zy):
        return ax * (zy - py) - ay * (zx - px)
    w = np.column_stack([ell(0.0, 0.0), ell(1.0, 0.0), ell(0.5, _SQRT3 / 2.0)])
    sign = np.where(w[:, 0] < 0.0, -1.0, 1.0)
    # Coincident D and E leave the line undefined; nudge e off d's position.
    bad = (np.abs(ax) < _DEGENERACY_EPS) & (np.abs(ay) < _DEGENERACY_EPS)
    if np.any(bad):
        e2 = np.where(bad, e + 1e-9, e)
        ax2, ay2 = e2 - px, -py
        def ell2(zx, zy):
            return ax2 * (zy - py) - ay2 * (zx - px)
        w = np.column_stack([ell2(0.0, 0.0), ell2(1.0, 0.0), ell2(0.5, _SQRT3 / 2.0)])
        sign = np.where(w[:, 0] < 0.0, -1.0, 1.0)
    w = w * sign[:, None]
    rows = []
    for assignment in range(3):
        wa = np.roll(w, assignment, axis=1)
        regret = np.maximum(
            _uniform3_knapsack(wa) - _mass_in_many(wa),
            _uniform3_knapsack(-wa) - _mass_in_many(-wa),
        )
        rows.append(
            np.rec.fromarrays(
                [d, e, np.full(d.size, assignment), regret],
                names=["d", "e", "assignment", "regret"],
            )
        )
    return np.concatenate(rows).view(np.recarray)


# ---------------------------------------------------------------------------
# Theorem: 1 - 2/sqrt(n) <= worst-case regret <= 1 - 1/(4 n^2)
# ---------------------------------------------------------------------------

def thm2_upper_scheme(mu: Prior) -> FiniteScheme:
    """Near-full-revelation scheme whose signals pool at most two states.

    States with mass at least 1/(2n) form the heavy set U.  Each state keeps
    most of its mass on its own revealing signal; every heavy i additionally
    pairs a sliver mu_i/(2n(n-|U|)) with a sliver mu_j/(2|U|) of each light
    j.  When U is everything the pair signals vanish and the residual mass
    folds back into the revealing signals (full revelation).
    """
    n = mu.n
    heavy = mu.probs >= 1.0 / (2.0 * n)
    n_heavy = int(heavy.sum())
    if n_heavy == n:
        return FiniteScheme(np.eye(n), mu.probs.copy())
    posteriors = []
    weights = []
    for i in range(n):
        mass = (1.0 - 1.0 / (2.0 * n)) * mu.probs[i] if heavy[i] else mu.probs[i] / 2.0
        point = np.zeros(n)
        point[i] = 1.0
        posteriors.append(point)
        weights.append(mass)
    light_idx = np.nonzero(~heavy)[0]
    for i in np.nonzero(heavy)[0]:
        from_i = mu.probs[i] / (2.0 * n * (n - n_heavy))
        for j in light_idx:
            from_j = mu.probs[j] / (2.0 * n_heavy)
            pair = np.zeros(n)
            pair[i], pair[j] = from_i, from_j
            total = from_i + from_j
            posteriors.append(pair / total)
            weights.append(total)
    return FiniteScheme(np.vstack(posteriors), np.asarray(weights))


def thm2_lower_adoption_prob(n: int, supp_size: int) -> float:
    """Exact adoption probability bound for a posterior with the given
    delta-support size under the uniformly permuted good/normal/bad types.

    Small supports adopt only when they caught the good state (supp/n); larger
    ones must also dodge every bad state, giving the hypergeometric product.
    Accumulated in exact rationals, returned as float.
    """
    if n < 16:
        raise ValueError("the lower-bound construction needs n >= 16")
    if not 1 <= supp_size <= n:
        raise ValueError("support size must lie in 1..n")
    b = math.isqrt(n)
    if supp_size <= b:
        return float(Fraction(supp_size, n))
    prob = Fraction(1)
    for r in range(supp_size):
        prob *= Fraction(n - r - b, n - r)
        if prob == 0:
            return 0.0
    prob *= min(Fraction(supp_size, n - b), Fraction(1))
    return float(prob)


def thm2_lower_bound_check(
    n: int, scheme: FiniteScheme, delta: float | None = None
) -> tuple[float, float]:
    """Certify the regret lower bound 1 - 2/sqrt(n) for one scheme.

    Returns (knowledgeable-sender lower bound 1 - floor(sqrt(n))/n, upper
    bound on the scheme's utility = the worst atom's adoption probability)
    and raises if their difference falls short of the bound.
    """
    if scheme.n != n:
        raise ValueError("scheme dimension must equal n")
    if delta is None:
        delta = float(scheme.mean_posterior().min()) / (4.0 * n)
    b = math.isqrt(n)
    u_star_lb = 1.0 - b / n
    supp_sizes = (scheme.posteriors > delta).sum(axis=1)
    scheme_ub = max(thm2_lower_adoption_prob(n, int(sz)) for sz in supp_sizes)
    bound = 1.0 - 2.0 / math.sqrt(n)
    if u_star_lb - scheme_ub < bound - 1e-12:
        raise ValueError("lower-bound certificate failed")
    return u_star_lb, scheme_ub


@dataclass(frozen=True)
class GoodNormalBadInstance:
    """The hidden-good-state construction: one good state, floor(sqrt(n))
    bad states and normal states in between, assigned by a permutation."""

    mu: Prior
    delta: float

    def __post_init__(self):
        limit = float(self.mu.probs.min()) / (2.0 * self.mu.n)
        if not 0.0 < self.delta < limit:
            raise ValueError("delta must lie in (0, min mu_i / (2n))")

    @property
    def n(self) -> int:
        return self.mu.n

    @property
    def n_bad(self) -> int:
        return math.isqrt(self.n)

    def utility_for(self, permutation: np.ndarray) -> ReceiverUtility:
        """Adoption utilities when permutation[0] is good and the final
        n_bad entries are bad."""
        perm = np.asarray(permutation, dtype=int)
        good = perm[0]
        bad = perm[self.n - self.n_bad :]
        normal = perm[1 : self.n - self.n_bad]
        mu_good = float(self.mu.probs[good])
        mu_normal = float(self.mu.probs[normal].sum())
        u = np.empty(self.n)
        u[normal] = -1.0 / mu_normal
        u[good] = 1.0 / mu_good
        u[bad] = -1.0 / (self.delta * mu_good)
        return ReceiverUtility(u)


# ---------------------------------------------------------------------------
# Utility generators and batch evaluation
# ---------------------------------------------------------------------------

def signed_exponential_utilities(n: int, count: int, seed: int) -> np.ndarray:
    """Random adversaries: independent signs times Exp(1) magnitudes."""
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(count, n)) * 2 - 1
    return signs * rng.exponential(1.0, size=(count, n))


def structured_utilities(mu: Prior) -> np.ndarray:
    """Worst-case-shaped adversaries: for every nonempty proper subset T a
    borderline utility (prior expectation exactly zero) and a harsh one
    (adopt only inside T), plus the single-state traps that defeat full
    revelation."""
    n = mu.n
    rows = []
    for mask in range(1, 2**n - 1):
        inside = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
        m_in = float(mu.probs[inside].sum())
        m_out = 1.0 - m_in
        borderline = np.where(inside, 1.0 / m_in, -1.0 / m_out)
        harsh = np.where(inside, 1.0, -1e6)
        rows += [borderline, harsh]
    for i in range(n):
        trap = np.full(n, -1.0 / (1.0 - float(mu.probs[i])))
        trap[i] = 1.0 / float(mu.probs[i])
        rows.append(trap)
    return np.vstack(rows)


def batch_knapsack_values(mu: Prior, utilities: np.ndarray) -> np.ndarray:
    """Vectorized knowledgeable-sender optimum for many utility rows;
    matches ``optimal_knapsack`` including its tie conventions."""
    U = np.asarray(utilities, dtype=float)
    order = np.argsort(-U, axis=1, kind="stable")
    masses = mu.probs[order]
    utils = np.take_along_axis(U, order, axis=1)
    contrib = masses * utils
    expect = np.cumsum(contrib, axis=1)
    neg = expect < 0.0
    any_neg = neg.any(axis=1)
    first = np.where(any_neg, neg.argmax(axis=1), U.shape[1])
    cum_mass = np.cumsum(masses, axis=1)
    full = np.where(
        first >= U.shape[1],
        1.0,
        np.take_along_axis(
            np.concatenate([np.zeros((U.shape[0], 1)), cum_mass], axis=1),
            first[:, None],
            axis=1,
        )[:, 0],
    )
    idx = np.minimum(first, U.shape[1] - 1)[:, None]
    e_prev = np.take_along_axis(
        np.concatenate([np.zeros((U.shape[0], 1)), expect], axis=1), idx, axis=1
    )[:, 0]
    m_at = np.take_along_axis(masses, idx, axis=1)[:, 0]
    u_at = np.take_along_axis(utils, idx, axis=1)[:, 0]
    frac_mass = np.where(
        (first < U.shape[1]) & (u_at < 0.0),
        np.minimum(1.0, e_prev / np.where(u_at < 0.0, -u_at * m_at, 1.0)) * m_at,
        0.0,
    )
    return np.minimum(full + frac_mass, 1.0)


def batch_scheme_utilities(s: FiniteScheme, utilities: np.ndarray) -> np.ndarray:
    """Scheme adoption probability against each utility row."""
    U = np.asarray(utilities, dtype=float)
    adopting = s.posteriors @ U.T >= 0.0
    return s.weights @ adopting
