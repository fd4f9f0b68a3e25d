"""Independent numerical oracle for the continuum threshold games.

Discretizes the regret and ratio kernels on a uniform grid and solves the
resulting finite zero-sum games by multiplicative-weights self-play, with a
certified duality gap from best pure responses against the averaged
strategies.  The kernel jump along y = x sits exactly on grid diagonals and
the indicator is evaluated with >= (sender-favorable tie), matching the
adoption rule.

For the two threshold kernels the matrix is never materialized: both
matrix-vector products collapse to prefix/suffix sums, giving O(m) work per
iteration.  That structured loop is the package's hot kernel, compiled with
numba by default with a pure-numpy fallback (see ``_backend``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .approx import apr_mon_value, approx_adversary_opt, approx_sender_opt
from .core import MixedThreshold
from .monotone_regret import adversary_opt, reg_mon_value, sender_opt

__all__ = [
    "MatrixGame",
    "GameReport",
    "LemmaCheck",
    "discretize",
    "solve_matrix_game",
    "solve_threshold_game",
    "verify_lemma",
]

DEFAULT_MAX_ITERS = 2_000_000
DEFAULT_CHECK_EVERY = 2_000


@dataclass(frozen=True)
class MatrixGame:
    """Finite zero-sum game; the row player maximizes ``payoff``."""

    payoff: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.payoff, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("payoff must be a nonempty matrix")
        if not np.all(np.isfinite(arr)):
            raise ValueError("payoff entries must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "payoff", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.payoff.shape


@dataclass(frozen=True)
class GameReport:
    """Solver output with a certified duality gap.

    ``col_best_response <= value <= row_best_response`` holds for the exact
    game value: the bounds come from best pure responses against the averaged
    strategies.  ``value_estimate`` is their midpoint.
    """

    value_estimate: float
    duality_gap: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    iterations: int
    row_best_response: float
    col_best_response: float

    def to_dict(self) -> dict:
        return {
            "value_estimate": self.value_estimate,
            "duality_gap": self.duality_gap,
            "iterations": self.iterations,
            "row_best_response": self.row_best_response,
            "col_best_response": self.col_best_response,
            "row_strategy": [float(v) for v in self.row_strategy],
            "col_strategy": [float(v) for v in self.col_strategy],
        }


def discretize(kernel, interval: tuple[float, float], m: int) -> MatrixGame:
    """Uniform grid with both endpoints; entry (i, j) = kernel(x_i, y_j)."""
    if m < 2:
        raise ValueError("need at least a 2-point grid")
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("interval must be nondegenerate")
    pts = np.linspace(lo, hi, m)
    return MatrixGame(kernel(pts[:, None], pts[None, :]))


def _report(S_row, S_col, sum_row, sum_col, iters: int) -> GameReport:
    row_br = float(S_row.max() / iters)
    col_br = float(S_col.min() / iters)
    return GameReport(
        value_estimate=0.5 * (row_br + col_br),
        duality_gap=row_br - col_br,
        row_strategy=sum_row / iters,
        col_strategy=sum_col / iters,
        iterations=iters,
        row_best_response=row_br,
        col_best_response=col_br,
    )


def solve_matrix_game(
    gm: MatrixGame,
    eps: float = 1e-3,
    max_iters: int = DEFAULT_MAX_ITERS,
    check_every: int = DEFAULT_CHECK_EVERY,
) -> GameReport:
    """MW self-play on a dense payoff matrix until the empirical duality gap
    (best pure response against each averaged strategy) drops to ``eps`` or
    the iteration budget runs out; the report carries the certified gap
    either way.  Step size eta_t = sqrt(8 ln m / t), averaged strategies."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    A = gm.payoff
    m, k = A.shape
    ln_m, ln_k = math.log(max(m, 2)), math.log(max(k, 2))
    S_row = np.zeros(m)
    S_col = np.zeros(k)
    sum_row = np.zeros(m)
    sum_col = np.zeros(k)
    p = np.full(m, 1.0 / m)
    q = np.full(k, 1.0 / k)
    t = 0
    while t < max_iters:
        t += 1
        S_row += A @ q
        S_col += p @ A
        sum_row += p
        sum_col += q
        if t % check_every == 0 or t == max_iters:
            if S_row.max() / t - S_col.min() / t <= eps:
                break
        zr = math.sqrt(8.0 * ln_m / (t + 1.0)) * S_row
        zr -= zr.max()
        p = np.exp(zr)
        p /= p.sum()
        zc = -math.sqrt(8.0 * ln_k / (t + 1.0)) * S_col
        zc -= zc.max()
        q = np.exp(zc)
        q /= q.sum()
    return _report(S_row, S_col, sum_row, sum_col, t)


def _mw_threshold_numpy(kind: int, grid: np.ndarray, eps: float, max_iters: int, check_every: int):
    """Pure-numpy twin of the numba loop in ``_mw_numba``."""
    m = grid.size
    one_m = 1.0 - grid
    inv_one_m = 1.0 / one_m
    ln_m = math.log(m)
    S_row = np.zeros(m)
    S_col = np.zeros(m)
    sum_row = np.zeros(m)
    sum_col = np.zeros(m)
    p = np.full(m, 1.0 / m)
    q = np.full(m, 1.0 / m)
    t = 0
    while t < max_iters:
        t += 1
        if kind == 0:
            w = q * one_m
            pay_row = one_m - w[::-1].cumsum()[::-1]
            pay_col = (p @ one_m) - one_m * p.cumsum()
        else:
            pay_row = one_m * (q * inv_one_m).cumsum()
            w = p * one_m
            pay_col = inv_one_m * w[::-1].cumsum()[::-1]
        S_row += pay_row
        S_col += pay_col
        sum_row += p
        sum_col += q
        if t % check_every == 0 or t == max_iters:
            if S_row.max() / t - S_col.min() / t <= eps:
                break
        eta = math.sqrt(8.0 * ln_m / (t + 1.0))
        zr = eta * S_row
        zr -= zr.max()
        p = np.exp(zr)
        p /= p.sum()
        zc = -eta * S_col
        zc -= zc.max()
        q = np.exp(zc)
        q /= q.sum()
    return S_row, S_col, sum_row, sum_col, t


def solve_threshold_game(
    kernel_id: str,
    alpha: float,
    m: int = 2001,
    eps: float = 2e-3,
    max_iters: int = DEFAULT_MAX_ITERS,
    check_every: int = DEFAULT_CHECK_EVERY,
    backend: str | None = None,
) -> GameReport:
    """Solve the discretized threshold game on [0, 1 - alpha] with the O(m)
    structured loop.  ``kernel_id`` is 'g' (rows = adversary thresholds x,
    maximizing) or 'h' (rows = sender thresholds y, maximizing)."""
    kind = _kernel_kind(kernel_id)
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if m < 2:
        raise ValueError("need at least a 2-point grid")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    grid = np.linspace(0.0, 1.0 - alpha, m)
    if _backend.resolve_backend(backend) == "numba":
        from . import _mw_numba

        out = _mw_numba.mw_threshold_loop(kind, grid, eps, max_iters, check_every)
    else:
        out = _mw_threshold_numpy(kind, grid, eps, max_iters, check_every)
    return _report(*out)


def _kernel_kind(kernel_id: str) -> int:
    if kernel_id == "g":
        return 0
    if kernel_id == "h":
        return 1
    raise ValueError("kernel_id must be 'g' or 'h'")


def _binned_masses(strategy: MixedThreshold, edges: np.ndarray) -> np.ndarray:
    cdfs = strategy.cdf(edges)
    masses = np.diff(cdfs)
    masses[0] += float(strategy.cdf(edges[0]))  # left edge atom belongs to bin 0
    return masses


def _grid_binned(weights: np.ndarray, grid: np.ndarray, edges: np.ndarray) -> np.ndarray:
    idx = np.clip(np.searchsorted(edges, grid, side="left") - 1, 0, edges.size - 2)
    out = np.zeros(edges.size - 1)
    np.add.at(out, idx, weights)
    return out


@dataclass(frozen=True)
class LemmaCheck:
    """Solver value vs. the analytic game value, plus strategy-shape
    diagnostics (binned total-variation distances per player)."""

    kernel_id: str
    alpha: float
    m: int
    report: GameReport
    analytic_value: float
    abs_error: float
    tv_row: float
    tv_col: float

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel_id,
            "alpha": self.alpha,
            "m": self.m,
            "analytic_value": self.analytic_value,
            "abs_error": self.abs_error,
            "tv_row": self.tv_row,
            "tv_col": self.tv_col,
            "report": self.report.to_dict(),
        }


def verify_lemma(
    kernel_id: str,
    alpha: float,
    m: int = 2001,
    eps: float = 2e-3,
    max_iters: int = DEFAULT_MAX_ITERS,
    bins: int = 25,
    backend: str | None = None,
) -> LemmaCheck:
    """Solve the discretized game and compare against the analytic value and
    optimal strategies of the corresponding continuum game."""
    report = solve_threshold_game(
        kernel_id, alpha, m=m, eps=eps, max_iters=max_iters, backend=backend
    )
    if kernel_id == "g":
        analytic = reg_mon_value(alpha)
        row_opt, col_opt = adversary_opt(alpha), sender_opt(alpha)
    else:
        analytic = apr_mon_value(alpha)
        row_opt, col_opt = approx_sender_opt(alpha), approx_adversary_opt(alpha)
    grid = np.linspace(0.0, 1.0 - alpha, m)
    edges = np.linspace(0.0, 1.0 - alpha, bins + 1)
    tv_row = 0.5 * float(
        np.abs(_grid_binned(report.row_strategy, grid, edges) - _binned_masses(row_opt, edges)).sum()
    )
    tv_col = 0.5 * float(
        np.abs(_grid_binned(report.col_strategy, grid, edges) - _binned_masses(col_opt, edges)).sum()
    )
    return LemmaCheck(
        kernel_id=kernel_id,
        alpha=float(alpha),
        m=int(m),
        report=report,
        analytic_value=analytic,
        abs_error=abs(report.value_estimate - analytic),
        tv_row=tv_row,
        tv_col=tv_col,
    )
