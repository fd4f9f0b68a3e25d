"""Command-line front end: instance solving, robust scheme computation,
sampling, verification suites, experiment sweeps and figure-data emission.

Every command is deterministic given (instance, seed, grid, eps): outputs
embed a manifest (command, config, library version) and no timestamps, so
reruns produce byte-identical files.  Exit codes: 0 pass, 1 internal error,
2 bad input, 3 timeout or failed suite.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .approx import (
    approx_adversary_opt,
    approx_sender_opt,
    apr_mon_value,
    expected_h_vs_x,
    expected_h_vs_y,
)
from .arbitrary import (
    HalfPlaneAdoption,
    TERNARY_CENTROID,
    TERNARY_VERTICES,
    batch_knapsack_values,
    batch_scheme_utilities,
    prop1_adversary,
    prop1_scheme,
    prop1_threshold_sweep,
    signed_exponential_utilities,
    structured_utilities,
    ternary_mass_in,
    ternary_sweep,
    thm2_lower_adoption_prob,
    thm2_lower_bound_check,
    thm2_upper_scheme,
)
from .core import (
    FiniteScheme,
    MixedThreshold,
    Prior,
    load_instance,
    sample_mixed,
    scheme_to_dict,
)
from .matrix_game import verify_lemma
from .monotone_regret import (
    adversary_opt,
    binary_reduction_uprime,
    expected_g_vs_x,
    expected_g_vs_y,
    reg_mon_value,
    sender_opt,
)
from .multidim import (
    GridInstance,
    grid_instance_from_dict,
    md_regret_bound_check,
    median_knapsack_scheme,
    sample_monotone_utility,
)
from .standard import concavify_at, optimal_knapsack, optimal_scheme

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_BAD_INPUT = 2
EXIT_FAILED = 3

_INV_E = 1.0 / math.e
SUITES = ("lemma4", "lemma5", "prop1", "prop2", "thm2", "prop4", "all")


# ---------------------------------------------------------------------------
# Output plumbing
# ---------------------------------------------------------------------------

def _manifest(args: argparse.Namespace) -> dict:
    config = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "command") and v is not None
    }
    return {"command": args.command, "config": config, "version": __version__}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _emit_json(payload: dict, args: argparse.Namespace) -> None:
    payload = {"manifest": _manifest(args), **payload}
    _emit(json.dumps(payload, indent=2, allow_nan=False) + "\n", args.out)


def _csv_text(header: list[str], rows, args: argparse.Namespace, extra: dict | None = None) -> str:
    buf = io.StringIO()
    man = _manifest(args)
    buf.write(f"# robust-persuasion {man['version']}\n")
    buf.write(f"# command: {man['command']}\n")
    for k, v in man["config"].items():
        buf.write(f"# {k}: {v}\n")
    for k, v in (extra or {}).items():
        buf.write(f"# {k}: {v}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    return buf.getvalue()


def _reject_constant(token: str):
    raise ValueError(f"non-finite number {token!r} is not accepted")


def _load_json_file(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh, parse_constant=_reject_constant)


def _strategy_dict(m: MixedThreshold) -> dict:
    return {
        "atoms": [{"location": loc, "weight": w} for loc, w in m.atoms],
        "density_pieces": [
            {"lo": pc.lo, "hi": pc.hi, "coef": pc.coef, "power": pc.power}
            for pc in m.density_pieces
        ],
    }


def _alpha_from_args(args: argparse.Namespace) -> float:
    if args.alpha is not None:
        return float(args.alpha)
    if args.instance is not None:
        mu, _ = load_instance(_load_json_file(args.instance))
        return mu.top_mass
    raise ValueError("either --alpha or --instance must supply the top-state mass")


def _optimal_strategy(mode: str, alpha: float) -> tuple[float, MixedThreshold]:
    if mode == "regret":
        return reg_mon_value(alpha), sender_opt(alpha)
    return apr_mon_value(alpha), approx_sender_opt(alpha)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_solve(args: argparse.Namespace) -> int:
    mu, u = load_instance(_load_json_file(args.instance))
    sol = optimal_knapsack(mu, u)
    scheme = optimal_scheme(mu, u)
    _emit_json(
        {
            "knapsack": {
                "threshold_x": sol.threshold_x,
                "optimal_utility": sol.optimal_utility,
                "ordering": [int(i) for i in sol.ordering.order],
            },
            "scheme": scheme_to_dict(scheme),
        },
        args,
    )
    return EXIT_OK


def cmd_robust(args: argparse.Namespace) -> int:
    alpha = _alpha_from_args(args)
    value, strategy = _optimal_strategy(args.mode, alpha)
    payload = {
        "mode": args.mode,
        "alpha": alpha,
        "value": value,
        "strategy": _strategy_dict(strategy),
    }
    if args.sample:
        draws = sample_mixed(strategy, args.seed, size=args.sample)
        payload["samples"] = [float(v) for v in np.atleast_1d(draws)]
    _emit_json(payload, args)
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    alpha = _alpha_from_args(args)
    _, strategy = _optimal_strategy(args.mode, alpha)
    draws = np.atleast_1d(sample_mixed(strategy, args.seed, size=args.sample))
    if args.format == "json":
        _emit_json({"mode": args.mode, "alpha": alpha, "samples": [float(v) for v in draws]}, args)
    else:
        rows = [(i, float(v)) for i, v in enumerate(draws)]
        _emit(_csv_text(["index", "threshold"], rows, args), args.out)
    return EXIT_OK


def cmd_figures(args: argparse.Namespace) -> int:
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = args.grid
    alpha = args.alpha if args.alpha is not None else 0.25

    mus = np.unique(np.concatenate([np.linspace(1e-3, 1.0, grid), [_INV_E]]))
    rows = [(float(m), reg_mon_value(m)) for m in mus]
    (out_dir / "regret_curve.csv").write_text(
        _csv_text(["mu_n", "reg_mon"], rows, args)
    )

    strategy = sender_opt(alpha)
    pc = strategy.density_pieces[0]
    ys = np.linspace(pc.lo, pc.hi, grid)
    rows = [(float(y), float(pc.coef / (1.0 - y) ** pc.power)) for y in ys]
    atoms = "; ".join(f"{w!r}@{loc!r}" for loc, w in strategy.atoms) or "none"
    (out_dir / "density_curve.csv").write_text(
        _csv_text(["y", "density"], rows, args, extra={"atoms": atoms})
    )

    rows = [(float(m), apr_mon_value(m)) for m in mus]
    (out_dir / "apr_curve.csv").write_text(_csv_text(["mu_n", "apr_mon"], rows, args))

    uprime = binary_reduction_uprime(alpha)
    qs = np.unique(np.concatenate([np.linspace(0.0, 1.0, grid), uprime.xs]))
    rows = [
        (float(q), float(uprime(q)), float(concavify_at(uprime, q)[0])) for q in qs
    ]
    (out_dir / "uprime_curve.csv").write_text(
        _csv_text(["q", "uprime", "concavification"], rows, args)
    )

    # regret game: analytic value vs best-response grid search per alpha
    xs = np.linspace(0.0, 1.0, 10_001)
    rows = []
    for a in np.linspace(0.02, 0.98, 49):
        a = float(a)
        analytic = reg_mon_value(a)
        regrets = np.where(xs <= 1.0 - a, expected_g_vs_x(xs, sender_opt(a)), 0.0)
        br = float(regrets.max())
        rows.append((a, analytic, br, br - analytic))
    (out_dir / "regret_game_curve.csv").write_text(
        _csv_text(["alpha", "analytic_value", "best_response_value", "gap"], rows, args)
    )

    rows = [
        (n, 1.0 - 2.0 / math.sqrt(n), 1.0 - 1.0 / (4.0 * n * n))
        for n in range(2, 101)
    ]
    (out_dir / "thm2_bounds_curve.csv").write_text(
        _csv_text(["n", "bound_lb", "bound_ub"], rows, args)
    )

    if args.convergence:
        rows = []
        for m in (251, 501, 1001, 2001):
            chk = verify_lemma("g", alpha, m=m, eps=args.eps or 2e-3)
            rows.append(
                (
                    m,
                    chk.report.value_estimate,
                    chk.report.duality_gap,
                    chk.analytic_value,
                    chk.abs_error,
                )
            )
        (out_dir / "convergence_curve.csv").write_text(
            _csv_text(["m", "value", "gap", "analytic", "error"], rows, args)
        )
    return EXIT_OK


def cmd_ternary_sweep(args: argparse.Namespace) -> int:
    rec = ternary_sweep(args.grid)
    rows = (
        (float(r.d), float(r.e), int(r.assignment), float(r.regret)) for r in rec
    )
    text = _csv_text(
        ["d", "e", "vertex_assignment", "regret"],
        rows,
        args,
        extra={"sup_regret": repr(float(rec.regret.max()))},
    )
    _emit(text, args.out)
    return EXIT_OK


def cmd_md_sweep(args: argparse.Namespace) -> int:
    if args.instance is not None:
        inst = grid_instance_from_dict(_load_json_file(args.instance))
        regret, bound = md_regret_bound_check(inst)
        _emit_json({"regret": regret, "bound": bound}, args)
        return EXIT_OK
    side = args.n if args.n is not None else 3
    dims = (side, side)
    bound = 1.0 - 0.5 ** len(dims)
    rng = np.random.default_rng(args.seed)
    rows = []
    for p_idx in range(args.sample):
        marginals = tuple(rng.dirichlet(np.ones(d)) for d in dims)
        inst = GridInstance(dims=dims, marginals=marginals)
        scheme = median_knapsack_scheme(inst)
        mu = Prior(inst.joint_probs().ravel())
        utilities = np.vstack(
            [
                sample_monotone_utility(dims, int(rng.integers(2**63))).ravel()
                for _ in range(args.grid)
            ]
        )
        regrets = batch_knapsack_values(mu, utilities) - batch_scheme_utilities(
            scheme, utilities
        )
        rows += [
            (p_idx, u_idx, float(r), bound) for u_idx, r in enumerate(regrets)
        ]
    _emit(
        _csv_text(["prior_index", "utility_index", "regret", "bound"], rows, args),
        args.out,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------

class _Deadline:
    def __init__(self, seconds: float):
        self.t0 = time.monotonic()
        self.seconds = seconds

    def expired(self) -> bool:
        return time.monotonic() - self.t0 > self.seconds


def _game_checks(kernel: str, alphas, grid: int, eps: float, reports: list) -> list[tuple]:
    checks = []
    for a in alphas:
        if kernel == "g":
            value = reg_mon_value(a)
            strat_x, strat_y = adversary_opt(a), sender_opt(a)
            vs_x, vs_y = expected_g_vs_x, expected_g_vs_y
        else:
            value = apr_mon_value(a)
            strat_x, strat_y = approx_adversary_opt(a), approx_sender_opt(a)
            vs_x, vs_y = expected_h_vs_x, expected_h_vs_y
        support_hi = strat_y.support_max
        pts = np.linspace(0.0, support_hi, 100)
        err = max(
            float(np.abs(vs_x(pts, strat_y) - value).max()),
            float(np.abs(vs_y(strat_x, pts) - value).max()),
        )
        checks.append(
            (f"indifference {kernel} alpha={a:.4f}", "<= 1e-9", err, err <= 1e-9)
        )
        chk = verify_lemma(kernel, a, m=grid, eps=eps)
        reports.append(chk.to_dict())
        ok = chk.report.duality_gap <= eps and chk.abs_error <= 5e-3
        checks.append(
            (
                f"game value {kernel} alpha={a:.4f} m={grid}",
                f"{chk.analytic_value:.7f} +- 5e-3, gap <= {eps:g}",
                chk.report.value_estimate,
                ok,
            )
        )
    return checks


def _suite_lemma4(args, reports) -> list[tuple]:
    alphas = [args.alpha] if args.alpha is not None else [0.25, _INV_E, 0.5]
    return _game_checks("g", alphas, args.grid or 2001, args.eps or 2e-3, reports)


def _suite_lemma5(args, reports) -> list[tuple]:
    alphas = [args.alpha] if args.alpha is not None else [0.25, _INV_E, 0.5]
    return _game_checks("h", alphas, args.grid or 2001, args.eps or 2e-3, reports)


def _suite_prop1(args, reports) -> list[tuple]:
    rng = np.random.default_rng(args.seed)
    worst_lo, worst_hi = 1.0, 0.0
    for _ in range(50):
        mu1 = float(rng.uniform(0.02, 0.98))
        mu = Prior([mu1, 1.0 - mu1])
        scheme = prop1_scheme(mu)
        regret = max(
            prop1_adversary(scheme, mu)[1],
            prop1_threshold_sweep(scheme, mu, step=1e-4),
        )
        worst_lo, worst_hi = min(worst_lo, regret), max(worst_hi, regret)
    ok = 0.5 - 1e-3 <= worst_lo and worst_hi <= 0.5 + 1e-6
    return [
        ("prop1 scheme regret (50 priors)", "in [0.499, 0.5+1e-6]", (worst_lo, worst_hi), ok)
    ]


def _suite_prop2(args, reports) -> list[tuple]:
    grid = args.grid or 400
    rec = ternary_sweep(grid)
    sup = float(rec.regret.max())
    ok_sup = 0.49 <= sup <= 0.501
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(1000):
        theta = rng.uniform(0.0, 2.0 * math.pi)
        normal = (TERNARY_VERTICES - TERNARY_CENTROID) @ np.array(
            [math.cos(theta), math.sin(theta)]
        )
        mass = ternary_mass_in(HalfPlaneAdoption(normal))
        worst = max(worst, abs(mass - 0.5))
    return [
        (f"ternary sweep sup regret ({grid}x{grid}x3)", "in [0.49, 0.501]", sup, ok_sup),
        ("centroid half-plane mass (1000 lines)", "= 0.5 +- 1e-9", worst, worst <= 1e-9),
    ]


def _suite_thm2(args, reports) -> list[tuple]:
    checks = []
    worst = 0.0
    for n in range(16, 101):
        cap = 1.0 / math.sqrt(n)
        for s in range(1, n + 1):
            worst = max(worst, thm2_lower_adoption_prob(n, s) - cap)
    checks.append(("adoption prob <= 1/sqrt(n), n=16..100", "<= 0", worst, worst <= 0.0))

    n = args.n if args.n is not None else 16
    mu = Prior(np.full(n, 1.0 / n))
    full_rev = FiniteScheme(np.eye(n), mu.probs.copy())
    u_lb, s_ub = thm2_lower_bound_check(n, full_rev)
    bound = 1.0 - 2.0 / math.sqrt(n)
    checks.append(
        (
            f"full-revelation witness n={n}",
            f"regret >= {bound:.4f}",
            u_lb - s_ub,
            u_lb - s_ub >= bound - 1e-12,
        )
    )

    rng = np.random.default_rng(args.seed)
    worst_excess = -1.0
    for n in range(2, 11):
        for mu_vec in (rng.dirichlet(np.ones(n)), _spiky_prior(n)):
            mu_n = Prior(mu_vec)
            scheme = thm2_upper_scheme(mu_n)
            utilities = np.vstack(
                [
                    signed_exponential_utilities(n, 10_000, int(rng.integers(2**63))),
                    structured_utilities(mu_n),
                ]
            )
            regrets = batch_knapsack_values(mu_n, utilities) - batch_scheme_utilities(
                scheme, utilities
            )
            excess = float(regrets.max()) - (1.0 - 1.0 / (4.0 * n * n))
            worst_excess = max(worst_excess, excess)
    checks.append(
        (
            "pairing scheme regret vs 1 - 1/(4n^2), n=2..10",
            "excess <= 1e-9",
            worst_excess,
            worst_excess <= 1e-9,
        )
    )
    return checks


def _spiky_prior(n: int) -> np.ndarray:
    probs = np.full(n, 0.1 / max(n - 1, 1))
    probs[0] = 1.0 - probs[1:].sum()
    return probs


def _suite_prop4(args, reports) -> list[tuple]:
    rng = np.random.default_rng(args.seed)
    checks = []
    for dims, priors, utils, label in (
        ((3, 3), 20, 1000, "k=2 dims=(3,3)"),
        ((3, 3, 3), 5, 200, "k=3 dims=(3,3,3)"),
    ):
        bound = 1.0 - 0.5 ** len(dims)
        worst = -1.0
        for _ in range(priors):
            marginals = tuple(rng.dirichlet(np.ones(d)) for d in dims)
            inst = GridInstance(dims=dims, marginals=marginals)
            scheme = median_knapsack_scheme(inst)
            mu = Prior(inst.joint_probs().ravel())
            utilities = np.vstack(
                [
                    sample_monotone_utility(dims, int(rng.integers(2**63))).ravel()
                    for _ in range(utils)
                ]
            )
            regrets = batch_knapsack_values(mu, utilities) - batch_scheme_utilities(
                scheme, utilities
            )
            worst = max(worst, float(regrets.max()) - bound)
        checks.append(
            (f"median scheme regret {label}", "excess <= 1e-9", worst, worst <= 1e-9)
        )
    return checks


_SUITE_RUNNERS = {
    "lemma4": _suite_lemma4,
    "lemma5": _suite_lemma5,
    "prop1": _suite_prop1,
    "prop2": _suite_prop2,
    "thm2": _suite_thm2,
    "prop4": _suite_prop4,
}


def cmd_verify(args: argparse.Namespace) -> int:
    names = list(_SUITE_RUNNERS) if args.suite == "all" else [args.suite]
    deadline = _Deadline(args.timeout)
    rows = []
    reports: list = []
    timed_out = False
    for name in sorted(names):
        if deadline.expired():
            timed_out = True
            break
        for check in _SUITE_RUNNERS[name](args, reports):
            rows.append((name, *check))
    all_ok = all(ok for *_, ok in rows) and not timed_out
    if args.format == "json":
        payload = {
            "passed": all_ok,
            "timed_out": timed_out,
            "checks": [
                {
                    "suite": suite,
                    "check": label,
                    "expected": str(expected),
                    "measured": str(measured),
                    "passed": ok,
                }
                for suite, label, expected, measured, ok in rows
            ],
            "reports": reports,
        }
        _emit_json(payload, args)
    else:
        width = max((len(r[1]) for r in rows), default=20)
        lines = []
        for suite, label, expected, measured, ok in rows:
            status = "PASS" if ok else "FAIL"
            lines.append(
                f"[{status}] {suite:7s} {label:<{width}s} expected {expected}; measured {measured}"
            )
        if timed_out:
            lines.append(f"[FAIL] timeout after {args.timeout:g}s; remaining suites skipped")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if all_ok else EXIT_FAILED


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robust-persuasion",
        description="Robust signaling schemes for binary-action persuasion.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, seed=True, out=True, fmt=False):
        if seed:
            p.add_argument("--seed", type=int, default=0, help="root RNG seed")
        if out:
            p.add_argument("--out", help="output path (default: stdout)")
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("solve", help="optimal scheme for a known utility")
    p.add_argument("--instance", required=True, help="JSON instance path")
    common(p, seed=False)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("robust", help="analytic value and optimal mixed threshold scheme")
    p.add_argument("--mode", choices=("regret", "approx"), required=True)
    p.add_argument("--alpha", type=float, help="top-state prior mass")
    p.add_argument("--instance", help="JSON instance path supplying the prior")
    p.add_argument("--sample", type=int, help="also draw this many thresholds")
    common(p)
    p.set_defaults(func=cmd_robust)

    p = sub.add_parser("sample", help="draw thresholds from the optimal scheme")
    p.add_argument("--mode", choices=("regret", "approx"), default="regret")
    p.add_argument("--alpha", type=float)
    p.add_argument("--instance")
    p.add_argument("--sample", type=int, default=1, help="number of draws")
    common(p, fmt=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="run a named acceptance suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--timeout", type=float, default=600.0, help="seconds per run")
    p.add_argument(
        "--format",
        choices=("text", "json"),
        default="text",
        help="pass/fail table or full JSON reports",
    )
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("figures", help="emit figure-data CSV curves")
    p.add_argument("--alpha", type=float, help="top-state mass for the density/uprime curves")
    p.add_argument("--grid", type=int, default=513, help="points per curve")
    p.add_argument("--eps", type=float, help="solver gap for --convergence")
    p.add_argument(
        "--convergence",
        action="store_true",
        help="also solve the regret game at m in {251,...,2001} (slow)",
    )
    p.add_argument("--out", help="output directory (default: .)")
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("ternary-sweep", help="regret sweep over ternary cutting lines")
    p.add_argument("--grid", type=int, default=400)
    common(p, seed=False)
    p.set_defaults(func=cmd_ternary_sweep)

    p = sub.add_parser("md-sweep", help="median-scheme regret sweep on product priors")
    p.add_argument("--instance", help="grid-instance JSON: check just this one")
    p.add_argument("--n", type=int, help="levels per attribute (default 3)")
    p.add_argument("--sample", type=int, default=20, help="number of priors")
    p.add_argument("--grid", type=int, default=1000, help="utilities per prior")
    common(p)
    p.set_defaults(func=cmd_md_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
