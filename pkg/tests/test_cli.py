import json
import math

import numpy as np
import pytest

from robust_persuasion.cli import main


def _write_instance(path, prior, utility):
    path.write_text(json.dumps({"prior": prior, "utility": utility}))
    return str(path)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_knapsack_example(tmp_path, capsys):
    inst = _write_instance(tmp_path / "i.json", [0.2, 0.3, 0.5], [-2.0, -2.0, 1.0])
    code, out, _ = _run(capsys, ["solve", "--instance", inst])
    assert code == 0
    payload = json.loads(out)
    assert payload["knapsack"]["threshold_x"] == pytest.approx(0.25)
    assert payload["knapsack"]["optimal_utility"] == pytest.approx(0.75)
    assert payload["manifest"]["command"] == "solve"


def test_solve_all_nonnegative(tmp_path, capsys):
    inst = _write_instance(tmp_path / "i.json", [0.5, 0.5], [0.0, 1.0])
    code, out, _ = _run(capsys, ["solve", "--instance", inst])
    assert code == 0
    assert json.loads(out)["knapsack"]["optimal_utility"] == 1.0


def test_solve_rejects_zero_mass_prior(tmp_path, capsys):
    inst = _write_instance(tmp_path / "i.json", [0.0, 1.0], [1.0, 1.0])
    code, _, err = _run(capsys, ["solve", "--instance", inst])
    assert code == 2
    assert "prior entry must be positive" in err


def test_solve_rejects_nan(tmp_path, capsys):
    (tmp_path / "i.json").write_text('{"prior": [0.5, 0.5], "utility": [NaN, 1.0]}')
    code, _, err = _run(capsys, ["solve", "--instance", str(tmp_path / "i.json")])
    assert code == 2
    assert "non-finite" in err


def test_robust_regret_small_alpha(capsys):
    code, out, _ = _run(capsys, ["robust", "--mode", "regret", "--alpha", "0.25"])
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == pytest.approx(0.3678794, abs=1e-7)
    piece = payload["strategy"]["density_pieces"][0]
    assert piece["lo"] == 0.0
    assert piece["hi"] == pytest.approx(1.0 - 1.0 / math.e)
    assert payload["strategy"]["atoms"] == []


def test_robust_regret_large_alpha_has_atom(capsys):
    code, out, _ = _run(capsys, ["robust", "--mode", "regret", "--alpha", "0.5"])
    payload = json.loads(out)
    atom = payload["strategy"]["atoms"][0]
    assert atom["location"] == 0.5
    assert atom["weight"] == pytest.approx(0.3068528, abs=1e-7)


def test_robust_approx_value(capsys):
    code, out, _ = _run(
        capsys, ["robust", "--mode", "approx", "--alpha", repr(1.0 / math.e)]
    )
    assert json.loads(out)["value"] == pytest.approx(0.5, abs=1e-12)


def test_robust_alpha_from_instance(tmp_path, capsys):
    inst = _write_instance(tmp_path / "i.json", [0.75, 0.25], [0.0, 1.0])
    code, out, _ = _run(capsys, ["robust", "--mode", "regret", "--instance", inst])
    assert json.loads(out)["alpha"] == 0.25


def test_robust_needs_alpha_or_instance(capsys):
    code, _, err = _run(capsys, ["robust", "--mode", "regret"])
    assert code == 2
    assert "alpha" in err


def test_sample_csv_deterministic(tmp_path, capsys):
    args = [
        "sample", "--mode", "regret", "--alpha", "0.25",
        "--sample", "64", "--seed", "7", "--format", "csv",
    ]
    code, _, _ = _run(capsys, args + ["--out", str(tmp_path / "a.csv")])
    assert code == 0
    code, _, _ = _run(capsys, args + ["--out", str(tmp_path / "b.csv")])
    assert code == 0
    a = (tmp_path / "a.csv").read_bytes()
    b = (tmp_path / "b.csv").read_bytes()
    assert a.replace(b"a.csv", b"") == b.replace(b"b.csv", b"")
    lines = a.decode().splitlines()
    assert "index,threshold" in lines
    values = [float(l.split(",")[1]) for l in lines if l and l[0].isdigit()]
    assert all(0.0 <= v <= 1.0 - 1.0 / math.e + 1e-12 for v in values)


def test_figures_outputs(tmp_path, capsys):
    code, _, _ = _run(
        capsys, ["figures", "--alpha", "0.25", "--grid", "101", "--out", str(tmp_path)]
    )
    assert code == 0
    names = {"regret_curve.csv", "density_curve.csv", "apr_curve.csv", "uprime_curve.csv"}
    assert names <= {p.name for p in tmp_path.iterdir()}
    reg = (tmp_path / "regret_curve.csv").read_text().splitlines()
    rows = [l.split(",") for l in reg if l and not l.startswith("#") and "mu_n" not in l]
    by_mu = {float(a): float(b) for a, b in rows}
    inv_e = 1.0 / math.e
    assert by_mu[inv_e] == pytest.approx(inv_e, abs=1e-12)
    dens = (tmp_path / "density_curve.csv").read_text().splitlines()
    drows = [l.split(",") for l in dens if l and not l.startswith("#") and "density" not in l]
    ys = [float(a) for a, _ in drows]
    fs = [float(b) for _, b in drows]
    assert ys[-1] == pytest.approx(1.0 - inv_e)
    assert fs[-1] == pytest.approx(math.e, abs=1e-12)
    assert fs[0] == pytest.approx(1.0, abs=1e-12)
    apr = (tmp_path / "apr_curve.csv").read_text().splitlines()
    arows = {float(l.split(",")[0]): float(l.split(",")[1]) for l in apr if l and not l.startswith("#") and "mu_n" not in l}
    assert arows[1.0] == 1.0
    # rerun is byte-identical
    before = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    _run(capsys, ["figures", "--alpha", "0.25", "--grid", "101", "--out", str(tmp_path)])
    after = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert before == after


def test_ternary_sweep_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = _run(capsys, ["ternary-sweep", "--grid", "40", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    sup = [l for l in lines if l.startswith("# sup_regret:")]
    assert sup and 0.4 <= float(sup[0].split(":")[1]) <= 0.501
    data = [l for l in lines if l and not l.startswith("#") and "regret" not in l]
    assert len(data) == 40 * 40 * 3


def test_md_sweep_bound_column(tmp_path, capsys):
    out = tmp_path / "md.csv"
    code, _, _ = _run(
        capsys,
        ["md-sweep", "--n", "2", "--sample", "2", "--grid", "20", "--out", str(out)],
    )
    assert code == 0
    rows = [
        l.split(",")
        for l in out.read_text().splitlines()
        if l and not l.startswith("#") and "regret" not in l
    ]
    assert len(rows) == 40
    assert all(float(r[2]) <= float(r[3]) + 1e-9 for r in rows)
    assert all(float(r[3]) == 0.75 for r in rows)


def test_figures_extra_curves(tmp_path, capsys):
    code, _, _ = _run(
        capsys, ["figures", "--alpha", "0.25", "--grid", "33", "--out", str(tmp_path)]
    )
    assert code == 0
    game = (tmp_path / "regret_game_curve.csv").read_text().splitlines()
    rows = [l.split(",") for l in game if l and not l.startswith("#") and "alpha" not in l]
    assert len(rows) == 49
    # the best-response search never beats the analytic value materially
    assert all(abs(float(r[3])) <= 1e-3 for r in rows)
    bounds = (tmp_path / "thm2_bounds_curve.csv").read_text().splitlines()
    brows = [l.split(",") for l in bounds if l and not l.startswith("#") and "bound" not in l]
    assert len(brows) == 99
    assert all(float(r[1]) <= float(r[2]) for r in brows)


def test_figures_convergence_curve(tmp_path, capsys):
    code, _, _ = _run(
        capsys,
        ["figures", "--alpha", "0.5", "--grid", "17", "--convergence",
         "--eps", "0.02", "--out", str(tmp_path)],
    )
    assert code == 0
    conv = (tmp_path / "convergence_curve.csv").read_text().splitlines()
    rows = [l.split(",") for l in conv if l and not l.startswith("#") and "analytic" not in l]
    assert [int(r[0]) for r in rows] == [251, 501, 1001, 2001]
    assert all(float(r[2]) <= 0.02 + 1e-12 for r in rows)
    assert all(float(r[4]) <= 0.02 for r in rows)


def test_md_sweep_single_instance(tmp_path, capsys):
    inst = {
        "dims": [2, 2],
        "marginals": [[0.5, 0.5], [0.25, 0.75]],
        "utility": [-1.0, 0.5, 0.0, 2.0],
    }
    (tmp_path / "g.json").write_text(json.dumps(inst))
    code, out, _ = _run(capsys, ["md-sweep", "--instance", str(tmp_path / "g.json")])
    assert code == 0
    payload = json.loads(out)
    assert payload["bound"] == 0.75
    assert payload["regret"] <= 0.75 + 1e-9


def test_verify_json_format(capsys):
    code, out, _ = _run(
        capsys,
        ["verify", "--suite", "lemma4", "--alpha", "0.5", "--grid", "101",
         "--eps", "0.01", "--format", "json"],
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] is True
    assert len(payload["checks"]) == 2
    report = payload["reports"][0]
    assert report["kernel"] == "g" and report["m"] == 101
    assert report["report"]["duality_gap"] <= 0.01


def test_verify_prop1_passes(capsys):
    code, out, _ = _run(capsys, ["verify", "--suite", "prop1"])
    assert code == 0
    assert "[PASS]" in out
    assert "[FAIL]" not in out


def test_verify_lemma4_small_grid(capsys):
    code, out, _ = _run(
        capsys,
        ["verify", "--suite", "lemma4", "--alpha", "0.5", "--grid", "201", "--eps", "5e-3"],
    )
    assert code == 0
    assert out.count("[PASS]") == 2


def test_verify_timeout_exits_3(capsys):
    code, out, _ = _run(capsys, ["verify", "--suite", "all", "--timeout", "0"])
    assert code == 3
    assert "timeout" in out


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
