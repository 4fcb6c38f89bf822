import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from compatlab._expr import ExprError, compile_expr, state_function
from compatlab.cli import FAIL, OK, SCHEMA, USAGE, main
from compatlab.paths.io import read_ensemble


def test_expr_evaluates_whitelisted_syntax():
    f = compile_expr("a * sin(x) + x ** 2 - -1", ["x"], {"a": 2.0})
    x = np.array([0.0, 1.0])
    assert np.allclose(f(x=x), 2 * np.sin(x) + x ** 2 + 1)
    assert compile_expr(3, ["x"])(x=x) == 3
    assert compile_expr("pi", [])() == pytest.approx(np.pi)


@pytest.mark.parametrize("src", ["__import__('os')", "x.real", "y", "'s'", "x if x else 1",
                                 "sin(x, out=x)", "x // 2", "(", "[1]", None])
def test_expr_rejects_everything_else(src):
    with pytest.raises(ExprError):
        compile_expr(src, ["x"])


def test_state_function_shapes():
    F = state_function([["x0", "1"], ["0", "x1"]], 2)
    out = F(np.array([[2.0, 3.0], [4.0, 5.0]]))
    assert out.shape == (2, 2, 2) and out[1, 0, 0] == 4 and out[1, 1, 1] == 5 and out[0, 0, 1] == 1
    G = state_function("x * c", 1, {"c": 3})
    assert np.array_equal(G(np.ones((4, 1))), np.full(4, 3.0))


FEW = {name: 3 for name in ("uniqueness_equivalence", "coupling_closed_form",
                             "outsourced_noise_compatible", "martingale_preserved",
                             "coupling_joint_compatible", "dual_agreement",
                             "disintegration_roundtrip", "coin_mixture")}


def run(argv, capsys):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def write_cfg(tmp_path, name, body):
    p = tmp_path / name
    p.write_text(json.dumps({"schema": SCHEMA, **body}))
    return p


def test_exact_subcommand(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "exact.json", {"trials": {**FEW, "uniqueness_equivalence": 20}})
    code, out = run(["exact", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == OK
    doc = json.loads((tmp_path / "o" / "exact.json").read_text())
    assert doc["passed"] and doc["checks"][0]["name"] == "zeta_counterexample"
    assert "wall_seconds" in json.loads(out.out) and "wall_seconds" not in doc


def test_exact_with_scenario_and_csv(tmp_path, capsys):
    sc = tmp_path / "sc.json"
    sc.write_text(json.dumps({"schema": "compatlab.scenario/1",
                              "measure": [[[1], [0], "1/2"], [[0], [1], "1/2"]],
                              "structure": {"prefix": 1}, "checks": ["adapted"]}))
    cfg = write_cfg(tmp_path, "e.json", {"subcommand": "exact", "scenarios": ["sc.json"],
                                         "trials": FEW})
    code, out = run(["exact", "--config", cfg, "--out", tmp_path / "o", "--format", "csv"], capsys)
    assert code == OK
    rows = list(csv.DictReader(out.out.splitlines()))
    assert rows[0]["check"] == "zeta_counterexample"
    doc = json.loads((tmp_path / "o" / "exact.json").read_text())
    assert doc["scenarios"][0]["file"] == "sc.json" and doc["scenarios"][0]["passed"]


def test_exact_failing_scenario_exits_one(tmp_path, capsys):
    sc = tmp_path / "bad.json"
    sc.write_text(json.dumps({"schema": "compatlab.scenario/1",
                              "measure": [[[b, b], [a, b], "1/4"] for a in (0, 1) for b in (0, 1)],
                              "structure": {"prefix": 2}, "checks": ["compatibility"]}))
    cfg = write_cfg(tmp_path, "e.json", {"scenarios": [str(sc)], "trials": FEW})
    code, _ = run(["exact", "--config", cfg, "--out", tmp_path / "o"], capsys)
    assert code == FAIL


@pytest.mark.parametrize("argv", [
    ["exact", "--seed", "-1"],
    ["exact", "--config", "missing.json"],
    ["nonsense"],
    ["simulate", "--paths", "0"],
])
def test_usage_errors(tmp_path, capsys, argv):
    code, _ = run(argv + ["--out", tmp_path / "o"] if argv[0] != "nonsense" else argv, capsys)
    assert code == USAGE


def test_config_schema_and_subcommand_mismatch(tmp_path, capsys):
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"schema": "other"}))
    assert run(["exact", "--config", bad], capsys)[0] == USAGE
    other = write_cfg(tmp_path, "d.json", {"subcommand": "bench"})
    assert run(["exact", "--config", other], capsys)[0] == USAGE
    trials = write_cfg(tmp_path, "t.json", {"trials": {"nope": 1}})
    assert run(["exact", "--config", trials], capsys)[0] == USAGE


def test_simulate_gbm_and_reproducible(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "s.json", {"model": {"kind": "gbm", "mu": 0.1, "sigma": 0.2},
                                         "paths": 4000, "steps": 32})
    code, out = run(["simulate", "--config", cfg, "--out", tmp_path / "a", "--seed", 3], capsys)
    assert code == OK and json.loads(out.out)["mean_check"]["passed"]
    run(["simulate", "--config", cfg, "--out", tmp_path / "b", "--seed", 3], capsys)
    for name in ("solution.npy", "solution.json", "driver.npy", "driver.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    X = read_ensemble(tmp_path / "a" / "solution.json")
    assert X.values.shape == (4000, 33, 1) and X.provenance["seed"] == 3


def test_simulate_expression_models(tmp_path, capsys):
    models = [
        {"kind": "ito", "sigma": "s", "drift": "-x", "params": {"s": 0.5}, "x0": 1.0},
        {"kind": "levy", "rate": 2.0, "jump_values": [0.5, 2.0], "jump_probs": [0.5, 0.5],
         "integrand": "1 / (1 + x ** 2)"},
        {"kind": "timechange", "beta": ["1 + sin(x) ** 2"]},
        {"kind": "brownian", "dims": 2},
    ]
    for i, m in enumerate(models):
        cfg = write_cfg(tmp_path, f"m{i}.json", {"model": m, "paths": 200, "steps": 16})
        code, out = run(["simulate", "--config", cfg, "--out", tmp_path / f"o{i}"], capsys)
        assert code == OK, (m, out.err)
        assert read_ensemble(tmp_path / f"o{i}" / "solution.json").n_paths == 200
    assert "mean_jumps" in json.loads((tmp_path / "o1" / "solution.json").read_text())["summary"]


def test_simulate_csv_ensembles(tmp_path, capsys):
    code, _ = run(["simulate", "--paths", 5, "--steps", 4, "--out", tmp_path / "o", "--format", "csv"],
                  capsys)
    assert code == OK and (tmp_path / "o" / "solution.csv").exists()
    assert read_ensemble(tmp_path / "o" / "solution.json").values.shape == (5, 5, 1)


@pytest.mark.parametrize("model", [{"kind": "warp"}, {"kind": "ito", "sigma": "import os"},
                                   {"kind": "levy", "rate": -1}])
def test_simulate_bad_models(tmp_path, capsys, model):
    cfg = write_cfg(tmp_path, "s.json", {"model": model, "paths": 10, "steps": 4})
    assert run(["simulate", "--config", cfg, "--out", tmp_path / "o"], capsys)[0] == USAGE


@pytest.mark.filterwarnings("ignore:overflow encountered")
def test_simulate_solver_failure_exits_one(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "s.json", {"model": {"kind": "ito", "drift": "exp(exp(exp(x)))", "x0": 3},
                                         "paths": 10, "steps": 4})
    assert run(["simulate", "--config", cfg, "--out", tmp_path / "o"], capsys)[0] == FAIL


def test_diagnose_controls(tmp_path, capsys):
    base = {"paths": 3000, "steps": 32, "structure": {"kind": "temporal", "times": [0.5]}}
    anti = write_cfg(tmp_path, "a.json", {**base, "control": "anticipating", "expect": "reject"})
    code, out = run(["diagnose", "--config", anti, "--out", tmp_path / "a"], capsys)
    assert code == OK and json.loads(out.out)["rejections"] > 0
    with open(tmp_path / "a" / "report.csv") as fh:
        assert next(csv.reader(fh))[:3] == ["alpha", "h_id", "mse_y"]
    ad = write_cfg(tmp_path, "b.json", {**base, "control": "adapted",
                                        "h": [{"kind": "clip", "from": 0.5, "to": 1.0}]})
    code, out = run(["diagnose", "--config", ad, "--out", tmp_path / "b", "--format", "csv"], capsys)
    assert code == OK and "decision" in out.out.splitlines()[0]
    wrong = write_cfg(tmp_path, "c.json", {**base, "control": "anticipating"})
    assert run(["diagnose", "--config", wrong, "--out", tmp_path / "c"], capsys)[0] == FAIL


def test_diagnose_from_files_and_provenance(tmp_path, capsys):
    sim = write_cfg(tmp_path, "s.json", {"model": {"kind": "ito", "sigma": "1", "drift": "-x"},
                                         "paths": 1000, "steps": 16})
    run(["simulate", "--config", sim, "--out", tmp_path / "s1"], capsys)
    run(["simulate", "--config", sim, "--out", tmp_path / "s2", "--seed", 9], capsys)
    good = write_cfg(tmp_path, "d.json", {"x": "s1/solution.json", "y": "s1/driver.json",
                                          "structure": {"kind": "rc", "times": [0.5], "eps": 0.2, "r": 0.1}})
    assert run(["diagnose", "--config", good, "--out", tmp_path / "d"], capsys)[0] == OK
    mixed = write_cfg(tmp_path, "m.json", {"x": "s1/solution.json", "y": "s2/driver.json"})
    code, out = run(["diagnose", "--config", mixed, "--out", tmp_path / "m"], capsys)
    assert code == USAGE and "provenance" in out.err


@pytest.mark.parametrize("body", [{}, {"control": "psychic"}, {"control": "adapted", "expect": "maybe"},
                                  {"control": "adapted", "test": {"bootstrap": 5}},
                                  {"control": "adapted", "structure": {"kind": "fractal"}},
                                  {"control": "adapted", "h": [{"kind": "cube"}]},
                                  {"x": "nope.json", "y": "nope.json"}])
def test_diagnose_usage_errors(tmp_path, capsys, body):
    cfg = write_cfg(tmp_path, "d.json", {"paths": 200, "steps": 8, **body})
    assert run(["diagnose", "--config", cfg, "--out", tmp_path / "o"], capsys)[0] == USAGE


def test_bench_ladders(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "b.json", {"ladder": [8, 16, 32, 64], "paths": 400,
                                         "expect_slope": [-0.8, -0.2]})
    code, out = run(["bench", "--config", cfg, "--out", tmp_path / "b"], capsys)
    doc = json.loads((tmp_path / "b" / "bench.json").read_text())
    assert code == OK and doc["decay_rate"] == -doc["slope"]
    with open(tmp_path / "b" / "bench.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["n"]) for r in rows] == [8, 16, 32, 64]
    zero = write_cfg(tmp_path, "z.json", {"ladder": [4, 8, 16], "paths": 50, "model": "zero"})
    run(["bench", "--config", zero, "--out", tmp_path / "z"], capsys)
    assert json.loads((tmp_path / "z" / "bench.json").read_text())["slope"] is None
    tan = write_cfg(tmp_path, "t.json", {"ladder": [4, 8, 16], "paths": 300, "model": "tanaka",
                                         "expect_slope": [-0.4, 0.4]})
    assert run(["bench", "--config", tan, "--out", tmp_path / "t"], capsys)[0] == OK
    strict = write_cfg(tmp_path, "x.json", {"ladder": [4, 8, 16], "paths": 100, "expect_slope": [2, 3]})
    assert run(["bench", "--config", strict, "--out", tmp_path / "x"], capsys)[0] == FAIL


@pytest.mark.parametrize("body", [{}, {"ladder": [4, 8]}, {"ladder": [4, 6, 16]}, {"ladder": ["a", 2, 4]},
                                  {"ladder": [4, 8, 16], "model": "quantum"}])
def test_bench_usage_errors(tmp_path, capsys, body):
    cfg = write_cfg(tmp_path, "b.json", {"paths": 20, **body})
    assert run(["bench", "--config", cfg, "--out", tmp_path / "o"], capsys)[0] == USAGE


def test_out_env_and_console_script(tmp_path, monkeypatch):
    env_out = tmp_path / "env-out"
    r = subprocess.run([sys.executable, "-m", "compatlab.cli", "simulate", "--paths", "3", "--steps", "2"],
                       env={**__import__("os").environ, "COMPATLAB_OUT": str(env_out)},
                       capture_output=True, text=True, cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    assert (env_out / "solution.json").exists()
    r = subprocess.run([sys.executable, "-m", "compatlab.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "diagnose" in r.stdout
