"""Batch runner: ``compatlab {exact,simulate,diagnose,bench}``.

Exit codes: 0 every check passed, 1 a check failed, 2 usage or configuration error.
Configs are JSON objects carrying ``"schema": "compatlab.run/1"``; command-line flags
override their top-level ``seed``/``paths``/``steps``/``horizon``/``out`` fields.  The
output directory defaults to ``$COMPATLAB_OUT`` and then ``./compatlab-out``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._expr import ExprError, state_function
from .diagnostics import (HFunc, ProvenanceError, TestConfig, adapted_control, anticipating_control,
                          compat_test, rc_structure, reversed_control, tanaka_driver, tanaka_solver,
                          temporal_structure, uniqueness_probe, write_csv, write_json)
from .exactprob import ScenarioError, load_scenario, run_scenario
from .exactprob.suite import CHECKS, run_suite
from .paths import (BrownianOracle, ItoModel, ModelError, SolverError, Stream, TimeChangeModel,
                    TimeGrid, brownian, constant_path, euler_ito, euler_semimartingale,
                    levy_driver, time_change_euler)
from .paths.io import read_ensemble, spec_hash, write_ensemble

SCHEMA = "compatlab.run/1"
OUT_ENV = "COMPATLAB_OUT"
OK, FAIL, USAGE = 0, 1, 2
DEFAULTS = {"seed": 0, "paths": 1000, "steps": 64, "horizon": 1.0}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    seed: int
    paths: int
    steps: int
    horizon: float
    out: Path
    fmt: str
    body: dict
    base: Path    # directory that relative paths in the config are resolved against

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base / p

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.horizon, self.steps)


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise UsageError(f"config must be a JSON object with \"schema\": \"{SCHEMA}\"")
    return doc


def resolve(args) -> RunConfig:
    doc = load_config(args.config)
    if doc.get("subcommand", args.command) != args.command:
        raise UsageError(f"config is for {doc['subcommand']!r}, not {args.command!r}")

    def pick(name, cast):
        v = getattr(args, name, None)
        v = doc.get(name, DEFAULTS[name]) if v is None else v
        try:
            return cast(v)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad {name}: {v!r}") from exc

    seed, paths, steps, horizon = (pick("seed", int), pick("paths", int), pick("steps", int),
                                   pick("horizon", float))
    if seed < 0 or paths < 1 or steps < 1 or not horizon > 0:
        raise UsageError("seed must be >= 0; paths, steps and horizon positive")
    out = args.out or doc.get("out") or os.environ.get(OUT_ENV) or "compatlab-out"
    base = Path(args.config).resolve().parent if args.config else Path.cwd()
    return RunConfig(args.command, seed, paths, steps, horizon, Path(out), args.format, doc, base)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"


def _emit(rc: RunConfig, summary: dict, rows=None):
    """Print the summary as JSON, or ``rows`` (list of flat dicts) as CSV with ``--format csv``."""
    if rc.fmt == "csv" and rows:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write(_dump(summary))


# ---------------------------------------------------------------- exact

def cmd_exact(rc: RunConfig) -> int:
    trials = rc.body.get("trials", {})
    if not isinstance(trials, dict) or set(trials) - set(CHECKS):
        raise UsageError(f"'trials' keys must be among {sorted(CHECKS)}")
    try:
        scenarios = [(str(p), load_scenario(rc.path(p))) for p in rc.body.get("scenarios", [])]
    except ScenarioError as exc:
        raise UsageError(str(exc)) from exc
    t0 = time.perf_counter()
    results = run_suite(rc.seed, trials)
    sc_reports = [{"file": name, **run_scenario(sc)} for name, sc in scenarios]
    passed = all(r.passed for r in results) and all(r["passed"] for r in sc_reports)
    suite = {"schema": "compatlab.suite/1", "suite": "exact", "seed": rc.seed, "passed": passed,
             "checks": [r.as_dict() for r in results], "scenarios": sc_reports}
    rc.out.mkdir(parents=True, exist_ok=True)
    (rc.out / "exact.json").write_text(_dump(suite))
    rows = [{"check": r.name, "passed": r.passed, "trials": r.trials, "failures": len(r.failures)}
            for r in results]
    _emit(rc, {**suite, "wall_seconds": round(time.perf_counter() - t0, 3)}, rows)
    return OK if passed else FAIL


# ---------------------------------------------------------------- simulate

def _ito_from(model: dict) -> ItoModel:
    d = int(model.get("dims", 1))
    m = int(model.get("noise_dims", 1))
    params = model.get("params", {})
    drift = model.get("drift", "0" if d == 1 else ["0"] * d)
    sigma = model.get("sigma", "0" if d == m == 1 else [["0"] * m] * d)
    return ItoModel(state_function(sigma, d, params), state_function(drift, d, params), d, m)


def _mean_check(X, expected: np.ndarray) -> dict:
    xt = X.terminal()
    mean = xt.mean(axis=0)
    se = xt.std(axis=0, ddof=1) / np.sqrt(len(xt))
    z = (mean - expected) / np.where(se > 0, se, np.inf)
    return {"mean": mean.tolist(), "se": se.tolist(), "expected": np.asarray(expected).tolist(),
            "z": z.tolist(), "passed": bool(np.all(np.abs(z) <= 4) or np.allclose(mean, expected))}


def simulate(rc: RunConfig):
    """``(driver, solution, summary)`` for the configured model."""
    model = dict(rc.body.get("model", {"kind": "brownian"}))
    kind = model.get("kind", "brownian")
    grid, P = rc.grid, rc.paths
    stream = Stream(rc.seed, "simulate")
    summary: dict = {"kind": kind}
    if kind == "brownian":
        W = brownian(grid, int(model.get("dims", 1)), P, stream.child("w"))
        return W, W, summary
    if kind in ("ito", "gbm"):
        if kind == "gbm":
            mu, sig = float(model.get("mu", 0.05)), float(model.get("sigma", 0.2))
            ito = ItoModel(sigma=lambda x: sig * x[:, 0], drift=lambda x: mu * x)
            x0 = float(model.get("x0", 1.0))
        else:
            ito = _ito_from(model)
            x0 = model.get("x0", 0.0)
        W = brownian(grid, ito.noise_dims, P, stream.child("w"))
        X = euler_ito(ito, x0, W)
        if kind == "gbm":
            summary["mean_check"] = _mean_check(X, np.array([x0 * math.exp(mu * grid.horizon)]))
        return W, X, summary
    if kind == "levy":
        V, dec = levy_driver(float(model.get("rate", 1.0)), model.get("jump_values", [1.0]),
                             model.get("jump_probs", [1.0]), float(model.get("drift", 0.0)),
                             float(model.get("diffusion", 1.0)), grid, P, stream.child("levy"))
        H = state_function(model.get("integrand", "1"), 1, model.get("params", {}))
        U = constant_path(float(model.get("x0", 0.0)), V)
        X = euler_semimartingale(lambda hist, k, t: H(hist[:, -1]).reshape(-1, 1, 1), U, V)
        summary["mean_jumps"] = float(dec.jump_counts.mean())
        summary["tau_reached"] = {str(lv): float(np.isfinite(dec.tau_at(lv)).mean()) for lv in dec.levels}
        return V, X, summary
    if kind == "timechange":
        zeta = np.atleast_2d(np.asarray(model.get("zeta", [[1.0]]), dtype=np.float64))
        m, d = zeta.shape
        params = model.get("params", {})
        beta = state_function(model.get("beta", ["1"] * m), d, params)
        drift = state_function(model["drift"], d, params) if "drift" in model else None
        tc = TimeChangeModel(beta, zeta, drift)
        oracles = [BrownianOracle(stream.child(f"w{k}"), P) for k in range(m)]
        res = time_change_euler(tc, model.get("x0", 0.0), oracles, grid)
        clocks = res.X.with_values(res.tau, kind="clocks")
        return clocks, res.X, summary
    raise UsageError(f"unknown model kind {kind!r}")


def cmd_simulate(rc: RunConfig) -> int:
    try:
        driver, sol, summary = simulate(rc)
    except (ExprError, ModelError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"model spec: {exc}") from exc
    h = spec_hash({k: v for k, v in rc.body.items() if k not in ("out",)} |
                  {"seed": rc.seed, "paths": rc.paths, "steps": rc.steps, "horizon": rc.horizon})
    fmt = "csv" if rc.fmt == "csv" else "npy"
    term = sol.terminal()
    summary.update({"spec_hash": h, "seed": rc.seed, "paths": rc.paths, "steps": rc.steps,
                    "terminal_mean": term.mean(axis=0).tolist(),
                    "terminal_sd": term.std(axis=0, ddof=1).tolist() if rc.paths > 1 else [0.0]})
    prov = {"spec_hash": h, "seed": rc.seed}
    write_ensemble(driver.with_values(driver.values, **prov), rc.out / "driver", fmt)
    write_ensemble(sol.with_values(sol.values, **prov), rc.out / "solution", fmt, summary)
    passed = summary.get("mean_check", {}).get("passed", True)
    _emit(rc, {"passed": passed, **summary})
    return OK if passed else FAIL


# ---------------------------------------------------------------- diagnose

CONTROLS = {"anticipating": anticipating_control, "adapted": adapted_control,
            "reversed": reversed_control}


def _h_from(spec, T) -> list:
    out = []
    for i, h in enumerate(spec):
        a, b, j = float(h.get("from", 0.0)), float(h.get("to", T)), int(h.get("dim", 0))
        kind = h.get("kind", "sign")
        if kind not in ("sign", "clip"):
            raise UsageError(f"h kind must be sign or clip, got {kind!r}")
        f = np.sign if kind == "sign" else (lambda v: np.clip(v, -1.0, 1.0))
        out.append(HFunc(h.get("id", f"{kind} y{j}[{a:g},{b:g}]"),
                         lambda Y, _t, a=a, b=b, j=j, f=f: f(Y.at(b)[:, j] - Y.at(a)[:, j])))
    return out


def _structure_from(spec: dict, T: float) -> list:
    kind = spec.get("kind", "temporal")
    times = spec.get("times", [T / 4, T / 2, 3 * T / 4])
    degree = int(spec.get("degree", 2))
    if kind == "temporal":
        return temporal_structure(times, int(spec.get("m", 1)), degree)
    if kind == "rc":
        return rc_structure(times, float(spec["eps"]), float(spec["r"]), degree)
    raise UsageError(f"unknown structure kind {kind!r}")


def cmd_diagnose(rc: RunConfig) -> int:
    b = rc.body
    expect = b.get("expect", "pass")
    if expect not in ("pass", "reject"):
        raise UsageError("expect must be 'pass' or 'reject'")
    try:
        cfg = TestConfig(**b.get("test", {}))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"test config: {exc}") from exc
    if "control" in b:
        if b["control"] not in CONTROLS:
            raise UsageError(f"control must be one of {sorted(CONTROLS)}")
        X, Y = CONTROLS[b["control"]](rc.grid, rc.paths, Stream(rc.seed, "diagnose"))
    elif "x" in b and "y" in b:
        try:
            X, Y = read_ensemble(rc.path(b["x"])), read_ensemble(rc.path(b["y"]))
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read ensembles: {exc}") from exc
    else:
        raise UsageError("diagnose needs 'control' or both 'x' and 'y' ensemble headers")
    T = Y.grid.horizon
    try:
        structure = _structure_from(b.get("structure", {}), T)
        h_set = None if b.get("h", "default") == "default" else _h_from(b["h"], T)
        report = compat_test(X, Y, structure, h_set, cfg)
    except ProvenanceError as exc:
        raise UsageError(f"provenance mismatch: {exc}") from exc
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    report.provenance.update({"x": X.provenance, "y": Y.provenance, "expect": expect})
    write_csv(report, rc.out / "report.csv")
    write_json(report, rc.out / "report.json")
    ok = report.passed if expect == "pass" else not report.passed
    summary = {"passed_gate": ok, "expect": expect, "rejections": len(report.rejections),
               "tests": len(report.entries)}
    rows = [{k: getattr(e, k) for k in ("alpha", "h_id", "gap", "se", "decision")} for e in report.entries]
    _emit(rc, summary, rows)
    return OK if ok else FAIL


# ---------------------------------------------------------------- bench

ZERO = ItoModel(sigma=lambda x: np.zeros(len(x)), drift=lambda x: np.zeros_like(x))
GBM = ItoModel(sigma=lambda x: 0.2 * x[:, 0], drift=lambda x: 0.05 * x)


def _bench_ladder(rc: RunConfig):
    ladder = rc.body.get("ladder")
    if not isinstance(ladder, list) or len(ladder) < 3:
        raise UsageError("bench needs a 'ladder' of at least 3 step counts")
    try:
        ladder = sorted(int(n) for n in ladder)
    except (TypeError, ValueError) as exc:
        raise UsageError("ladder entries must be integers") from exc
    fine = 2 * ladder[-1]
    if ladder[0] < 1 or any(fine % (2 * n) for n in ladder):
        raise UsageError("every ladder entry must divide the largest one")
    return ladder, fine


def cmd_bench(rc: RunConfig) -> int:
    from .diagnostics.controls import LIPSCHITZ

    ladder, fine = _bench_ladder(rc)
    model = rc.body.get("model", "lipschitz")
    grid = TimeGrid(rc.horizon, fine)
    stream = Stream(rc.seed, "bench")
    if model in ("lipschitz", "zero", "gbm"):
        ito = {"lipschitz": LIPSCHITZ, "zero": ZERO, "gbm": GBM}[model]
        x0 = 1.0 if model == "gbm" else 0.0
        W = brownian(grid, 1, rc.paths, stream.child("w"))
        table = uniqueness_probe(lambda d, n: euler_ito(ito, x0, d.coarsen(n)),
                                 lambda d, n: euler_ito(ito, x0, d.coarsen(2 * n)), W, ladder)
    elif model == "tanaka":
        Y, _ = tanaka_driver(grid, rc.paths, stream)
        table = uniqueness_probe(lambda d, n: tanaka_solver(d.coarsen(n), stream.child("a")),
                                 lambda d, n: tanaka_solver(d.coarsen(n), stream.child("b")), Y, ladder)
    else:
        raise UsageError(f"unknown bench model {model!r}")
    slope = table.slope
    rows = [{**r, "fitted_slope": slope} for r in table.rows()]
    rc.out.mkdir(parents=True, exist_ok=True)
    with open(rc.out / "bench.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["n", "error", "se", "fitted_slope"], lineterminator="\n")
        w.writeheader()
        w.writerows({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()} for r in rows)
    passed = True
    expect = rc.body.get("expect_slope")
    if expect is not None:
        lo, hi = (float(v) for v in expect)
        passed = bool(lo <= slope <= hi)
    doc = {"schema": "compatlab.bench/1", "model": model, "seed": rc.seed, "paths": rc.paths,
           "ladder": ladder, "rows": table.rows(), "slope": None if math.isnan(slope) else slope,
           "decay_rate": None if math.isnan(slope) else -slope, "expect_slope": expect,
           "passed": passed}
    (rc.out / "bench.json").write_text(_dump(doc))
    _emit(rc, doc, rows)
    return OK if passed else FAIL


COMMANDS = {"exact": cmd_exact, "simulate": cmd_simulate, "diagnose": cmd_diagnose, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="compatlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    helps = {"exact": "exact enumeration suite", "simulate": "simulate and persist ensembles",
             "diagnose": "compatibility diagnostics on ensembles",
             "bench": "refinement ladders and fitted log-slopes"}
    for name, text in helps.items():
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", metavar="FILE")
        s.add_argument("--seed", type=int)
        s.add_argument("--paths", type=int)
        s.add_argument("--steps", type=int)
        s.add_argument("--horizon", type=float)
        s.add_argument("--out", metavar="PATH")
        s.add_argument("--format", choices=("csv", "json"), default="json")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        rc = resolve(args)
        return COMMANDS[args.command](rc)
    except UsageError as exc:
        print(f"compatlab: error: {exc}", file=sys.stderr)
        return USAGE
    except SolverError as exc:
        print(f"compatlab: solver failure: {exc}", file=sys.stderr)
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
