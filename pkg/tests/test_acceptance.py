"""The twelve acceptance criteria at their stated tolerances.

Each test records one ``[NN] name ... PASS/FAIL`` line, printed live (``-s``) and in
the terminal summary.  Run alone with ``pytest tests/test_acceptance.py``.
"""
import time

import numpy as np

from compatlab.diagnostics import (adapted_control, anticipating_control, compat_test,
                                   strong_copy_test, sup_abs_oracle, tanaka_driver, tanaka_solver,
                                   temporal_structure, uniqueness_probe)
from compatlab.diagnostics.controls import LIPSCHITZ
from compatlab.exactprob import suite, zeta_counterexample
from compatlab.paths import (BrownianOracle, ItoModel, McKeanVlasovModel, Stream, TimeChangeModel,
                             TimeGrid, TreeDriver, backward_induction, brownian, bsde_solve,
                             conditional_variation, constant_path, euler_ito, euler_semimartingale,
                             integrated_bound, ito_integrand, linear_mean_dt_bound, linear_mean_ode,
                             mckean_vlasov, time_and_driver, time_change_euler)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_01_zeta_counterexample(acceptance_line):
    rep, secs = _timed(zeta_counterexample)
    zeros = all(v == 0 for v in rep.single_cond_exp_joint.values + rep.single_cond_exp_y.values)
    ok = (zeros and rep.mismatched_atoms == 0 and not rep.partial_joint.passed
          and len(rep.enumerated.values) == 64 and secs < 1.0)
    acceptance_line(1, "zeta counterexample exact", ok,
                    f"single E=0: {zeros}, closed-form mismatches {rep.mismatched_atoms}/64, "
                    f"joint check fails: {not rep.partial_joint.passed}, {secs:.3f}s < 1s")
    assert ok


def test_02_uniqueness_equivalence(acceptance_line):
    res, secs = _timed(lambda: suite._run("uniqueness_equivalence", 500, 0, suite.uniqueness_equivalence))
    ok = res.passed and res.trials >= 500 and secs < 10.0
    acceptance_line(2, "strong existence + uniqueness equivalence", ok,
                    f"{res.trials - len(res.failures)}/{res.trials} families agree, {secs:.2f}s < 10s")
    assert ok


def test_03_coupling_joint_compatibility(acceptance_line):
    res = suite._run("coupling_joint_compatible", 100, 0, suite.coupling_joint_compatible)
    good = res.trials - len(res.failures)
    acceptance_line(3, "canonical coupling jointly compatible", good == 100, f"{good}/100 trials")
    assert good == 100


def test_04_dual_agreement(acceptance_line):
    res = suite._run("dual_agreement", 100, 0, suite.dual_agreement)
    good = res.trials - len(res.failures)
    acceptance_line(4, "dual check agrees with compatibility", good == 100, f"{good}/100 models")
    assert good == 100


def test_05_coin_mixture(acceptance_line):
    res = suite._run("coin_mixture", 100, 0, suite.coin_mixture)
    good = res.trials - len(res.failures)
    acceptance_line(5, "coin mixture is non-strong with averaged rows", good == 100, f"{good}/100 trials")
    assert good == 100


def test_06_scheme_identity(acceptance_line):
    W = brownian(TimeGrid(1.0, 128), 1, 1000, Stream(6))
    a = euler_ito(LIPSCHITZ, 0.2, W).values
    b = euler_semimartingale(ito_integrand(LIPSCHITZ), constant_path(0.2, W), time_and_driver(W)).values
    rel = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
    ok = rel <= 1e-12
    acceptance_line(6, "semimartingale scheme equals Euler-Ito", ok, f"max relative diff {rel:.2e} <= 1e-12")
    assert ok


def _moments(x):
    P = len(x)
    m1, m2 = x.mean(), (x ** 2).mean()
    return np.array([m1, m2]), np.array([x.std(ddof=1), (x ** 2).std(ddof=1)]) / np.sqrt(P)


def test_07_time_change_generator_match(acceptance_line):
    P, grid, x0 = 10_000, TimeGrid(1.0, 256), 0.5
    tc = TimeChangeModel(beta=lambda x: 1 + np.sin(x[:, 0]) ** 2, zeta=np.array([[1.0]]))
    Xtc = time_change_euler(tc, x0, [BrownianOracle(Stream(7, "tc"), P)], grid).X.terminal()[:, 0]
    ito = ItoModel(sigma=lambda x: np.sqrt(1 + np.sin(x[:, 0]) ** 2), drift=lambda x: 0 * x)
    Xe = euler_ito(ito, x0, brownian(grid, 1, P, Stream(7, "euler"))).terminal()[:, 0]
    (ma, sa), (mb, sb) = _moments(Xtc), _moments(Xe)
    z = np.abs(ma - mb) / np.sqrt(sa ** 2 + sb ** 2)
    # constant rates: Cov X(1) = sum_k b_k zeta_k zeta_k^T
    b = np.array([0.5, 2.0])
    zeta = np.array([[1.0, 0.0], [1.0, -1.0]])
    const = TimeChangeModel(beta=lambda x: b, zeta=zeta)
    X1 = time_change_euler(const, 0.0, [BrownianOracle(Stream(7, f"c{k}"), P) for k in range(2)],
                           TimeGrid(1.0, 8)).X.terminal()
    target = np.einsum("k,ki,kj->ij", b, zeta, zeta)
    dev = X1 - X1.mean(axis=0)
    prods = np.einsum("pi,pj->pij", dev, dev)
    cov = prods.sum(axis=0) / (P - 1)
    se = prods.std(axis=0, ddof=1) / np.sqrt(P)
    zc = np.abs(cov - target) / se
    ok = bool((z <= 4).all() and (zc <= 4).all())
    acceptance_line(7, "time change matches Euler generator", ok,
                    f"moment z = {z[0]:.2f}, {z[1]:.2f}; max covariance z = {zc.max():.2f}; limit 4")
    assert ok


def test_08_euler_strong_order(acceptance_line):
    ladder = [2 ** k for k in range(4, 10)]
    W = brownian(TimeGrid(1.0, 2 * ladder[-1]), 1, 2000, Stream(8))
    table = uniqueness_probe(lambda d, n: euler_ito(LIPSCHITZ, 0.0, d.coarsen(n)),
                             lambda d, n: euler_ito(LIPSCHITZ, 0.0, d.coarsen(2 * n)), W, ladder)
    rate = table.decay_rate
    ok = 0.35 <= rate <= 0.65
    acceptance_line(8, "Euler strong order 1/2", ok,
                    f"fitted decay {rate:.3f} in [0.35, 0.65] over n = 16..512")
    assert ok


def test_09_compatibility_power_and_size(acceptance_line):
    grid, P = TimeGrid(1.0, 32), 10_000
    structure = temporal_structure([0.25, 0.5, 0.75])
    rej = {"anticipating": 0, "adapted": 0}
    slowest = 0.0
    for seed in range(100):
        for name, make in (("anticipating", anticipating_control), ("adapted", adapted_control)):
            t0 = time.perf_counter()
            X, W = make(grid, P, Stream(seed, "acceptance"))
            rej[name] += not compat_test(X, W, structure).passed
            slowest = max(slowest, time.perf_counter() - t0)
    ok = rej["anticipating"] >= 95 and rej["adapted"] <= 10 and slowest < 30
    acceptance_line(9, "compatibility test power and size", ok,
                    f"anticipating rejected {rej['anticipating']}/100 (>= 95), adapted rejected "
                    f"{rej['adapted']}/100 (<= 10), slowest run {slowest:.2f}s < 30s")
    assert ok


def test_10_strong_copy(acceptance_line):
    P = 10_000
    W = brownian(TimeGrid(1.0, 64), 1, P, Stream(10))
    det = strong_copy_test(lambda d, s: euler_ito(LIPSCHITZ, 0.0, d), W, Stream(10, "a"), Stream(10, "b"))
    grid = TimeGrid(1.0, 1024)
    Y, _ = tanaka_driver(grid, P, Stream(10))
    tan = strong_copy_test(tanaka_solver, Y, Stream(10, "a"), Stream(10, "b"))
    oracle, oracle_se = sup_abs_oracle(grid, P, Stream(10))
    rel = abs(tan.conditional - 2 * oracle) / (2 * oracle)
    ok = det.statistic == 0.0 and rel <= 0.10
    acceptance_line(10, "strong-copy statistic", ok,
                    f"deterministic scheme {det.statistic}; Tanaka pair {tan.conditional:.4f} vs "
                    f"2 E sup|B| = {2 * oracle:.4f} (rel. err {rel:.3f} <= 0.10)")
    assert ok


def test_11_bsde_tree(acceptance_line):
    notes, ok = [], True
    for N in (2, 6, 12):
        tree = TreeDriver.random_walk(N, horizon=N / 8, p=0.5, U=lambda t, v: v / 2)
        g = lambda v: v * v / 4
        r = bsde_solve(tree, lambda t, x, v: g(v[:, -1]), lambda t, v: g(v[:, -1]))
        oracle = backward_induction(tree, g(tree.V[-1]))
        exact = all(np.array_equal(r.X[k], tree.U[k] + (tree.horizon - tree.times[k]) * oracle[k])
                    for k in range(N + 1))
        bound = lambda t, v: np.full(len(v), 1.9)
        r = bsde_solve(tree, lambda t, x, v: 0.9 * np.sin(x[:, 0]) + np.cos(v[:, -1]), bound)
        ch = r.sup_changes
        geometric = r.converged and all(b <= 0.5 * a for a, b in zip(ch, ch[1:]))
        vt, eg = conditional_variation(tree, r.Z), integrated_bound(tree, bound)
        ok &= exact and geometric and vt <= eg
        notes.append(f"depth {N}: oracle exact {exact}, {r.iterations} iterations geometric {geometric}, "
                     f"V_T {vt:.3f} <= {eg:.3f}")
    acceptance_line(11, "BSDE fixed point on trees", ok, "; ".join(notes))
    assert ok


def test_12_mckean_vlasov_mean(acceptance_line):
    a, b, sigma, m0 = -0.5, 0.8, 0.4, 1.0
    grid = TimeGrid(1.0, 128)
    model = McKeanVlasovModel(sigma=lambda x, mu: sigma, drift=lambda x, mu: a * x + b * mu.mean(axis=0))
    X = mckean_vlasov(model, m0, 10_000, grid, Stream(12)).terminal()[:, 0]
    se = X.std(ddof=1) / np.sqrt(len(X))
    bound = linear_mean_dt_bound(m0, a, b, grid)
    err = abs(X.mean() - linear_mean_ode(m0, a, b, grid.horizon))
    ok = err <= 4 * (se + bound)
    acceptance_line(12, "McKean-Vlasov particle mean", ok,
                    f"|mean - ODE| = {err:.2e} <= 4 (SE {se:.2e} + dt bound {bound:.2e})")
    assert ok
