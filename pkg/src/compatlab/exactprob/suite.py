"""The exact property suite: seeded randomized checks plus the zeta counterexample."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import random_models as rm
from .compat import (CompatStructure, check_compatibility, check_dual, check_joint_compatibility,
                     check_martingale_condition, martingale_from_terminal)
from .measures import (canonical_coupling, coupling_disagreement, disintegrate, is_strong,
                       mix_solutions, theorem_gyw_check)
from .space import VerificationFailure
from .zeta import zeta_counterexample


@dataclass
class CheckResult:
    name: str
    passed: bool
    trials: int
    failures: list = field(default_factory=list)   # seeds (or labels) that failed
    seconds: float = 0.0

    def as_dict(self, timing: bool = False) -> dict:
        out = {"name": self.name, "passed": self.passed, "trials": self.trials,
               "failures": self.failures[:20]}
        if timing:
            out["seconds"] = self.seconds
        return out


def _rng(seed: int, i: int) -> random.Random:
    return random.Random(seed * 1_000_003 + i)


def _run(name, trials, seed, body) -> CheckResult:
    t0 = time.perf_counter()
    bad = [i for i in range(trials) if not body(_rng(seed, i))]
    return CheckResult(name, not bad, trials, bad, time.perf_counter() - t0)


def uniqueness_equivalence(rng) -> bool:
    try:
        fam = rm.random_gyw_family(rng)
        res = theorem_gyw_check(fam)
    except VerificationFailure:
        return False
    return res.a_holds == res.b_holds


def coupling_closed_form(rng) -> bool:
    """The closed-form disagreement used above equals the one of the materialised coupling."""
    fam = rm.random_gyw_family(rng)
    m1, m2 = fam[0], fam[-1]
    return coupling_disagreement(m1, m2) == canonical_coupling(m1, m2).disagreement()


def outsourced_noise_compatible(rng) -> bool:
    mu, _ = rm.coordinate_model(rng, rng.randint(1, 3), "compatible")
    k = len(mu.y_values[0])
    _, X, Y = mu.to_space()
    return check_compatibility(X, Y, CompatStructure.prefix(k)).passed


def martingale_preserved(rng) -> bool:
    k = rng.randint(1, 3)
    mu, _ = rm.coordinate_model(rng, k, "compatible")
    space, X, Y = mu.to_space()
    C = CompatStructure.prefix(k)
    table = {y: Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for y in mu.y_values}
    M = martingale_from_terminal(Y.map(table.__getitem__), Y, C)
    return check_martingale_condition(M, X, Y, C).passed


def coupling_joint_compatible(rng) -> bool:
    mu1, mu2, C = rm.random_compatible_pair(rng)
    c = canonical_coupling(mu1, mu2).compressed()
    return check_joint_compatibility(c.X1, c.X2, c.Y, C).passed


def dual_agreement(rng) -> bool:
    mu, C = rm.random_model(rng)
    _, X, Y = mu.to_space()
    return check_dual(X, Y, C).passed == check_compatibility(X, Y, C).passed


def disintegration_roundtrip(rng) -> bool:
    fam = rm.random_gyw_family(rng)
    return all(disintegrate(m).reassemble(m.y_marginal()) == m for m in fam)


def coin_mixture(rng) -> bool:
    """Two different strong maps: the mixture is a non-strong kernel with averaged rows."""
    ys = tuple(range(rng.randint(1, 8)))
    xs = tuple(range(rng.randint(2, 8)))
    nu = rm.random_nu(rng, ys)
    F1 = {y: rng.choice(xs) for y in ys}
    F2 = dict(F1)
    y0 = rng.choice(ys)
    F2[y0] = rng.choice([x for x in xs if x != F1[y0]])
    mu = mix_solutions(F1, F2, nu)
    k = disintegrate(mu)
    half = Fraction(1, 2)
    rows_ok = all(k.row(y)[i] == half * (x == F1[y]) + half * (x == F2[y])
                  for y in ys for i, x in enumerate(k.x_values))
    return is_strong(k) is None and rows_ok and is_strong(disintegrate(mix_solutions(F1, F1, nu))) == F1


DEFAULT_TRIALS = {
    "uniqueness_equivalence": 500,
    "coupling_closed_form": 100,
    "outsourced_noise_compatible": 100,
    "martingale_preserved": 100,
    "coupling_joint_compatible": 100,
    "dual_agreement": 100,
    "disintegration_roundtrip": 100,
    "coin_mixture": 100,
}

CHECKS = {
    "uniqueness_equivalence": uniqueness_equivalence,
    "coupling_closed_form": coupling_closed_form,
    "outsourced_noise_compatible": outsourced_noise_compatible,
    "martingale_preserved": martingale_preserved,
    "coupling_joint_compatible": coupling_joint_compatible,
    "dual_agreement": dual_agreement,
    "disintegration_roundtrip": disintegration_roundtrip,
    "coin_mixture": coin_mixture,
}


def run_suite(seed: int = 0, trials: dict | None = None) -> list:
    """Every randomized check plus the zeta counterexample; returns :class:`CheckResult` rows."""
    trials = {**DEFAULT_TRIALS, **(trials or {})}
    t0 = time.perf_counter()
    z = zeta_counterexample()
    out = [CheckResult("zeta_counterexample", z.passed, 1, [] if z.passed else ["zeta"],
                       time.perf_counter() - t0)]
    for name, body in CHECKS.items():
        out.append(_run(name, int(trials[name]), seed, body))
    return out
