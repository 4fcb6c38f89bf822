"""Seeded generators of small finite models (at most 8 x-values, 8 y-values, 4 alphas).

All weights are exact rationals with small denominators; every generator takes a
``random.Random`` so a seed fixes the whole family.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .compat import CompatStructure
from .measures import JointMeasure

MAX_GRID = 8


def random_distribution(rng: random.Random, n: int, denom: int = 9, allow_zero: bool = False):
    ints = [rng.randint(0 if allow_zero else 1, denom) for _ in range(n)]
    if sum(ints) == 0:
        ints[rng.randrange(n)] = 1
    s = sum(ints)
    return [Fraction(i, s) for i in ints]


def random_nu(rng: random.Random, ys) -> dict:
    return dict(zip(ys, random_distribution(rng, len(ys))))


def random_strong_measure(rng: random.Random, xs, nu) -> JointMeasure:
    F = {y: rng.choice(xs) for y in nu}
    return JointMeasure.graph(F, nu, xs)


def random_kernel_measure(rng: random.Random, xs, nu) -> JointMeasure:
    mass = {}
    for y, wy in nu.items():
        for x, w in zip(xs, random_distribution(rng, len(xs), allow_zero=True)):
            mass[(x, y)] = wy * w
    return JointMeasure(tuple(xs), tuple(nu), mass)


def random_gyw_family(rng: random.Random) -> list:
    """A finite stand-in for the admissible set: 1-3 laws sharing one y-marginal."""
    ys = tuple(range(rng.randint(1, MAX_GRID)))
    xs = tuple(range(rng.randint(1, MAX_GRID)))
    nu = random_nu(rng, ys)
    family = []
    for _ in range(rng.choice((1, 1, 2, 3))):
        if rng.random() < 0.5:
            family.append(random_strong_measure(rng, xs, nu))
        else:
            family.append(random_kernel_measure(rng, xs, nu))
    if rng.random() < 0.2:
        family.append(family[rng.randrange(len(family))])
    return family


def _bit_prob(rng: random.Random):
    r = rng.random()
    if r < 0.25:
        return Fraction(0)
    if r < 0.5:
        return Fraction(1)
    return Fraction(rng.randint(1, 5), 6)


def coordinate_model(rng: random.Random, k: int, mode: str = "compatible", nu=None):
    """Binary ``Y = (Y_1..Y_k)`` with independent coordinates and binary ``X = (X_1..X_k)``.

    ``mode``: ``"compatible"`` draws ``X_j`` from ``(Y_{<=j}, X_{<j})`` plus fresh noise;
    ``"anticipating"`` lets ``X_j`` also see ``Y_{j+1}``; ``"arbitrary"`` lets it see all
    of ``Y``.  Returns ``(measure, nu)``.
    """
    ys = list(itertools.product((0, 1), repeat=k))
    if nu is None:
        marg = [random_distribution(rng, 2) for _ in range(k)]
        nu = {y: _prod(marg[j][y[j]] for j in range(k)) for y in ys}
    reach = {"compatible": 0, "anticipating": 1, "arbitrary": k}[mode]
    table: dict = {}

    def p_one(j, y, xprev):
        key = (j, y[: min(k, j + 1 + reach)], xprev)
        if key not in table:
            table[key] = _bit_prob(rng)
        return table[key]

    xs = list(itertools.product((0, 1), repeat=k))
    mass = {}
    for y in ys:
        for x in xs:
            w = nu[y]
            for j in range(k):
                p = p_one(j, y, x[:j])
                w *= p if x[j] == 1 else 1 - p
                if w == 0:
                    break
            mass[(x, y)] = w
    return JointMeasure(tuple(xs), tuple(ys), mass), nu


def random_structure(rng: random.Random, k: int) -> CompatStructure:
    """Up to four alphas, each seeing random coordinate subsets on both sides (not nested)."""
    n_alpha = rng.randint(1, 4)
    xc, yc = {}, {}
    for a in range(n_alpha):
        xc[a] = tuple(i for i in range(k) if rng.random() < 0.5)
        yc[a] = tuple(i for i in range(k) if rng.random() < 0.5)
    return CompatStructure.coordinates(xc, yc)


def random_model(rng: random.Random):
    """``(measure, structure)`` drawn from compatible, anticipating and arbitrary families."""
    k = rng.randint(1, 3)
    mode = rng.choice(("compatible", "anticipating", "arbitrary"))
    mu, _ = coordinate_model(rng, k, mode)
    C = CompatStructure.prefix(k) if rng.random() < 0.6 else random_structure(rng, k)
    return mu, C


def random_compatible_pair(rng: random.Random):
    """Two prefix-compatible laws with a common y-marginal, and their structure."""
    k = rng.randint(1, 3)
    mu1, nu = coordinate_model(rng, k, "compatible")
    mu2, _ = coordinate_model(rng, k, "compatible", nu=nu)
    return mu1, mu2, CompatStructure.prefix(k)


def _prod(it):
    out = Fraction(1)
    for v in it:
        out *= v
    return out
