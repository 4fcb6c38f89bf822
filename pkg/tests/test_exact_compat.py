import random
from fractions import Fraction
from itertools import product

import pytest

from compatlab.exactprob import (CompatStructure, FiniteSpace, PreconditionError, Rv, check_adapted,
                                 check_compatibility, check_dual, check_joint_compatibility,
                                 check_martingale_condition, is_function_of,
                                 martingale_from_terminal)
from compatlab.exactprob import random_models as rm
from compatlab.exactprob.compat import check_filtrations


@pytest.fixture
def two_coords():
    """``Y = (Y1, Y2)`` independent fair bits and an independent fair bit ``xi``."""
    sp = FiniteSpace.uniform(list(product((0, 1), repeat=3)))
    Y = sp.rv(lambda a: (a[0], a[1]))
    return sp, Y


def test_adapted_x_passes(two_coords):
    sp, Y = two_coords
    X = sp.rv(lambda a: (a[0], a[0] ^ a[1]))
    C = CompatStructure.prefix(2)
    assert check_compatibility(X, Y, C).passed
    assert all(check_adapted(X, Y, C).values())


def test_outsourced_noise_passes(two_coords):
    sp, Y = two_coords
    X = sp.rv(lambda a: (a[0] ^ a[2], a[1] * a[2]))
    C = CompatStructure.prefix(2)
    assert check_compatibility(X, Y, C).passed
    assert not all(check_adapted(X, Y, C).values())


def test_future_coordinate_fails(two_coords):
    sp, Y = two_coords
    X = sp.rv(lambda a: (a[1], a[1]))    # sees Y2 already at alpha = 1
    C = CompatStructure.prefix(2)
    rep = check_compatibility(X, Y, C)
    assert not rep.passed and rep.deviations[1] > 0 and rep.deviations[2] == 0
    assert not check_dual(X, Y, C).passed


def test_partial_h_set_restricts_check(two_coords):
    sp, Y = two_coords
    X = sp.rv(lambda a: (a[1], a[1]))
    C = CompatStructure.prefix(2, h_set=[("first", lambda y: y[0])])
    rep = check_compatibility(X, Y, C)
    assert rep.passed and rep.kind == "partial_compatibility"
    with pytest.raises(PreconditionError):
        check_dual(X, Y, C)


def test_empty_structure_rejected(two_coords):
    sp, Y = two_coords
    C = CompatStructure.from_maps((), lambda a, x: x, lambda a, y: y)
    with pytest.raises(PreconditionError):
        check_compatibility(Y, Y, C)


def test_dual_independent_x_trivial_y_side():
    sp = FiniteSpace.uniform(list(product((0, 1), repeat=2)))
    X, Y = sp.rv(lambda a: a[0]), sp.rv(lambda a: a[1])
    C = CompatStructure.from_maps(("a",), lambda a, x: x, lambda a, y: 0)
    assert check_dual(X, Y, C).passed and check_compatibility(X, Y, C).passed


def test_joint_compatibility_of_identical_adapted_copies(two_coords):
    sp, Y = two_coords
    X = sp.rv(lambda a: (a[0], a[1]))
    assert check_joint_compatibility(X, X, Y, CompatStructure.prefix(2)).passed


def test_dual_agrees_with_compatibility_on_random_models():
    for seed in range(150):
        mu, C = rm.random_model(random.Random(seed))
        _, X, Y = mu.to_space()
        assert check_dual(X, Y, C).passed == check_compatibility(X, Y, C).passed, seed


def test_random_models_cover_both_outcomes():
    outcomes = set()
    for seed in range(60):
        mu, C = rm.random_model(random.Random(seed))
        _, X, Y = mu.to_space()
        outcomes.add(check_compatibility(X, Y, C).passed)
    assert outcomes == {True, False}


def test_martingale_condition_examples(two_coords):
    sp, Y = two_coords
    X = sp.rv(lambda a: (a[0] ^ a[2], a[1]))
    C = CompatStructure.prefix(2)
    const = {1: sp.rv(lambda a: 3), 2: sp.rv(lambda a: 3)}
    assert check_martingale_condition(const, X, Y, C).passed
    M = martingale_from_terminal(Y.map(lambda y: y[0] + 2 * y[1]), Y, C)
    assert check_martingale_condition(M, X, Y, C).passed
    bad = {1: M[1], 2: M[1] + 1}
    rep = check_martingale_condition(bad, X, Y, C)
    assert not rep.passed and rep.deviations[(1, 2)] == 1


def test_martingale_requires_measurability_and_filtrations(two_coords):
    sp, Y = two_coords
    C = CompatStructure.prefix(2)
    M = {1: Y.map(lambda y: y[1]), 2: Y.map(lambda y: y[1])}
    with pytest.raises(PreconditionError):
        check_martingale_condition(M, Y, Y, C)
    shrinking = CompatStructure.from_maps((1, 2), lambda a, x: x[: 3 - a], lambda a, y: y[: 3 - a],
                                          order=((1, 2),))
    assert not check_filtrations(Y, Y, shrinking)
    with pytest.raises(PreconditionError):
        check_martingale_condition({1: Y.map(lambda y: 0), 2: Y.map(lambda y: 0)}, Y, Y, shrinking)


def test_compatible_models_preserve_martingales():
    for seed in range(40):
        rng = random.Random(seed)
        k = rng.randint(1, 3)
        mu, _ = rm.coordinate_model(rng, k, "compatible")
        _, X, Y = mu.to_space()
        C = CompatStructure.prefix(k)
        Z = Y.map(lambda y: Fraction(sum((i + 1) * v for i, v in enumerate(y)), 3))
        assert check_martingale_condition(martingale_from_terminal(Z, Y, C), X, Y, C).passed


def test_adapted_iff_strong_and_compatible():
    """With the X-side generating sigma(X) at the last alpha."""
    seen = set()
    for seed in range(120):
        rng = random.Random(seed)
        k = rng.randint(1, 3)
        mu, _ = rm.coordinate_model(rng, k, rng.choice(("compatible", "anticipating", "arbitrary")))
        _, X, Y = mu.to_space()
        C = CompatStructure.prefix(k)
        adapted = all(check_adapted(X, Y, C).values())
        strong_compat = is_function_of(X, Y) and check_compatibility(X, Y, C).passed
        assert adapted == strong_compat, seed
        seen.add(adapted)
    assert seen == {True, False}


def test_report_json_renders_rationals(two_coords):
    sp, Y = two_coords
    X = sp.rv(lambda a: (a[1], a[1]))
    js = check_compatibility(X, Y, CompatStructure.prefix(2)).to_json()
    assert js["deviations"]["1"] == "1/2" and js["passed"] is False


def test_float_mode_uses_tolerance():
    sp = FiniteSpace.uniform(list(product((0, 1), repeat=2))).as_float()
    X, Y = Rv(sp, [0, 0, 1, 1]), Rv(sp, [0, 1, 0, 1])
    C = CompatStructure.from_maps(("a",), lambda a, x: x, lambda a, y: 0)
    assert check_compatibility(X, Y, C).passed
