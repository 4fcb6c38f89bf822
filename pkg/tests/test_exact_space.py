from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compatlab.exactprob import (FiniteSpace, Partition, PreconditionError, Rv, StructuralError,
                                 cond_exp, join, join_all, sigma_of)
from compatlab.exactprob.space import as_weight, fmt_number


@pytest.fixture
def signs4():
    return FiniteSpace.uniform(list(product((-1, 1), repeat=4)))


def test_weights_parse_and_validate():
    assert as_weight("3/8") == Fraction(3, 8)
    FiniteSpace(("a", "b"), ("1/3", "2/3"))
    with pytest.raises(StructuralError):
        FiniteSpace(("a", "b"), ("1/3", "1/3"))
    with pytest.raises(StructuralError):
        FiniteSpace(("a", "a"), ("1/2", "1/2"))
    with pytest.raises(StructuralError):
        FiniteSpace(("a", "b"), ("0", "1"))
    with pytest.raises(StructuralError):
        FiniteSpace((), ())
    FiniteSpace(("a", "b"), (0.25, 0.75))  # float mode


def test_from_weights_prunes_zero_mass():
    space, keep = FiniteSpace.from_weights(["a", "b", "c"], ["1/2", 0, "1/2"])
    assert space.atoms == ("a", "c") and keep == [0, 2]


def test_modes_and_tolerance():
    exact = FiniteSpace.uniform(range(4))
    assert exact.exact and exact.tolerance == 0
    fl = exact.as_float()
    assert not fl.exact and fl.tolerance == pytest.approx(1e-9)


def test_sigma_of_constant_is_single_block(signs4):
    assert len(sigma_of([signs4.rv(lambda a: 7)])) == 1


def test_sigma_of_injective_gives_singletons():
    sp = FiniteSpace.uniform(range(4))
    assert len(sigma_of([sp.rv(lambda a: a * 10)])) == 4


def test_sigma_of_product_of_signs(signs4):
    p = sigma_of([signs4.rv(lambda a: a[0] * a[1])])
    assert sorted(len(b) for b in p.blocks) == [8, 8]


def test_sigma_of_needs_input_and_common_space():
    with pytest.raises(PreconditionError):
        sigma_of([])
    a, b = FiniteSpace.uniform(range(2)), FiniteSpace.uniform(range(2))
    with pytest.raises(StructuralError):
        sigma_of([a.rv(lambda x: x), b.rv(lambda x: x)])


def test_join_identities():
    sp = FiniteSpace.uniform(list(product((-1, 1), repeat=2)))
    p = sigma_of([sp.rv(lambda a: a[0])])
    assert join(p, sp.trivial()) == p
    assert join(p, p) == p
    q = sigma_of([sp.rv(lambda a: a[0] * a[1])])
    assert len(join(p, q)) == 4
    assert join_all([p, q, sp.trivial()]) == join(p, q)


def test_partition_rejects_bad_blocks():
    sp = FiniteSpace.uniform(range(3))
    with pytest.raises(StructuralError):
        Partition(sp, ((0, 1), (1, 2)))
    with pytest.raises(StructuralError):
        Partition(sp, ((0,), (1,)))
    with pytest.raises(StructuralError):
        Partition(sp, ((0, 1, 2), ()))


def test_refinement_and_measurability(signs4):
    fine = sigma_of([signs4.rv(lambda a: a[:2])])
    coarse = sigma_of([signs4.rv(lambda a: a[0])])
    assert fine.refines(coarse) and coarse.coarser_than(fine) and not coarse.refines(fine)
    assert fine.measurable(signs4.rv(lambda a: a[0] * a[1]))
    assert not coarse.measurable(signs4.rv(lambda a: a[1]))


def test_cond_exp_basic_cases(signs4):
    c = signs4.rv(lambda a: Fraction(5, 2))
    assert cond_exp(c, sigma_of([signs4.rv(lambda a: a[0])])).values == c.values
    h = signs4.rv(lambda a: a[0] + 2 * a[1] + 3)
    assert set(cond_exp(h, signs4.trivial()).values) == {h.expectation()}


def test_cond_exp_y4_given_y1_vanishes(signs4):
    Y1 = signs4.rv(lambda a: a[0] * a[1])
    Y4 = signs4.rv(lambda a: a[3] * a[0])
    assert set(cond_exp(Y4, sigma_of([Y1])).values) == {0}


def test_rv_arithmetic_and_indicators():
    sp = FiniteSpace.uniform(range(4))
    x = sp.rv(lambda a: a)
    assert (x + 1).values == (1, 2, 3, 4)
    assert (2 - x).values == (2, 1, 0, -1)
    assert (x * x).values == (0, 1, 4, 9)
    assert (-x).values == (0, -1, -2, -3)
    assert x.eq(2).values == (0, 0, 1, 0) and x.ne(2).values == (1, 1, 0, 1)
    assert x.expectation() == Fraction(3, 2)
    pair = sp.rv(lambda a: (a, -a))
    assert pair.arity == 2 and pair.coord(1).values == (0, -1, -2, -3)
    with pytest.raises(StructuralError):
        Rv(sp, (1, 2))


def test_fmt_number_renders_rationals():
    assert fmt_number(Fraction(2, 6)) == "1/3"
    assert fmt_number(Fraction(4, 2)) == "2"
    assert fmt_number(0.5) == 0.5


@st.composite
def weighted_space(draw):
    n = draw(st.integers(2, 8))
    ints = draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    s = sum(ints)
    sp = FiniteSpace(tuple(range(n)), tuple(Fraction(i, s) for i in ints))
    h = Rv(sp, draw(st.lists(st.integers(-5, 5), min_size=n, max_size=n)))
    fine_labels = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    merge = draw(st.lists(st.integers(0, 1), min_size=4, max_size=4))
    fine = sigma_of([Rv(sp, fine_labels)])
    coarse = sigma_of([Rv(sp, [merge[v] for v in fine_labels])])
    return sp, h, fine, coarse


@settings(max_examples=60, deadline=None)
@given(weighted_space())
def test_tower_property_exact(case):
    sp, h, fine, coarse = case
    assert fine.refines(coarse)
    assert cond_exp(cond_exp(h, fine), coarse).values == cond_exp(h, coarse).values
    assert cond_exp(h, fine).expectation() == h.expectation()


@settings(max_examples=60, deadline=None)
@given(weighted_space(), st.integers(0, 3), st.fractions(min_value=-2, max_value=2))
def test_projection_minimises_square_error(case, which, eps):
    sp, h, fine, _ = case
    proj = cond_exp(h, fine)
    blk = set(fine.blocks[which % len(fine)])
    pert = Rv(sp, [v + (eps if i in blk else 0) for i, v in enumerate(proj.values)])
    err = lambda g: ((h - g) * (h - g)).expectation()
    assert err(pert) >= err(proj)
    if eps != 0:
        assert err(pert) > err(proj)
