from math import comb, factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import ClosureCapExceeded, UsageError
from semigroup_core import (
    BicyclicMonoid,
    ChainFamily,
    FamilySpec,
    PartialBijection,
    PolycyclicMonoid,
    compose,
    generate_closure,
    natural_leq,
    star,
    symmetric_inverse_monoid,
)

CHAIN = ChainFamily(with_symmetry=True)
PURE = ChainFamily(with_symmetry=False)
BICYCLIC = BicyclicMonoid()
POLY = PolycyclicMonoid(2)
I3 = symmetric_inverse_monoid(3)

CARRIERS = [(CHAIN, 6), (PURE, 6), (BICYCLIC, 4), (POLY, 2), (I3, 0)]


def elements_of(carrier, truncation):
    return st.sampled_from(carrier.elements(truncation))


def triples():
    return st.sampled_from(CARRIERS).flatmap(
        lambda ct: st.tuples(*[elements_of(*ct)] * 3))


def test_partial_bijection_rejects_repeats():
    with pytest.raises(UsageError):
        PartialBijection.from_pairs(3, [(1, 2), (1, 3)])
    with pytest.raises(UsageError):
        PartialBijection.from_pairs(3, [(1, 2), (3, 2)])
    with pytest.raises(UsageError):
        PartialBijection.from_pairs(2, [(1, 3)])


def test_partial_bijection_star_gives_partial_identity():
    p = PartialBijection.from_pairs(3, [(1, 2), (3, 1)])
    assert p.star().compose(p) == PartialBijection.partial_identity(3, [1, 3])
    assert p.compose(p.star()) == PartialBijection.partial_identity(3, [1, 2])


def test_partial_identity_is_idempotent():
    e = PartialBijection.partial_identity(2, [1, 2])
    assert e.compose(e) == e


@pytest.mark.parametrize('degree', [1, 2, 3])
def test_symmetric_inverse_monoid_size(degree):
    expected = sum(comb(degree, k) ** 2 * factorial(k) for k in range(degree + 1))
    assert symmetric_inverse_monoid(degree).size == expected


def test_i3_from_three_generators():
    generators = [
        PartialBijection.partial_identity(3, [1, 2]),
        PartialBijection.from_pairs(3, [(1, 2), (2, 1), (3, 3)]),
        PartialBijection.from_pairs(3, [(1, 2), (2, 3), (3, 1)]),
    ]
    closure = generate_closure(generators)
    assert closure.size == 34
    assert len(closure.idempotents(0)) == 8
    assert closure.zero() is not None


def test_closure_cap():
    generators = [PartialBijection.from_pairs(3, [(1, 2), (2, 3), (3, 1)]),
                  PartialBijection.from_pairs(3, [(1, 2), (2, 1), (3, 3)])]
    with pytest.raises(ClosureCapExceeded) as info:
        generate_closure(generators, cap=4)
    assert info.value.cap == 4
    assert info.value.partial_size > 4


def test_closure_rejects_mixed_degrees():
    with pytest.raises(UsageError):
        generate_closure([PartialBijection.partial_identity(2, [1]),
                          PartialBijection.partial_identity(3, [1])])


def test_chain_products():
    s, e3, e5 = CHAIN.parse('S'), CHAIN.parse('e3'), CHAIN.parse('e5')
    assert compose(s, e3) == e3
    assert compose(e3, s) == e3
    assert compose(s, s) == CHAIN.parse('1')
    assert compose(e5, e3) == e3
    assert star(s) == s


def test_bicyclic_product():
    assert compose(BICYCLIC.parse('(1,0)'), BICYCLIC.parse('(0,1)')) == BICYCLIC.parse('(1,1)')
    assert compose(BICYCLIC.parse('(0,1)'), BICYCLIC.parse('(1,0)')) == BICYCLIC.parse('(0,0)')
    assert star(BICYCLIC.parse('(2,5)')) == BICYCLIC.parse('(5,2)')


def test_polycyclic_prefix_cancellation():
    s1, s2 = POLY.parse('1|-'), POLY.parse('2|-')
    assert compose(star(s1), s1) == POLY.parse('-|-')
    assert compose(star(s1), s2) == POLY.zero()
    assert compose(POLY.parse('1|2'), POLY.parse('21|1')) == POLY.parse('11|1')


def test_natural_order_on_chain():
    e1, e2, one, s = (CHAIN.parse(n) for n in ('e1', 'e2', '1', 'S'))
    assert natural_leq(e1, e2)
    assert not natural_leq(e2, e1)
    assert natural_leq(e2, s)
    assert not natural_leq(one, s)


def test_compose_rejects_carrier_mismatch():
    with pytest.raises(UsageError):
        compose(CHAIN.parse('1'), PURE.parse('1'))


@pytest.mark.parametrize('carrier, name', [
    (CHAIN, 'x'), (PURE, 'S'), (BICYCLIC, '(1,)'), (POLY, '13|-'), (I3, 'g99'),
])
def test_parse_rejects_unknown_names(carrier, name):
    with pytest.raises(UsageError):
        carrier.parse(name)


@pytest.mark.parametrize('carrier, truncation', CARRIERS)
def test_names_round_trip(carrier, truncation):
    for g in carrier.elements(truncation):
        assert carrier.parse(g.name) == g


def test_family_spec_validation():
    with pytest.raises(UsageError):
        FamilySpec('free_group')
    with pytest.raises(UsageError):
        FamilySpec('bicyclic', truncation=0)
    with pytest.raises(UsageError):
        FamilySpec('polycyclic', {'n': 1}).build()
    assert FamilySpec('polycyclic', {'n': 3}).build().n == 3


def test_lower_set_shapes():
    assert not CHAIN.lower_set_shape(CHAIN.parse('S')).bounded
    assert PURE.lower_set_shape(PURE.parse('e4')).maxima == (PURE.parse('e4'),)
    assert BICYCLIC.lower_set_shape(BICYCLIC.parse('(1,2)')).maxima == ()
    assert POLY.lower_set_shape(POLY.parse('1|2')).maxima == (POLY.zero(),)


@settings(max_examples=200)
@given(triples())
def test_associativity(abc):
    a, b, c = abc
    assert compose(compose(a, b), c) == compose(a, compose(b, c))


@settings(max_examples=200)
@given(triples())
def test_star_laws(abc):
    a, b, _ = abc
    assert star(star(a)) == a
    assert star(compose(a, b)) == compose(star(b), star(a))
    assert compose(compose(a, star(a)), a) == a


@settings(max_examples=200)
@given(triples())
def test_idempotents_commute(abc):
    a, b, _ = abc
    e, f = compose(a, star(a)), compose(star(b), b)
    assert compose(e, f) == compose(f, e)


@settings(max_examples=200)
@given(triples())
def test_natural_order_is_partial_order(abc):
    a, b, c = abc
    assert natural_leq(a, a)
    if natural_leq(a, b) and natural_leq(b, a):
        assert a == b
    if natural_leq(a, b) and natural_leq(b, c):
        assert natural_leq(a, c)
