import pytest

from errors import InconclusiveError, UsageError
from germ_groupoid import (
    INCONCLUSIVE,
    NOT_SEPARATED,
    SEPARATED,
    GermRep,
    GroupoidBasisSet,
    basis_neighbourhood,
    canonical_germ,
    compose_germs,
    direct_separation_check,
    germ_eq,
    germs_over,
    hausdorff_verdict,
    source_range,
    theorem_cross_check,
)
from semigroup_core import BicyclicMonoid, ChainFamily, PolycyclicMonoid, symmetric_inverse_monoid
from spectrum import BasicOpen, characters, limit, principal

CHAIN = ChainFamily(with_symmetry=True)
PURE = ChainFamily(with_symmetry=False)
BICYCLIC = BicyclicMonoid()
POLY = PolycyclicMonoid(2)
I3 = symmetric_inverse_monoid(3)


class BicyclicWithoutAgreement(BicyclicMonoid):
    def limit_agreement_idempotent(self, code, elements):
        return None


def rep(carrier, g, e):
    return GermRep(carrier.parse(g), principal(carrier.parse(e)))


def test_germ_rep_needs_source_condition():
    with pytest.raises(UsageError):
        rep(CHAIN, 'e1', '1')


def test_germ_equality_on_chain():
    assert germ_eq(rep(CHAIN, 'S', 'e3'), rep(CHAIN, '1', 'e3'))
    assert not germ_eq(rep(CHAIN, 'S', '1'), rep(CHAIN, '1', '1'))
    assert not germ_eq(rep(CHAIN, '1', 'e2'), rep(CHAIN, '1', 'e3'))


def test_germ_equality_rejects_mixed_carriers():
    with pytest.raises(UsageError):
        germ_eq(rep(CHAIN, '1', '1'), rep(PURE, '1', '1'))


def test_germ_equality_at_bicyclic_limit():
    inf = limit(BICYCLIC, 'inf')
    assert germ_eq(GermRep(BICYCLIC.parse('(0,0)'), inf), GermRep(BICYCLIC.parse('(4,4)'), inf))
    assert not germ_eq(GermRep(BICYCLIC.parse('(1,0)'), inf), GermRep(BICYCLIC.parse('(0,0)'), inf))


def test_germ_equality_without_oracle():
    carrier = BicyclicWithoutAgreement()
    inf = limit(carrier, 'inf')
    assert germ_eq(GermRep(carrier.parse('(0,0)'), inf), GermRep(carrier.parse('(1,1)'), inf), 5)
    with pytest.raises(InconclusiveError):
        germ_eq(GermRep(carrier.parse('(1,0)'), inf), GermRep(carrier.parse('(0,0)'), inf), 5)


@pytest.mark.parametrize('carrier, base, expected', [
    (CHAIN, '1', 2),
    (CHAIN, 'e1', 1),
    (CHAIN, 'e5', 1),
    (PURE, '1', 1),
    (PURE, 'e3', 1),
])
def test_germ_class_counts(carrier, base, expected):
    assert len(germs_over(principal(carrier.parse(base)), 10)) == expected


def test_germ_classes_match_brute_force_on_i3():
    for x in characters(I3, 0):
        members = [g for g in I3.elements(0) if x.evaluate(I3.compose(I3.star(g), g))]
        classes = []
        for g in members:
            if not any(germ_eq(GermRep(g, x), GermRep(r, x)) for r in classes):
                classes.append(g)
        assert len(germs_over(x, 0)) == len(classes)


def test_source_range():
    germ = germs_over(principal(CHAIN.parse('1')), 10)[1]
    source, landing = source_range(germ)
    assert germ.g == CHAIN.parse('S')
    assert source == landing == principal(CHAIN.parse('1'))


def test_canonical_germ_picks_least_member():
    germ = canonical_germ(rep(CHAIN, 'S', 'e2'), 10)
    assert germ.g == CHAIN.parse('1')


def test_composition_on_chain_isotropy():
    one, s = germs_over(principal(CHAIN.parse('1')), 10)
    assert compose_germs(s, s).g == CHAIN.parse('1')
    assert compose_germs(s, one).g == CHAIN.parse('S')
    assert compose_germs(one, one).g == CHAIN.parse('1')


def test_composition_is_associative_on_i3_isotropy():
    x = principal(I3.idempotents(0)[-1])
    fiber = [germ for germ in germs_over(x, 0) if source_range(germ)[1] == x]
    for a in fiber:
        for b in fiber:
            for c in fiber:
                left = compose_germs(compose_germs(a, b, 0), c, 0)
                right = compose_germs(a, compose_germs(b, c, 0), 0)
                assert left == right


def test_composition_needs_matching_range():
    a = germs_over(principal(BICYCLIC.parse('(0,0)')), 3)[0]
    b = germs_over(principal(BICYCLIC.parse('(1,1)')), 3)[0]
    assert compose_germs(a, b) is None


def test_chain_is_not_hausdorff():
    verdict = hausdorff_verdict(CHAIN, 20)
    assert verdict.status == 'not_hausdorff'
    first, second = verdict.evidence
    assert first == rep(CHAIN, 'S', '1')
    assert second == rep(CHAIN, '1', '1')
    result = direct_separation_check(first, second, 20)
    assert result.status == NOT_SEPARATED


@pytest.mark.parametrize('carrier, truncation', [(PURE, 20), (BICYCLIC, 20), (POLY, 4)])
def test_positive_families_are_hausdorff(carrier, truncation):
    verdict = hausdorff_verdict(carrier, truncation)
    assert verdict.hausdorff is True
    assert 'certificates' in verdict.to_json()


def test_separation_of_bicyclic_germs():
    x = principal(BICYCLIC.parse('(2,2)'))
    a = GermRep(BICYCLIC.parse('(0,0)'), x)
    b = GermRep(BICYCLIC.parse('(1,0)'), x)
    result = direct_separation_check(a, b, 8)
    assert result.status == SEPARATED
    assert result.to_json()['evidence']['open_a']['g'] == '(0,0)'


def test_separation_of_different_bases():
    result = direct_separation_check(rep(CHAIN, '1', 'e1'), rep(CHAIN, '1', 'e2'), 10)
    assert result.status == SEPARATED
    assert result.evidence['distinguishing_idempotent'] == 'e1'


def test_separation_rejects_equal_germs():
    with pytest.raises(UsageError):
        direct_separation_check(rep(CHAIN, 'S', 'e2'), rep(CHAIN, '1', 'e2'), 10)


def test_basis_set_requires_open_inside_source():
    with pytest.raises(UsageError):
        GroupoidBasisSet(CHAIN.parse('e2'), BasicOpen.normalized(CHAIN.parse('1')))


def test_basis_neighbourhood():
    u = BasicOpen.normalized(CHAIN.parse('1'), [CHAIN.parse('e3')])
    v = basis_neighbourhood(rep(CHAIN, 'S', 'e5'), CHAIN.parse('1'), u, 10)
    assert v.positive == CHAIN.parse('e5')
    assert v.contains(principal(CHAIN.parse('e4')))
    assert not v.contains(principal(CHAIN.parse('e3')))


def test_basis_neighbourhood_rejects_outside_germ():
    u = BasicOpen.normalized(CHAIN.parse('1'))
    with pytest.raises(UsageError):
        basis_neighbourhood(rep(CHAIN, 'S', '1'), CHAIN.parse('1'), u, 10)


@pytest.mark.parametrize('carrier, truncation', [
    (CHAIN, 6), (PURE, 6), (BICYCLIC, 6), (POLY, 3), (I3, 0),
])
def test_theorem_cross_check_agrees(carrier, truncation):
    report = theorem_cross_check(carrier, truncation, 50, 20)
    assert report['agrees'] is True
    assert report['direct_counts'][INCONCLUSIVE] == 0


def test_cross_check_finds_the_chain_pair():
    report = theorem_cross_check(CHAIN, 6, 50)
    assert report['theorem_route'] == 'not_hausdorff'
    assert report['direct_counts'][NOT_SEPARATED] == 1
    assert report['pairs_skipped'] == 0


def _all_pairs(carrier, truncation):
    return sum(len(fiber) * (len(fiber) - 1) // 2
               for fiber in (germs_over(x, truncation) for x in characters(carrier, truncation)))


@pytest.mark.parametrize('carrier', [PURE, BICYCLIC])
def test_cross_check_separates_every_pair_at_truncation_20(carrier):
    report = theorem_cross_check(carrier, 20)
    assert report['agrees'] is True
    assert report['pairs_skipped'] == 0
    assert report['pairs_examined'] == _all_pairs(carrier, 20)
    assert report['direct_counts'] == {SEPARATED: report['pairs_examined'], NOT_SEPARATED: 0, INCONCLUSIVE: 0}


def test_bicyclic_pair_count_at_truncation_20():
    assert theorem_cross_check(BICYCLIC, 20)['pairs_examined'] == 10970


def test_cross_check_cap_reports_skipped_pairs():
    capped = theorem_cross_check(BICYCLIC, 20, 50, 5)
    assert capped['pairs_examined'] + capped['pairs_skipped'] == 10970
    assert capped['pairs_skipped'] > 0


@pytest.mark.slow
def test_cross_check_polycyclic_every_pair_at_truncation_4():
    report = theorem_cross_check(POLY, 4)
    assert report['agrees'] is True
    assert report['pairs_skipped'] == 0
    assert report['direct_counts'][SEPARATED] == report['pairs_examined'] == 186897
