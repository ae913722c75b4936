from config import AnalysisConfig
from invariants import check_epsilon_intertwining, check_order, check_semigroup_laws, run_invariant_suite
from semigroup_core import ChainFamily, symmetric_inverse_monoid


def test_laws_on_small_carriers():
    assert check_semigroup_laws(symmetric_inverse_monoid(2), 0) == {'failures': 0}
    assert check_order(ChainFamily(with_symmetry=True), 4) == {'failures': 0}
    assert check_epsilon_intertwining(symmetric_inverse_monoid(3), 0) == {'failures': 0}


def test_invariant_suite_passes():
    report = run_invariant_suite(AnalysisConfig(family='chain_with_symmetry', truncation=3))
    failed = [row for row in report['checks'] if not row['passed']]
    assert failed == []
    assert report['passed']
    carriers = {row['carrier'] for row in report['checks']}
    assert {'I2', 'I3', 'chain_with_symmetry', 'pure_chain', 'bicyclic', 'polycyclic(2)', 'A', 'B'} <= carriers
