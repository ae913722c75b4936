"""Invariant suite behind the `check` command"""

import itertools
import logging
import random
from typing import Callable, Dict, List

from af_ktheory import VARIANTS, inclusion, stage
from config import AnalysisConfig
from continuity import CONTINUOUS, e_continuity_verdict
from germ_groupoid import GermRep, germ_eq, germs_over, theorem_cross_check
from l2_modules import (
    EpsilonModuleVector,
    equivariance_check,
    explicit_join_set,
    gram_psd_check,
    phi_inner,
)
from semigroup_core import FamilySpec, InverseSemigroup, symmetric_inverse_monoid
from spectrum import (
    act_character,
    characters,
    density_check,
    discretized_collapse_report,
    epsilon_action,
    principal,
)

logger = logging.getLogger(__name__)

SMALL_TRUNCATION = 4


def _carriers(config: AnalysisConfig) -> Dict[str, InverseSemigroup]:
    carriers = {'I2': symmetric_inverse_monoid(2), 'I3': symmetric_inverse_monoid(3)}
    for family in ('chain_with_symmetry', 'pure_chain', 'bicyclic'):
        carriers[family] = FamilySpec(family).build(config.kill_zero, config.limit_depth)
    carriers['polycyclic(2)'] = FamilySpec('polycyclic', {'n': 2}).build(config.kill_zero, config.limit_depth)
    return carriers


def check_semigroup_laws(carrier: InverseSemigroup, truncation: int) -> Dict:
    elements = carrier.elements(truncation)
    failures = 0
    for a, b in itertools.product(elements, repeat=2):
        ab = carrier.compose(a, b)
        if carrier.star(ab) != carrier.compose(carrier.star(b), carrier.star(a)):
            failures += 1
        for c in elements:
            if carrier.compose(ab, c) != carrier.compose(a, carrier.compose(b, c)):
                failures += 1
    for a in elements:
        if carrier.compose(carrier.compose(a, carrier.star(a)), a) != a:
            failures += 1
    return {'failures': failures}


def check_order(carrier: InverseSemigroup, truncation: int) -> Dict:
    elements = carrier.elements(truncation)
    leq = {(g, h): carrier.natural_leq(g, h) for g in elements for h in elements}
    failures = sum(not leq[(g, g)] for g in elements)
    for g, h in itertools.product(elements, repeat=2):
        if g != h and leq[(g, h)] and leq[(h, g)]:
            failures += 1
        # g = h g* g iff g = g g* h
        if leq[(g, h)] != (carrier.compose(carrier.compose(g, carrier.star(g)), h) == g):
            failures += 1
    return {'failures': failures}


def check_idempotents_commute(carrier: InverseSemigroup, truncation: int) -> Dict:
    idem = carrier.idempotents(truncation)
    failures = sum(carrier.compose(e, f) != carrier.compose(f, e) for e in idem for f in idem)
    return {'failures': failures}


def check_character_laws(carrier: InverseSemigroup, truncation: int) -> Dict:
    chars = characters(carrier, truncation)
    idem = carrier.idempotents(truncation)
    failures = 0
    for x in chars:
        for e, f in itertools.product(idem, repeat=2):
            if x.evaluate(carrier.compose(e, f)) != x.evaluate(e) * x.evaluate(f):
                failures += 1
    elements = carrier.elements(min(truncation, 2))
    for x in chars:
        for g, h in itertools.product(elements, repeat=2):
            step = act_character(x, g)
            twice = act_character(step, h) if step is not None else None
            direct = act_character(x, carrier.compose(g, h))
            if twice is not None and direct is not None and twice != direct:
                failures += 1
    return {'failures': failures, 'characters': len(chars)}


def check_epsilon_intertwining(carrier: InverseSemigroup, truncation: int) -> Dict:
    """Principal(e).g is Principal(g* e g), matching g*(eps_e)"""
    failures = 0
    for g in carrier.elements(min(truncation, 2)):
        g_star = carrier.star(g)
        for e in carrier.idempotents(truncation):
            moved = act_character(principal(e), g)
            pushed = epsilon_action(g_star, e)
            if moved is None:
                continue
            if pushed.is_zero() or pushed.terms[0][0] != moved.generator:
                failures += 1
    return {'failures': failures}


def check_germ_equivalence(carrier: InverseSemigroup, truncation: int) -> Dict:
    failures = 0
    for x in characters(carrier, truncation):
        fiber = [g for g in carrier.elements(truncation)
                 if x.evaluate(carrier.compose(carrier.star(g), g))][:12]
        reps = [GermRep(g, x) for g in fiber]
        for a, b, c in itertools.product(reps, repeat=3):
            if germ_eq(a, b) and germ_eq(b, c) and not germ_eq(a, c):
                failures += 1
        for a, b in itertools.product(reps, repeat=2):
            if germ_eq(a, b) != germ_eq(b, a):
                failures += 1
    return {'failures': failures}


def check_inner_products(carrier: InverseSemigroup, truncation: int) -> Dict:
    elements = carrier.elements(min(truncation, 2))
    chars = characters(carrier, truncation)
    failures = 0
    for g in elements:
        self_inner = phi_inner(g, g, truncation)
        gg = carrier.compose(g, carrier.star(g))
        failures += sum(self_inner.evaluate(x) != x.evaluate(gg) for x in chars)
    for g, h in itertools.combinations(elements, 2):
        if set(phi_inner(g, h, truncation).join_set) != set(explicit_join_set(g, h, truncation)):
            failures += 1
    return {'failures': failures}


def check_gram(carrier: InverseSemigroup, truncation: int, seed: int) -> Dict:
    rng = random.Random(seed)
    elements = carrier.elements(min(truncation, 2))
    chars = characters(carrier, truncation)
    failures = 0
    for _ in range(10):
        subset = rng.sample(elements, min(len(elements), rng.randint(1, 4)))
        if not gram_psd_check(subset, chars, truncation)['passed']:
            failures += 1
    for g, a, b in itertools.islice(itertools.product(elements, repeat=3), 60):
        if not equivariance_check(g, a, b, chars, truncation)['passed']:
            failures += 1
    return {'failures': failures}


def check_epsilon_module(carrier: InverseSemigroup, truncation: int) -> Dict:
    elements = carrier.elements(min(truncation, 2))
    failures = 0
    for g, h1, h2 in itertools.product(elements, repeat=3):
        delta = EpsilonModuleVector.basis(g)
        if delta.act(h1).act(h2) != delta.act(carrier.compose(h2, h1)):
            failures += 1
    return {'failures': failures}


def check_continuity(carrier: InverseSemigroup, truncation: int) -> Dict:
    failures = 0
    for g in carrier.elements(truncation):
        verdict = e_continuity_verdict(g, truncation)
        if verdict.status != CONTINUOUS:
            continue
        lower = [e for e in carrier.idempotents(truncation) if carrier.compose(g, e) == e]
        if any(not carrier.natural_leq(f, g) for f in verdict.certificate):
            failures += 1
        if any(not any(carrier.natural_leq(e, f) for f in verdict.certificate) for e in lower):
            failures += 1
    return {'failures': failures}


def _row(name: str, carrier_label: str, run: Callable[[], Dict]) -> Dict:
    detail = run()
    passed = detail.get('failures', 0) == 0 and detail.get('passed', True) and detail.get('agrees', True) is not False
    if not passed:
        logger.warning(f"Invariant {name} failed on {carrier_label}: {detail}")
    else:
        logger.debug(f"Invariant {name} holds on {carrier_label}")
    return {'invariant': name, 'carrier': carrier_label, 'passed': passed, 'detail': detail}


def run_invariant_suite(config: AnalysisConfig) -> Dict:
    truncation = min(config.truncation, SMALL_TRUNCATION)
    rows: List[Dict] = []
    for label, carrier in _carriers(config).items():
        law_truncation = 2 if label.startswith('polycyclic') else truncation
        rows.append(_row('semigroup_laws', label, lambda: check_semigroup_laws(carrier, law_truncation)))
        rows.append(_row('natural_order', label, lambda: check_order(carrier, law_truncation)))
        rows.append(_row('idempotents_commute', label, lambda: check_idempotents_commute(carrier, truncation)))
        rows.append(_row('characters', label, lambda: check_character_laws(carrier, law_truncation)))
        rows.append(_row('epsilon_intertwining', label, lambda: check_epsilon_intertwining(carrier, law_truncation)))
        rows.append(_row('continuity_certificates', label, lambda: check_continuity(carrier, law_truncation)))
        rows.append(_row('germ_equivalence', label, lambda: check_germ_equivalence(carrier, law_truncation)))
        rows.append(_row('inner_products', label, lambda: check_inner_products(carrier, law_truncation)))
        rows.append(_row('gram', label, lambda: check_gram(carrier, law_truncation, config.seed)))
        rows.append(_row('epsilon_module', label, lambda: check_epsilon_module(carrier, law_truncation)))
        rows.append(_row('density', label, lambda: density_check(carrier, truncation, config.basis_budget)))
        rows.append(_row('theorem_cross_check', label,
                         lambda: theorem_cross_check(carrier, law_truncation, config.basis_budget, 10)))

    rows.append(_row('collapse', 'polycyclic(2)', lambda: discretized_collapse_report(
        FamilySpec('polycyclic', {'n': 2}).build(), truncation)))
    for variant in VARIANTS:
        rows.append(_row('bratteli_ranks', variant, lambda: {
            'failures': sum(stage(variant, n).rank != n + 2 for n in range(8))
            + sum(len(inclusion(variant, n).splitting_rows) != (1 if variant == 'A' else 0) for n in range(7))
        }))

    failed = [row for row in rows if not row['passed']]
    logger.info(f"Invariant suite: {len(rows) - len(failed)}/{len(rows)} checks passed")
    return {'checks': rows, 'passed': not failed, 'failed': len(failed)}
