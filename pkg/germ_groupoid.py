"""Germs of the action on the character space, and two routes to Hausdorffness"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from continuity import (
    CONTINUOUS,
    DISCONTINUOUS,
    DEFAULT_BASIS_BUDGET,
    SemigroupVerdict,
    semigroup_verdict,
)
from errors import InconclusiveError, UsageError
from semigroup_core import Element, InverseSemigroup
from spectrum import (
    BasicOpen,
    Character,
    act_character,
    basic_opens_containing,
    characters,
    principal_members,
)

logger = logging.getLogger(__name__)

SEPARATED = 'separated'
NOT_SEPARATED = 'not_separated'
INCONCLUSIVE = 'inconclusive'


@dataclass(frozen=True)
class GermRep:
    g: Element
    x: Character

    def __post_init__(self):
        carrier = self.g.carrier
        if not self.x.evaluate(carrier.compose(carrier.star(self.g), self.g)):
            raise UsageError(f"{self.x!r} is not in the carrier of {self.g.name}*{self.g.name}")

    def to_json(self) -> Dict:
        return {'g': self.g.name, 'x': self.x.to_json()}

    def __repr__(self):
        return f"({self.g.name}, {self.x.kind}:{self.x.code})"


@dataclass(frozen=True)
class Germ:
    """A germ class held by its least representative at the truncation used to build it"""
    rep: GermRep

    @property
    def g(self) -> Element:
        return self.rep.g

    @property
    def x(self) -> Character:
        return self.rep.x

    def to_json(self) -> Dict:
        return self.rep.to_json()


@dataclass(frozen=True)
class GroupoidBasisSet:
    """pi(g x U) for a basic open U inside the carrier of g*g"""
    g: Element
    u: BasicOpen

    def __post_init__(self):
        carrier = self.g.carrier
        source = carrier.compose(carrier.star(self.g), self.g)
        if not self.u.empty and not carrier.natural_leq(self.u.positive, source):
            raise UsageError(f"Basic open {self.u.to_json()} is not inside the carrier of {source.name}")

    def contains(self, germ: GermRep) -> bool:
        return self.u.contains(germ.x) and germ_eq(germ, GermRep(self.g, germ.x))

    def to_json(self) -> Dict:
        return {'g': self.g.name, 'open': self.u.to_json()}


def _agreement_idempotent(x: Character, elements: Sequence[Element]) -> Optional[Element]:
    """An idempotent of x's filter deep enough that agreement there decides germ equality"""
    if x.is_principal:
        return x.generator
    return x.carrier.limit_agreement_idempotent(x.code, elements)


def germ_eq(a: GermRep, b: GermRep, truncation: int = 10) -> bool:
    if a.g.carrier is not b.g.carrier:
        raise UsageError("Germs over different carriers")
    if a.x != b.x:
        return False
    carrier = a.g.carrier
    e = _agreement_idempotent(a.x, [a.g, b.g])
    if e is not None:
        return carrier.compose(a.g, e) == carrier.compose(b.g, e)
    # no oracle: a hit in the filter at truncation is conclusive, a miss is not
    for f in carrier.idempotents(truncation):
        if a.x.evaluate(f) and carrier.compose(a.g, f) == carrier.compose(b.g, f):
            return True
    raise InconclusiveError(f"Germ equality of {a!r} and {b!r} undecided at truncation {truncation}")


def source_range(germ: Germ) -> Tuple[Character, Optional[Character]]:
    """Source x and range x.g*"""
    carrier = germ.g.carrier
    return germ.x, act_character(germ.x, carrier.star(germ.g))


def _fiber_elements(x: Character, truncation: int) -> List[Element]:
    carrier = x.carrier
    return [g for g in carrier.elements(truncation)
            if x.evaluate(carrier.compose(carrier.star(g), g))]


def germs_over(x: Character, truncation: int) -> List[Germ]:
    """One Germ per class of (g, x), g at truncation, in canonical order"""
    carrier = x.carrier
    members = _fiber_elements(x, truncation)
    e = _agreement_idempotent(x, members)
    classes: Dict = {}
    if e is not None:
        for g in members:
            classes.setdefault(carrier.compose(g, e), []).append(g)
        reps = [group[0] for group in classes.values()]
    else:
        reps = []
        for g in members:
            if not any(germ_eq(GermRep(g, x), GermRep(r, x), truncation) for r in reps):
                reps.append(g)
    return [Germ(GermRep(g, x)) for g in sorted(reps, key=lambda el: el.sort_key)]


def canonical_germ(rep: GermRep, truncation: int) -> Germ:
    """The class of rep, represented by its least member at truncation"""
    members = [g for g in _fiber_elements(rep.x, truncation)
               if germ_eq(rep, GermRep(g, rep.x), truncation)]
    least = min(members + [rep.g], key=lambda el: el.sort_key)
    return Germ(GermRep(least, rep.x))


def compose_germs(a: Germ, b: Germ, truncation: int = 10) -> Optional[Germ]:
    """
    pi(g, x) pi(h, y) = pi(gh, y) when the range of (h, y) is x; None when
    the pair is not composable.
    """
    _, landing = source_range(b)
    if landing is None or landing != a.x:
        return None
    carrier = a.g.carrier
    return canonical_germ(GermRep(carrier.compose(a.g, b.g), b.x), truncation)


@dataclass(frozen=True)
class HausdorffVerdict:
    hausdorff: Optional[bool]
    continuity: SemigroupVerdict
    evidence: Tuple[GermRep, ...] = ()

    @property
    def status(self) -> str:
        if self.hausdorff is None:
            return 'unknown'
        return 'hausdorff' if self.hausdorff else 'not_hausdorff'

    def to_json(self) -> Dict:
        data = {'verdict': self.status, 'e_continuity': self.continuity.status}
        if self.evidence:
            data['evidence_pair'] = [germ.to_json() for germ in self.evidence]
        elif self.hausdorff:
            data['certificates'] = {
                g.name: [e.name for e in v.certificate] for g, v in self.continuity.verdicts
            }
        return data


def hausdorff_verdict(carrier: InverseSemigroup, truncation: int,
                      basis_budget: int = DEFAULT_BASIS_BUDGET) -> HausdorffVerdict:
    """Hausdorff iff E-continuous; a discontinuity at g with witness x yields the pair (g,x), (g*g,x)"""
    continuity = semigroup_verdict(carrier, truncation, basis_budget)
    if continuity.status == CONTINUOUS:
        return HausdorffVerdict(True, continuity)
    hit = continuity.first(DISCONTINUOUS)
    if hit is None:
        logger.warning(f"Hausdorff verdict for {carrier.label} unknown at truncation {truncation}")
        return HausdorffVerdict(None, continuity)
    g, verdict = hit
    x = verdict.witness
    pair = (GermRep(g, x), GermRep(carrier.compose(carrier.star(g), g), x))
    logger.warning(f"{carrier.label} groupoid is not Hausdorff: {pair[0]!r} and {pair[1]!r} cannot be separated")
    return HausdorffVerdict(False, continuity, pair)


@dataclass(frozen=True)
class SeparationResult:
    status: str
    evidence: Dict

    def to_json(self) -> Dict:
        return {'status': self.status, 'evidence': self.evidence}


def _distinguishing_idempotent(x: Character, y: Character, truncation: int) -> Optional[Element]:
    carrier = x.carrier
    pool = list(carrier.idempotents(truncation))
    pool += [z.generator for z in (x, y) if z.is_principal]
    for f in pool:
        if x.evaluate(f) and not y.evaluate(f):
            return f
    return None


def _separate_bases(a: GermRep, b: GermRep, truncation: int) -> SeparationResult:
    carrier = a.g.carrier
    source_a = carrier.compose(carrier.star(a.g), a.g)
    source_b = carrier.compose(carrier.star(b.g), b.g)
    f = _distinguishing_idempotent(a.x, b.x, truncation)
    if f is not None:
        u_a = BasicOpen.normalized(carrier.compose(source_a, f))
        u_b = BasicOpen.normalized(source_b, (f,))
    else:
        f = _distinguishing_idempotent(b.x, a.x, truncation)
        if f is None:
            return SeparationResult(INCONCLUSIVE, {'reason': 'bases not distinguished at truncation'})
        u_a = BasicOpen.normalized(source_a, (f,))
        u_b = BasicOpen.normalized(carrier.compose(source_b, f))
    # disjoint base sets give disjoint germ sets
    return SeparationResult(SEPARATED, {
        'distinguishing_idempotent': f.name,
        'open_a': GroupoidBasisSet(a.g, u_a).to_json(),
        'open_b': GroupoidBasisSet(b.g, u_b).to_json(),
    })


def _common_germ(a: GermRep, b: GermRep, u: BasicOpen, v: BasicOpen, truncation: int) -> Optional[Character]:
    for y in principal_members(u.intersect(v), truncation):
        if germ_eq(GermRep(a.g, y), GermRep(b.g, y), truncation):
            return y
    return None


def direct_separation_check(a: GermRep, b: GermRep, truncation: int,
                            basis_budget: int = DEFAULT_BASIS_BUDGET) -> SeparationResult:
    """
    Same base, g and h: the opens pi(g x U), pi(h x U) with U the carrier of
    g*g h*h minus the carrier of sup{e <= h*g} are disjoint whenever that sup
    is attained. Otherwise every pair of basis neighbourhoods is searched for
    a common germ.
    """
    if germ_eq(a, b, truncation):
        raise UsageError(f"{a!r} and {b!r} are the same germ")
    if a.x != b.x:
        return _separate_bases(a, b, truncation)

    carrier = a.g.carrier
    g, h, x = a.g, b.g, a.x
    source_g = carrier.compose(carrier.star(g), g)
    source_h = carrier.compose(carrier.star(h), h)
    shape = carrier.lower_set_shape(carrier.compose(carrier.star(h), g))

    if shape is not None and shape.bounded:
        u = BasicOpen.normalized(carrier.compose(source_g, source_h), shape.maxima)
        clashes = [y for y in characters(carrier, truncation)
                   if u.contains(y) and germ_eq(GermRep(g, y), GermRep(h, y), truncation)]
        if u.contains(x) and not clashes:
            return SeparationResult(SEPARATED, {
                'open_a': GroupoidBasisSet(g, u).to_json(),
                'open_b': GroupoidBasisSet(h, u).to_json(),
            })
        logger.error(f"Separating open for {a!r}, {b!r} failed: clashes at {clashes!r}")
        return SeparationResult(INCONCLUSIVE, {'reason': 'separating open failed verification'})

    opens_a = basic_opens_containing(x, truncation, basis_budget, within=source_g)
    opens_b = basic_opens_containing(x, truncation, basis_budget, within=source_h)
    samples = []
    for u, v in itertools.product(opens_a, opens_b):
        y = _common_germ(a, b, u, v, truncation)
        if y is None:
            return SeparationResult(INCONCLUSIVE, {
                'reason': 'no common germ found within the horizon',
                'open_a': u.to_json(), 'open_b': v.to_json(),
            })
        if len(samples) < 5:
            samples.append({'open_a': u.to_json(), 'open_b': v.to_json(), 'common_base': y.to_json()})
    return SeparationResult(NOT_SEPARATED, {
        'pairs_checked': len(opens_a) * len(opens_b),
        'samples': samples,
    })


def basis_neighbourhood(a: GermRep, g: Element, u: BasicOpen, truncation: int = 10) -> BasicOpen:
    """
    For a = (h, x) equivalent to (g, x) with x in u, an open V around x with
    h x V inside pi(g x u).
    """
    carrier = g.carrier
    basis = GroupoidBasisSet(g, u)
    if not basis.contains(a):
        raise UsageError(f"{a!r} is not in {basis.to_json()}")
    h = a.g
    e = _agreement_idempotent(a.x, [g, h])
    if e is None:
        raise InconclusiveError(f"No agreement idempotent for {a!r} and {g.name}")
    positive = carrier.compose(carrier.compose(e, u.positive), carrier.compose(carrier.star(h), h))
    v = BasicOpen.normalized(positive, u.negatives)
    for y in characters(carrier, truncation):
        if v.contains(y) and not germ_eq(GermRep(h, y), GermRep(g, y), truncation):
            raise InconclusiveError(f"Neighbourhood {v.to_json()} of {a!r} leaves the basis set at {y!r}")
    return v


def theorem_cross_check(carrier: InverseSemigroup, truncation: int,
                        basis_budget: int = DEFAULT_BASIS_BUDGET,
                        max_pairs_per_fiber: Optional[int] = None) -> Dict:
    """Compare the continuity route with direct separation of same-base germ pairs; no cap checks every pair"""
    verdict = hausdorff_verdict(carrier, truncation, basis_budget)
    counts = {SEPARATED: 0, NOT_SEPARATED: 0, INCONCLUSIVE: 0}
    non_separated = []
    examined = skipped = 0
    for x in characters(carrier, truncation):
        fiber = germs_over(x, truncation)
        total = len(fiber) * (len(fiber) - 1) // 2
        pairs = itertools.combinations(fiber, 2)
        if max_pairs_per_fiber is not None:
            pairs = itertools.islice(pairs, max_pairs_per_fiber)
            skipped += max(0, total - max_pairs_per_fiber)
        for first, second in pairs:
            result = direct_separation_check(first.rep, second.rep, truncation, basis_budget)
            counts[result.status] += 1
            examined += 1
            if result.status == NOT_SEPARATED:
                non_separated.append([first.to_json(), second.to_json()])
    if skipped:
        logger.warning(f"Cross check on {carrier.label} skipped {skipped} germ pairs over the per-fiber cap")

    if verdict.hausdorff is None:
        agrees = None
    elif verdict.hausdorff:
        agrees = counts[NOT_SEPARATED] == 0
    else:
        agrees = counts[NOT_SEPARATED] > 0
    if agrees is False:
        logger.warning(f"Direct separation disagrees with the continuity route on {carrier.label}")
    return {
        'carrier': carrier.label,
        'truncation': truncation,
        'theorem_route': verdict.status,
        'direct_counts': counts,
        'pairs_examined': examined,
        'pairs_skipped': skipped,
        'non_separated_pairs': non_separated[:10],
        'agrees': agrees,
    }
