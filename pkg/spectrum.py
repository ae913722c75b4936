"""Character space of the idempotent semilattice: characters, basic opens, the epsilon map"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import sympy

from errors import UsageError
from semigroup_core import Element, InverseSemigroup, PolycyclicMonoid, canonical

logger = logging.getLogger(__name__)

PROBE_FACTOR = 2
MAX_NEGATIVES = 2


@dataclass(frozen=True)
class Character:
    """A filter on E, i.e. a point of X"""
    carrier: InverseSemigroup = field(repr=False, compare=False)
    kind: str
    code: str
    generator: Optional[Element] = field(default=None, compare=False)

    @property
    def is_principal(self) -> bool:
        return self.kind == 'principal'

    def evaluate(self, e: Element) -> int:
        """x(e): 1 iff e belongs to the filter"""
        if self.is_principal:
            return int(self.carrier.natural_leq(self.generator, e))
        return int(self.carrier.limit_contains(self.code, e))

    def __call__(self, e: Element) -> int:
        return self.evaluate(e)

    def to_json(self) -> Dict:
        if self.is_principal:
            return {'kind': 'principal', 'e': self.code}
        return {'kind': 'limit', 'code': self.code}

    def __repr__(self):
        return f"Character({self.kind}:{self.code})"


def principal(e: Element) -> Character:
    """epsilon_e, the character with filter {f : f >= e}"""
    if not e.is_idempotent():
        raise UsageError(f"Principal characters need an idempotent, got {e.name}")
    return Character(e.carrier, 'principal', e.name, e)


def limit(carrier: InverseSemigroup, code: str) -> Character:
    return Character(carrier, 'limit', code)


def is_zero_filter(x: Character) -> bool:
    zero = x.carrier.zero()
    return zero is not None and bool(x.evaluate(zero))


def is_admissible(x: Optional[Character]) -> bool:
    return x is not None and not (x.carrier.kill_zero and is_zero_filter(x))


def characters_finite(carrier: InverseSemigroup) -> List[Character]:
    """All filters of a finite E; each has a least element, so each is principal"""
    if not carrier.is_finite:
        raise UsageError(f"{carrier.label} is not finite")
    return [x for x in (principal(e) for e in carrier.idempotents(0)) if is_admissible(x)]


def limit_characters(carrier: InverseSemigroup, truncation: int) -> List[Character]:
    """The non-isolated boundary points the family knows about"""
    boundary = [principal(e) for e in carrier.boundary_idempotents()]
    limits = [limit(carrier, code) for code in carrier.limit_codes(truncation)]
    return [x for x in boundary + limits if is_admissible(x)]


def characters(carrier: InverseSemigroup, truncation: int) -> List[Character]:
    """Principal characters at truncation plus limit characters, deduplicated by code"""
    found: Dict[Tuple[str, str], Character] = {}
    for x in [principal(e) for e in carrier.idempotents(truncation)] + limit_characters(carrier, truncation):
        if is_admissible(x):
            found.setdefault((x.kind, x.code), x)
    return list(found.values())


def probe_characters(carrier: InverseSemigroup, truncation: int) -> List[Character]:
    """Characters searched when deciding whether an open set is inhabited"""
    return characters(carrier, PROBE_FACTOR * truncation)


def parse_character(carrier: InverseSemigroup, text: str) -> Character:
    """Parse 'e3', 'principal:e3' or 'limit:inf'"""
    text = text.strip()
    kind, _, body = text.partition(':')
    if not body:
        kind, body = 'principal', text
    if kind == 'principal':
        x = principal(carrier.parse(body))
    elif kind == 'limit':
        carrier.limit_contains(body, carrier.idempotents(1)[0])
        x = limit(carrier, body)
    else:
        raise UsageError(f"Unknown character kind {kind!r}")
    if not is_admissible(x):
        raise UsageError(f"Character {text!r} is excluded by kill_zero")
    return x


def carrier_membership(x: Character, e: Element) -> int:
    """Whether x lies in the carrier of 1_e"""
    return x.evaluate(e)


def act_character(x: Character, g: Element) -> Optional[Character]:
    """x.g: e -> x(g e g*); None stands for the zero character"""
    carrier = x.carrier
    g_star = carrier.star(g)
    if not x.evaluate(carrier.compose(g, g_star)):
        return None
    if x.is_principal:
        result = principal(carrier.compose(carrier.compose(g_star, x.generator), g))
    else:
        code = carrier.limit_act(x.code, g)
        result = limit(carrier, code) if code is not None else None
    return result if is_admissible(result) else None


def act_indicator(g: Element, e: Element) -> Element:
    """g(1_e) = 1_{g e g*}"""
    carrier = g.carrier
    return carrier.compose(carrier.compose(g, e), carrier.star(g))


def filter_contains(x: Character, z: Character) -> bool:
    """Whether the filter of z is contained in the filter of x"""
    if z.is_principal:
        return bool(x.evaluate(z.generator))
    if x.is_principal:
        return x.carrier.limit_within_principal(z.code, x.generator)
    return x.code == z.code


@dataclass(frozen=True)
class BasicOpen:
    """{x : x(positive) = 1, x(f) = 0 for every negative f}"""
    positive: Element
    negatives: Tuple[Element, ...] = ()
    empty: bool = False

    @classmethod
    def normalized(cls, positive: Element, negatives: Iterable[Element] = ()) -> 'BasicOpen':
        carrier = positive.carrier
        # x(e)=1 and x(f)=0 iff x(e)=1 and x(ef)=0
        cut = canonical(carrier.compose(positive, f) for f in negatives)
        if positive in cut:
            return cls(positive, (positive,), True)
        maximal = [f for f in cut if not any(h != f and carrier.natural_leq(f, h) for h in cut)]
        return cls(positive, tuple(maximal), False)

    def contains(self, x: Character) -> bool:
        if self.empty:
            return False
        return bool(x.evaluate(self.positive)) and not any(x.evaluate(f) for f in self.negatives)

    def restrict(self, f: Element) -> 'BasicOpen':
        """Intersection with carrier(f)"""
        return BasicOpen.normalized(self.positive.carrier.compose(self.positive, f), self.negatives)

    def intersect(self, other: 'BasicOpen') -> 'BasicOpen':
        carrier = self.positive.carrier
        return BasicOpen.normalized(carrier.compose(self.positive, other.positive),
                                    self.negatives + other.negatives)

    def members(self, candidates: Sequence[Character]) -> List[Character]:
        return [x for x in candidates if self.contains(x)]

    def to_json(self) -> Dict:
        return {'positive': self.positive.name, 'negatives': [f.name for f in self.negatives]}


def basic_opens(carrier: InverseSemigroup, truncation: int, budget: int,
                positives: Optional[Iterable[Element]] = None,
                negative_pool: Optional[Iterable[Element]] = None) -> List[BasicOpen]:
    """Normalized basic opens in canonical order, at most `budget` of them"""
    # r <= 2 combinations of `budget` pool elements already exceed the budget
    positives = list(itertools.islice(
        carrier.iter_idempotents(truncation) if positives is None else positives, budget))
    pool = list(itertools.islice(
        carrier.iter_idempotents(truncation) if negative_pool is None else negative_pool, budget))
    found: List[BasicOpen] = []
    seen = set()
    for positive in positives:
        for r in range(MAX_NEGATIVES + 1):
            for combo in itertools.combinations(pool, r):
                if len(found) >= budget:
                    return found
                candidate = BasicOpen.normalized(positive, combo)
                if candidate not in seen:
                    seen.add(candidate)
                    found.append(candidate)
    return found


def basic_opens_containing(x: Character, truncation: int, budget: int,
                           within: Optional[Element] = None) -> List[BasicOpen]:
    """Basic neighbourhoods of x, optionally inside carrier(within)"""
    carrier = x.carrier
    positives = (e for e in carrier.iter_idempotents(truncation) if x.evaluate(e))
    if x.is_principal:
        positives = itertools.chain([x.generator], positives)
    if within is not None:
        positives = (carrier.compose(e, within) for e in positives)
    pool = (f for f in carrier.iter_idempotents(truncation) if not x.evaluate(f))
    opens = basic_opens(carrier, truncation, budget, positives, pool)
    return [u for u in opens if u.contains(x)]


def principal_members(u: BasicOpen, truncation: int) -> Iterator[Character]:
    """Principal characters inside u; every one of them is generated by some positive.f"""
    if u.empty:
        return
    carrier = u.positive.carrier
    seen = set()
    for f in itertools.chain([u.positive], carrier.iter_idempotents(PROBE_FACTOR * truncation)):
        h = carrier.compose(u.positive, f)
        if h in seen:
            continue
        seen.add(h)
        y = principal(h)
        if is_admissible(y) and u.contains(y):
            yield y


def density_check(carrier: InverseSemigroup, truncation: int, basis_budget: int) -> Dict:
    """Every inhabited basic open within budget must contain a principal character"""
    limits = limit_characters(carrier, truncation)
    checked = skipped = 0
    violations = []
    for u in basic_opens(carrier, truncation, basis_budget):
        if u.empty:
            skipped += 1
            continue
        if next(principal_members(u, truncation), None) is not None:
            checked += 1
            continue
        if u.members(limits):
            checked += 1
            violations.append(u.to_json())
        else:
            # nothing inhabits u at this horizon
            skipped += 1
    if violations:
        logger.warning(f"Density violated on {len(violations)} basic opens of {carrier.label}")
    return {
        'carrier': carrier.label,
        'truncation': truncation,
        'basis_budget': basis_budget,
        'checked': checked,
        'skipped_empty': skipped,
        'violations': violations,
        'passed': not violations,
    }


@dataclass(frozen=True)
class EpsilonFunction:
    """Finite formal sum of one-point functions epsilon_e with rational coefficients"""
    terms: Tuple[Tuple[Element, sympy.Expr], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[Element, object]) -> 'EpsilonFunction':
        cleaned = [(e, sympy.nsimplify(c)) for e, c in mapping.items() if sympy.nsimplify(c) != 0]
        return cls(tuple(sorted(cleaned, key=lambda item: item[0].sort_key)))

    @classmethod
    def basis(cls, e: Element) -> 'EpsilonFunction':
        return cls.of({e: 1})

    def as_dict(self) -> Dict[Element, sympy.Expr]:
        return dict(self.terms)

    def __add__(self, other: 'EpsilonFunction') -> 'EpsilonFunction':
        total = self.as_dict()
        for e, c in other.terms:
            total[e] = total.get(e, 0) + c
        return EpsilonFunction.of(total)

    def scale(self, c) -> 'EpsilonFunction':
        return EpsilonFunction.of({e: c * v for e, v in self.terms})

    def is_zero(self) -> bool:
        return not self.terms

    def evaluate(self, x: Character) -> sympy.Expr:
        # supported on principal characters only
        if not x.is_principal:
            return sympy.Integer(0)
        return self.as_dict().get(x.generator, sympy.Integer(0))

    def to_json(self) -> Dict:
        return {'terms': [{'coef': str(c), 'e': e.name} for e, c in self.terms]}


def epsilon_action(g: Element, e: Element) -> EpsilonFunction:
    """g(eps_e) = eps_{g e g*} if e <= g*g, else 0"""
    carrier = g.carrier
    if carrier.natural_leq(e, carrier.compose(carrier.star(g), g)):
        return EpsilonFunction.basis(act_indicator(g, e))
    return EpsilonFunction()


def discretized_collapse_report(carrier: PolycyclicMonoid, truncation: int) -> Dict:
    """
    Every eps_e dies under the partition of unity by words one letter longer
    than e's word, so the discretized coefficient algebra is zero.
    """
    if not isinstance(carrier, PolycyclicMonoid):
        raise UsageError(f"Collapse report needs a polycyclic carrier, got {carrier.label}")
    rows = []
    for e in carrier.idempotents(truncation):
        if e == carrier.zero():
            continue
        length = len(e.code[0]) + 1
        projections = [carrier.element((w, w)) for w in carrier.words(length) if len(w) == length]
        killed = all(epsilon_action(p, e).is_zero() for p in projections)
        rows.append({'e': e.name, 'partition_length': length, 'annihilated': killed})
    collapsed = all(row['annihilated'] for row in rows)
    if not collapsed:
        logger.warning(f"Discretized collapse failed for {carrier.label}")
    return {'carrier': carrier.label, 'truncation': truncation, 'rows': rows, 'collapsed': collapsed}
