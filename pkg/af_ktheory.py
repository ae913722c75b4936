"""
Bratteli data for the two AF filtrations of the chain with a symmetry.

A: A_n inside the rational semigroup algebra, generated by 1, S, e_1..e_n.
B: B_n inside the discretized crossed product, spanned by eps_e x g.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Hashable, List, Tuple

import sympy

from errors import UsageError
from semigroup_core import ChainFamily

logger = logging.getLogger(__name__)

VARIANTS = ('A', 'B')

_CHAIN = ChainFamily(with_symmetry=True)
ONE, S = ChainFamily.ONE, ChainFamily.SYMMETRY


@dataclass(frozen=True)
class AlgebraElement:
    """Finite Fraction-linear combination of basis keys, multiplied by `product`"""
    terms: Tuple[Tuple[Hashable, Fraction], ...]
    product: Callable = field(default=None, compare=False)

    @classmethod
    def of(cls, mapping: Dict[Hashable, Fraction], product: Callable) -> 'AlgebraElement':
        kept = sorted(((k, Fraction(v)) for k, v in mapping.items() if v != 0), key=lambda kv: repr(kv[0]))
        return cls(tuple(kept), product)

    def as_dict(self) -> Dict[Hashable, Fraction]:
        return dict(self.terms)

    def __add__(self, other: 'AlgebraElement') -> 'AlgebraElement':
        total = self.as_dict()
        for k, v in other.terms:
            total[k] = total.get(k, 0) + v
        return AlgebraElement.of(total, self.product)

    def __sub__(self, other: 'AlgebraElement') -> 'AlgebraElement':
        return self + other.scale(-1)

    def scale(self, c) -> 'AlgebraElement':
        return AlgebraElement.of({k: Fraction(c) * v for k, v in self.terms}, self.product)

    def __mul__(self, other: 'AlgebraElement') -> 'AlgebraElement':
        total: Dict[Hashable, Fraction] = {}
        for a, x in self.terms:
            for b, y in other.terms:
                key = self.product(a, b)
                if key is not None:
                    total[key] = total.get(key, 0) + x * y
        return AlgebraElement.of(total, self.product)

    def is_zero(self) -> bool:
        return not self.terms


# --- A: rational semigroup algebra of the chain with a symmetry ----------------

def _chain_product(a, b):
    return _CHAIN.compose(_CHAIN.element(a), _CHAIN.element(b)).code


def group_element(code) -> AlgebraElement:
    return AlgebraElement.of({code: 1}, _chain_product)


def _a_stage(n: int) -> List[Tuple[str, AlgebraElement]]:
    one, s = group_element(ONE), group_element(S)
    half = Fraction(1, 2)
    projections = [('(1-S)/2', (one - s).scale(half))]
    previous = None
    for k in range(1, n + 1):
        e = group_element(k)
        if previous is None:
            projections.append(('e1', e))
        else:
            projections.append((f"e{k}-e{k - 1}", e - previous))
        previous = e
    top = (one + s).scale(half)
    if previous is None:
        projections.append(('(1+S)/2', top))
    else:
        projections.append((f"(1+S)/2-e{n}", top - previous))
    return projections


# --- B: eps_e x g with (eps_e x g)(eps_f x h) = [f <= g*g][e = g f g*] eps_e x gh -----

def _crossed_product(a, b):
    (e, g), (f, h) = a, b
    chain = _CHAIN
    e_, g_, f_, h_ = (chain.element(c) for c in (e, g, f, h))
    if not chain.natural_leq(f_, chain.compose(chain.star(g_), g_)):
        return None
    if chain.compose(chain.compose(g_, f_), chain.star(g_)) != e_:
        return None
    return (e, chain.compose(g_, h_).code)


def crossed_element(e, g) -> AlgebraElement:
    return AlgebraElement.of({(e, g): 1}, _crossed_product)


def _b_stage(n: int) -> List[Tuple[str, AlgebraElement]]:
    half = Fraction(1, 2)
    unit_one, unit_s = crossed_element(ONE, ONE), crossed_element(ONE, S)
    projections = [
        ('eps_1 x (1-S)/2', (unit_one - unit_s).scale(half)),
        ('eps_1 x (1+S)/2', (unit_one + unit_s).scale(half)),
    ]
    for k in range(1, n + 1):
        projections.append((f"eps_e{k} x e{k}", crossed_element(k, k)))
    return projections


_STAGES = {'A': _a_stage, 'B': _b_stage}


def _check_variant(variant: str):
    if variant not in VARIANTS:
        raise UsageError(f"Variant must be one of {VARIANTS}, got {variant!r}")


@dataclass(frozen=True)
class BratteliStage:
    variant: str
    level: int
    minimal_projections: Tuple[Tuple[str, AlgebraElement], ...]
    orthogonal: bool
    unit_sum: bool

    @property
    def rank(self) -> int:
        return len(self.minimal_projections)

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.minimal_projections]

    def to_json(self) -> Dict:
        return {
            'level': self.level,
            'rank': self.rank,
            'projections': self.names,
            'orthogonal': self.orthogonal,
            'unit_sum': self.unit_sum,
        }


def _verify(projections: List[Tuple[str, AlgebraElement]]) -> Tuple[bool, bool]:
    elements = [p for _, p in projections]
    orthogonal = all(
        (p * q == p) if i == j else (p * q).is_zero()
        for i, p in enumerate(elements) for j, q in enumerate(elements)
    )
    unit = elements[0]
    for p in elements[1:]:
        unit = unit + p
    # the sum is the stage unit: idempotent and neutral on every summand
    unit_sum = unit * unit == unit and all(unit * p == p and p * unit == p for p in elements)
    return orthogonal, unit_sum


def stage(variant: str, n: int) -> BratteliStage:
    _check_variant(variant)
    if n < 0:
        raise UsageError(f"Level must be nonnegative, got {n}")
    projections = _STAGES[variant](n)
    orthogonal, unit_sum = _verify(projections)
    if not (orthogonal and unit_sum):
        logger.error(f"Stage {variant}{n} failed verification")
    return BratteliStage(variant, n, tuple(projections), orthogonal, unit_sum)


@dataclass(frozen=True)
class InclusionMatrix:
    """entries[i][j] = 1 when projection j of the next stage lies under projection i"""
    variant: str
    level: int
    entries: Tuple[Tuple[int, ...], ...]

    @property
    def row_sums(self) -> List[int]:
        return [sum(row) for row in self.entries]

    @property
    def column_sums(self) -> List[int]:
        return [sum(column) for column in zip(*self.entries)]

    @property
    def splitting_rows(self) -> List[int]:
        return [i for i, total in enumerate(self.row_sums) if total > 1]

    def matrix(self) -> sympy.Matrix:
        return sympy.Matrix([list(row) for row in self.entries])

    def to_json(self) -> Dict:
        return {
            'level': self.level,
            'entries': [list(row) for row in self.entries],
            'splitting_rows': self.splitting_rows,
        }


def inclusion(variant: str, n: int) -> InclusionMatrix:
    lower, upper = stage(variant, n), stage(variant, n + 1)
    entries = tuple(
        tuple(int(p * q == q) for _, q in upper.minimal_projections)
        for _, p in lower.minimal_projections
    )
    return InclusionMatrix(variant, n, entries)


def k0_colimit_description(variant: str, levels: int) -> Dict:
    """Stage ranks, inclusion data and the ledger of classes that never split again"""
    _check_variant(variant)
    if levels < 1:
        raise UsageError(f"Levels must be at least 1, got {levels}")
    stages = [stage(variant, n) for n in range(levels + 1)]
    inclusions = [inclusion(variant, n) for n in range(levels)]

    composite = sympy.eye(stages[0].rank)
    for inc in inclusions:
        composite = composite * inc.matrix()
    isolated_row = [int(v) for v in composite.row(0)]

    # one extra inclusion decides the classes born at the last level
    lookahead = inclusions + [inclusion(variant, levels)]
    stable, splitting = [], []
    for st in stages:
        for name in st.names:
            if name in stable or name in splitting:
                continue
            splits = False
            for inc in lookahead[st.level:]:
                names = stages[inc.level].names
                if name not in names:
                    break
                if inc.row_sums[names.index(name)] > 1:
                    splits = True
                    break
            (splitting if splits else stable).append(name)

    report = {
        'variant': variant,
        'levels': levels,
        'stages': [{'level': st.level, 'rank': st.rank} for st in stages],
        'inclusions': [inc.to_json() for inc in inclusions],
        'stable_generators': stable,
        'splitting_classes': splitting,
        'isolated_class': {'name': stages[0].names[0], 'composite_row': isolated_row},
        'verified': all(st.orthogonal and st.unit_sum for st in stages),
    }
    if variant == 'A':
        report['distinguished_class'] = {
            'name': '(1+S)/2-e_n',
            'splits_at_every_level': all(len(inc.splitting_rows) == 1 for inc in inclusions),
            'reading': 'free abelian group on the stable generators plus a distinguished unit-related class',
        }
    else:
        report['distinguished_class'] = None
        report['reading'] = 'free abelian group on the stable generators'
    logger.info(f"K0 report for variant {variant} over {levels} levels built")
    return report
