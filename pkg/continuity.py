import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from semigroup_core import Element, InverseSemigroup, LowerSetShape, canonical
from spectrum import (
    Character,
    act_character,
    basic_opens_containing,
    limit_characters,
    principal,
    principal_members,
    is_admissible,
)

logger = logging.getLogger(__name__)

CONTINUOUS = 'continuous'
DISCONTINUOUS = 'discontinuous'
UNKNOWN = 'unknown'

DEFAULT_BASIS_BUDGET = 50
STABILIZATION_LEVELS = 3


@dataclass(frozen=True)
class ContinuityVerdict:
    """Continuous(certificate) | Discontinuous(witness) | Unknown(bound, stabilized maxima if any)"""
    status: str
    certificate: Tuple[Element, ...] = ()
    witness: Optional[Character] = None
    bound: Optional[int] = None
    stabilized: Tuple[Element, ...] = ()

    @classmethod
    def continuous(cls, certificate: Sequence[Element]) -> 'ContinuityVerdict':
        return cls(CONTINUOUS, tuple(canonical(certificate)))

    @classmethod
    def discontinuous(cls, witness: Character) -> 'ContinuityVerdict':
        return cls(DISCONTINUOUS, witness=witness)

    @classmethod
    def unknown(cls, bound: int, stabilized: Sequence[Element] = ()) -> 'ContinuityVerdict':
        return cls(UNKNOWN, bound=bound, stabilized=tuple(stabilized))

    @property
    def is_continuous(self) -> bool:
        return self.status == CONTINUOUS

    def to_json(self) -> Dict:
        data = {'verdict': self.status}
        if self.status == CONTINUOUS:
            data['certificate'] = [e.name for e in self.certificate]
        elif self.status == DISCONTINUOUS:
            data['witness'] = self.witness.to_json()
        else:
            data['bound'] = self.bound
            if self.stabilized:
                data['stabilized_maxima'] = [e.name for e in self.stabilized]
        return data


def _in_lower_set(bound: Element, e: Element) -> bool:
    return bound.carrier.compose(bound, e) == e


@dataclass(frozen=True)
class SpectrumFunction:
    """
    The join of the indicators of the idempotents below `bound`, optionally
    translated by the G-action: g(f)(x) = 1_{x.g != 0} f(x.g).

    `translate` lists the acting elements in the order they are applied to x.
    """
    bound: Element
    join_set: Tuple[Element, ...]
    shape: Optional[LowerSetShape]
    attainment: ContinuityVerdict
    translate: Tuple[Element, ...] = field(default=())

    @property
    def carrier(self) -> InverseSemigroup:
        return self.bound.carrier

    def _base_value(self, x: Character) -> int:
        # a downward closed set meets the filter of Principal(f) iff it contains f
        if x.is_principal:
            return int(_in_lower_set(self.bound, x.generator))
        if self.shape is not None and self.shape.bounded:
            return int(any(x.evaluate(m) for m in self.shape.maxima))
        return int(any(x.evaluate(e) for e in self.join_set))

    def evaluate(self, x: Character) -> int:
        y = x
        for g in self.translate:
            y = act_character(y, g)
            if y is None:
                return 0
        return self._base_value(y)

    def __call__(self, x: Character) -> int:
        return self.evaluate(x)

    def to_json(self) -> Dict:
        return {
            'bound': self.bound.name,
            'join_set': [e.name for e in self.join_set],
            'maxima': None if self.shape is None or not self.shape.bounded
            else [m.name for m in self.shape.maxima],
            'translate': [g.name for g in self.translate],
            'attainment': self.attainment.to_json(),
        }


def lower_idempotents(g: Element, truncation: int) -> List[Element]:
    """All idempotents e at truncation with e = g e"""
    return [e for e in g.carrier.idempotents(truncation) if _in_lower_set(g, e)]


def _maxima(carrier: InverseSemigroup, elements: Sequence[Element]) -> List[Element]:
    return [e for e in elements
            if not any(f != e and carrier.natural_leq(e, f) for f in elements)]


def discontinuity_witness(g: Element, truncation: int,
                          basis_budget: int = DEFAULT_BASIS_BUDGET) -> Optional[Character]:
    """
    A character killing every idempotent below g that still lies in the closure
    of their carriers, searched among limit characters and then principal ones.
    """
    carrier = g.carrier
    lower = lower_idempotents(g, truncation)
    candidates = limit_characters(carrier, truncation) + [
        principal(e) for e in carrier.idempotents(truncation)]
    for x in candidates:
        if not is_admissible(x) or any(x.evaluate(e) for e in lower):
            continue
        if _is_closure_point(x, g, truncation, basis_budget):
            logger.debug(f"Witness {x!r} for {g.name} on {carrier.label}")
            return x
    return None


def _is_closure_point(x: Character, g: Element, truncation: int, basis_budget: int) -> bool:
    opens = basic_opens_containing(x, truncation, basis_budget)
    if not opens:
        return False
    for u in opens:
        if not any(_in_lower_set(g, y.generator) for y in principal_members(u, truncation)):
            return False
    return True


def _stable_maxima(g: Element, truncation: int) -> Optional[List[Element]]:
    """Maxima of the truncated lower set, when unchanged over the last few levels"""
    carrier = g.carrier
    history = []
    for level in range(max(1, truncation - STABILIZATION_LEVELS + 1), truncation + 1):
        history.append(tuple(_maxima(carrier, lower_idempotents(g, level))))
    if len(history) == STABILIZATION_LEVELS and len(set(history)) == 1:
        return list(history[-1])
    return None


def e_continuity_verdict(g: Element, truncation: int,
                         basis_budget: int = DEFAULT_BASIS_BUDGET) -> ContinuityVerdict:
    carrier = g.carrier
    shape = carrier.lower_set_shape(g)
    if shape is not None and shape.bounded:
        verdict = ContinuityVerdict.continuous(shape.maxima)
    else:
        witness = discontinuity_witness(g, truncation, basis_budget)
        if witness is not None:
            verdict = ContinuityVerdict.discontinuous(witness)
        else:
            # without an oracle a stabilized maximum set is evidence, not a certificate
            stabilized = _stable_maxima(g, truncation) if shape is None else None
            verdict = ContinuityVerdict.unknown(truncation, stabilized or ())

    if verdict.status == DISCONTINUOUS:
        logger.warning(f"{carrier.label}: sup over the lower set of {g.name} is discontinuous at {verdict.witness!r}")
    elif verdict.status == UNKNOWN:
        logger.warning(f"{carrier.label}: continuity at {g.name} undecided at truncation {truncation}")
    return verdict


def sup_indicator(g: Element, truncation: int,
                  basis_budget: int = DEFAULT_BASIS_BUDGET) -> SpectrumFunction:
    """F_g as a SpectrumFunction with its attainment status"""
    return SpectrumFunction(
        bound=g,
        join_set=tuple(lower_idempotents(g, truncation)),
        shape=g.carrier.lower_set_shape(g),
        attainment=e_continuity_verdict(g, truncation, basis_budget),
    )


def act_function(g: Element, f: SpectrumFunction) -> SpectrumFunction:
    """g(f)(x) = 1_{x.g != 0} f(x.g); on indicators this is g(1_e) = 1_{geg*}"""
    return SpectrumFunction(f.bound, f.join_set, f.shape, f.attainment, (g,) + f.translate)


@dataclass(frozen=True)
class SemigroupVerdict:
    carrier: InverseSemigroup
    truncation: int
    verdicts: Tuple[Tuple[Element, ContinuityVerdict], ...]

    @property
    def status(self) -> str:
        statuses = {v.status for _, v in self.verdicts}
        if DISCONTINUOUS in statuses:
            return DISCONTINUOUS
        if UNKNOWN in statuses:
            return UNKNOWN
        return CONTINUOUS

    def first(self, status: str) -> Optional[Tuple[Element, ContinuityVerdict]]:
        return next(((g, v) for g, v in self.verdicts if v.status == status), None)

    def to_json(self) -> Dict:
        data = {
            'carrier': self.carrier.label,
            'truncation': self.truncation,
            'global': self.status,
            'elements': [dict(element=g.name, **v.to_json()) for g, v in self.verdicts],
        }
        hit = self.first(DISCONTINUOUS)
        if hit is not None:
            data['discontinuous_at'] = hit[0].name
        return data


def semigroup_verdict(carrier: InverseSemigroup, truncation: int,
                      basis_budget: int = DEFAULT_BASIS_BUDGET) -> SemigroupVerdict:
    """Per-element verdicts folded in canonical order; Discontinuous beats Unknown"""
    verdicts = []
    for g in carrier.elements(truncation):
        verdict = e_continuity_verdict(g, truncation, basis_budget)
        logger.debug(f"{g.name}: {verdict.status}")
        verdicts.append((g, verdict))
    result = SemigroupVerdict(carrier, truncation, tuple(verdicts))
    logger.info(f"{carrier.label} at truncation {truncation}: globally {result.status}")
    return result
