import itertools
import logging
import random
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import sympy

from continuity import (
    CONTINUOUS,
    DISCONTINUOUS,
    DEFAULT_BASIS_BUDGET,
    SpectrumFunction,
    act_function,
    e_continuity_verdict,
    lower_idempotents,
)
from errors import DegenerateModuleError, InconclusiveError, UsageError
from semigroup_core import ChainFamily, Element, InverseSemigroup
from spectrum import (
    Character,
    EpsilonFunction,
    basic_opens_containing,
    characters,
    principal,
    principal_members,
)

logger = logging.getLogger(__name__)

MINOR_LIMIT = 8


def _coefficient(c) -> sympy.Expr:
    return sympy.nsimplify(c)


@dataclass(frozen=True)
class _FormalSum:
    """Sorted (Element, coefficient) terms with zero coefficients dropped"""
    terms: Tuple[Tuple[Element, sympy.Expr], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[Element, object]):
        total: Dict[Element, sympy.Expr] = {}
        for g, c in mapping.items():
            total[g] = total.get(g, 0) + _coefficient(c)
        kept = [(g, sympy.expand(c)) for g, c in total.items() if sympy.expand(c) != 0]
        return cls(tuple(sorted(kept, key=lambda item: item[0].sort_key)))

    @classmethod
    def basis(cls, g: Element):
        return cls.of({g: 1})

    @classmethod
    def combination(cls, elements: Sequence[Element], coefficients: Sequence):
        if len(elements) != len(coefficients):
            raise UsageError(f"{len(elements)} elements but {len(coefficients)} coefficients")
        total: Dict[Element, sympy.Expr] = {}
        for g, c in zip(elements, coefficients):
            total[g] = total.get(g, 0) + _coefficient(c)
        return cls.of(total)

    def as_dict(self) -> Dict[Element, sympy.Expr]:
        return dict(self.terms)

    def __add__(self, other):
        total = self.as_dict()
        for g, c in other.terms:
            total[g] = total.get(g, 0) + c
        return type(self).of(total)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return type(self).of({g: _coefficient(c) * v for g, v in self.terms})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def elements(self) -> List[Element]:
        return [g for g, _ in self.terms]

    @property
    def coefficients(self) -> List[sympy.Expr]:
        return [c for _, c in self.terms]

    def _mapped(self, image):
        total: Dict[Element, sympy.Expr] = {}
        for g, c in self.terms:
            target = image(g)
            if target is not None:
                total[target] = total.get(target, 0) + c
        return type(self).of(total)

    def to_json(self) -> Dict:
        return {'terms': [{'coef': str(c), 'g': g.name} for g, c in self.terms]}


class ModuleVector(_FormalSum):
    """sum c_i phi_{g_i}"""

    def act(self, g: Element) -> 'ModuleVector':
        """g(phi_h) = phi_{gh}"""
        return self._mapped(lambda h: g.carrier.compose(g, h))

    def right_act(self, e: Element) -> 'ModuleVector':
        """xi e = e(xi), so phi_g e = phi_{eg}"""
        if not e.is_idempotent():
            raise UsageError(f"Module action needs an idempotent, got {e.name}")
        return self.act(e)


class EpsilonModuleVector(_FormalSum):
    """sum c_i delta_{g_i}"""

    def act(self, h: Element) -> 'EpsilonModuleVector':
        """h(delta_g) = delta_{hg} if h*h >= gg*, else 0"""
        carrier = h.carrier
        source = carrier.compose(carrier.star(h), h)

        def image(g: Element) -> Optional[Element]:
            if carrier.natural_leq(carrier.compose(g, carrier.star(g)), source):
                return carrier.compose(h, g)
            return None
        return self._mapped(image)


# --- compatible module -------------------------------------------------------

def phi_inner(g: Element, h: Element, truncation: int,
              basis_budget: int = DEFAULT_BASIS_BUDGET) -> SpectrumFunction:
    """
    <phi_g, phi_h> = sup{e : eg = eh, e <= gg* hh*}. That set is exactly the
    lower idempotent set of h g*, so attainment is the continuity verdict there.
    """
    carrier = g.carrier
    bound = carrier.compose(h, carrier.star(g))
    attainment = e_continuity_verdict(bound, truncation, basis_budget)
    if attainment.status != CONTINUOUS:
        logger.warning(f"<phi_{g.name}, phi_{h.name}> is {attainment.status}; returning the truncated join")
    return SpectrumFunction(
        bound=bound,
        join_set=tuple(lower_idempotents(bound, truncation)),
        shape=carrier.lower_set_shape(bound),
        attainment=attainment,
    )


def explicit_join_set(g: Element, h: Element, truncation: int) -> List[Element]:
    """{e : eg = eh, e <= gg* hh*} by direct search"""
    carrier = g.carrier
    top = carrier.compose(carrier.compose(g, carrier.star(g)), carrier.compose(h, carrier.star(h)))
    return [e for e in carrier.idempotents(truncation)
            if carrier.compose(e, g) == carrier.compose(e, h) and carrier.natural_leq(e, top)]


class InnerProductTable:
    """phi_inner over a fixed element list, each entry computed once"""

    def __init__(self, elements: Sequence[Element], truncation: int,
                 basis_budget: int = DEFAULT_BASIS_BUDGET):
        self.elements = list(elements)
        self.truncation = truncation
        self._cache: Dict[Tuple[int, int], SpectrumFunction] = {}
        for i, j in itertools.combinations_with_replacement(range(len(self.elements)), 2):
            entry = phi_inner(self.elements[i], self.elements[j], truncation, basis_budget)
            self._cache[(i, j)] = self._cache[(j, i)] = entry

    def entry(self, i: int, j: int) -> SpectrumFunction:
        return self._cache[(i, j)]

    def at(self, x: Character) -> sympy.Matrix:
        size = len(self.elements)
        return sympy.Matrix(size, size, lambda i, j: self._cache[(i, j)].evaluate(x))

    def attainments(self) -> Dict[str, str]:
        return {
            f"{self.elements[i].name},{self.elements[j].name}": self._cache[(i, j)].attainment.status
            for i, j in itertools.combinations_with_replacement(range(len(self.elements)), 2)
        }


def gram(elements: Sequence[Element], chars: Sequence[Character], truncation: int,
         basis_budget: int = DEFAULT_BASIS_BUDGET) -> List[Tuple[Character, sympy.Matrix]]:
    table = InnerProductTable(elements, truncation, basis_budget)
    return [(x, table.at(x)) for x in chars]


def is_psd(matrix: sympy.Matrix) -> bool:
    """Exact PSD test: all principal minors up to MINOR_LIMIT, else characteristic polynomial signs"""
    size = matrix.rows
    if size <= MINOR_LIMIT:
        for k in range(1, size + 1):
            for rows in itertools.combinations(range(size), k):
                if matrix.extract(list(rows), list(rows)).det() < 0:
                    return False
        return True
    coeffs = matrix.charpoly().all_coeffs()
    return all((-1) ** i * c >= 0 for i, c in enumerate(coeffs))


def gram_psd_check(elements: Sequence[Element], chars: Sequence[Character], truncation: int,
                   basis_budget: int = DEFAULT_BASIS_BUDGET) -> Dict:
    violations = []
    for x, matrix in gram(elements, chars, truncation, basis_budget):
        if not is_psd(matrix):
            violations.append({'character': x.to_json(), 'matrix': [[str(v) for v in row] for row in matrix.tolist()]})
    if violations:
        logger.warning(f"Gram matrix not PSD at {len(violations)} characters")
    return {
        'elements': [g.name for g in elements],
        'characters_checked': len(chars),
        'violations': violations,
        'passed': not violations,
    }


def equivariance_check(g: Element, a: Element, b: Element, chars: Sequence[Character],
                       truncation: int, basis_budget: int = DEFAULT_BASIS_BUDGET) -> Dict:
    """<phi_ga, phi_gb>(x) against g(<phi_a, phi_b>)(x) = 1_{x.g != 0} <phi_a, phi_b>(x.g)"""
    carrier = g.carrier
    lhs = phi_inner(carrier.compose(g, a), carrier.compose(g, b), truncation, basis_budget)
    rhs = act_function(g, phi_inner(a, b, truncation, basis_budget))
    mismatches = [x.to_json() for x in chars if lhs.evaluate(x) != rhs.evaluate(x)]
    return {
        'g': g.name, 'a': a.name, 'b': b.name,
        'characters_checked': len(chars),
        'mismatches': mismatches,
        'passed': not mismatches,
    }


def quadratic_form(coefficients: Sequence[sympy.Expr], matrix: sympy.Matrix) -> sympy.Expr:
    c = sympy.Matrix(list(coefficients))
    return sympy.expand((c.H * matrix * c)[0, 0])


def norm_estimate(v: ModuleVector, truncation: int,
                  basis_budget: int = DEFAULT_BASIS_BUDGET) -> sympy.Expr:
    """sup over characters of c* Gram(x) c; exact when every Gram entry is continuous"""
    if v.is_zero():
        return sympy.Integer(0)
    table = InnerProductTable(v.elements, truncation, basis_budget)
    statuses = table.attainments()
    bad = {pair: status for pair, status in statuses.items() if status != CONTINUOUS}
    if any(status == DISCONTINUOUS for status in bad.values()):
        logger.warning(f"Refusing norm estimate: discontinuous entries {sorted(bad)}")
        raise DegenerateModuleError(
            f"Inner products {sorted(bad)} are discontinuous; see the degeneration command")
    if bad:
        raise InconclusiveError(f"Attainment of {sorted(bad)} is unknown at truncation {truncation}")
    carrier = v.elements[0].carrier
    values = [quadratic_form(v.coefficients, table.at(x)) for x in characters(carrier, truncation)]
    return max(values + [sympy.Integer(0)])


def random_trials(count: int, size: int, seed: int, span: int = 5) -> List[List[sympy.Expr]]:
    """Seeded nonzero rational-complex coefficient vectors"""
    if size < 1:
        raise UsageError(f"Trial vectors need a positive size, got {size}")
    rng = random.Random(seed)
    trials = []
    while len(trials) < count:
        vector = [sympy.Rational(rng.randint(-span, span), rng.randint(1, span))
                  + sympy.I * sympy.Rational(rng.randint(-span, span), rng.randint(1, span))
                  for _ in range(size)]
        if any(c != 0 for c in vector):
            trials.append(vector)
    return trials


def linear_independence_probe(elements: Sequence[Element], coefficient_trials: Iterable[Sequence],
                              chars: Sequence[Character], truncation: int,
                              basis_budget: int = DEFAULT_BASIS_BUDGET) -> Dict:
    """Each nonzero trial must give a nonzero quadratic form somewhere; never claims dependence"""
    if len(set(elements)) != len(elements):
        raise UsageError("Independence probe needs distinct elements")
    table = InnerProductTable(elements, truncation, basis_budget)
    matrices = [(x, table.at(x)) for x in chars]
    rows = []
    for trial in coefficient_trials:
        coefficients = [_coefficient(c) for c in trial]
        if all(c == 0 for c in coefficients):
            raise UsageError("Trial coefficient vector is zero")
        hit = next((x for x, m in matrices if quadratic_form(coefficients, m) != 0), None)
        rows.append({
            'coefficients': [str(c) for c in coefficients],
            'result': 'PASS' if hit is not None else 'INCONCLUSIVE',
            'character': hit.to_json() if hit is not None else None,
        })
    return {
        'elements': [g.name for g in elements],
        'trials': rows,
        'passed': sum(row['result'] == 'PASS' for row in rows),
        'inconclusive': sum(row['result'] == 'INCONCLUSIVE' for row in rows),
    }


# --- discretized module ------------------------------------------------------

def epsilon_inner(g: Element, h: Element) -> EpsilonFunction:
    """<delta_g, delta_h> = 1_{g=h} eps_{g*g}"""
    if g != h:
        return EpsilonFunction()
    return EpsilonFunction.basis(g.carrier.compose(g.carrier.star(g), g))


def epsilon_module_product(g: Element, f: Element) -> EpsilonModuleVector:
    """delta_g eps_f = 1_{g*g=f} delta_g"""
    if not f.is_idempotent():
        raise UsageError(f"{f.name} is not idempotent")
    if g.carrier.compose(g.carrier.star(g), g) == f:
        return EpsilonModuleVector.basis(g)
    return EpsilonModuleVector()


def _step(name: str, statement: str, verified: bool, **detail) -> Dict:
    if not verified:
        logger.error(f"Degeneration step {name!r} failed")
    return dict(step=name, statement=statement, verified=verified, **detail)


def degeneration_report(carrier: InverseSemigroup, truncation: int,
                        basis_budget: int = DEFAULT_BASIS_BUDGET) -> Dict:
    """
    Machine-checked trace of why any continuous inner product on the chain with
    a symmetry forces ||delta_1 - delta_S|| = 0.
    """
    if not isinstance(carrier, ChainFamily) or not carrier.with_symmetry:
        raise UsageError(f"Degeneration report needs chain_with_symmetry, got {carrier.label}")
    one, s = carrier.parse('1'), carrier.parse('S')
    chain = [carrier.element(n) for n in range(1, truncation + 1)]
    limit_point = principal(one)
    steps = []

    steps.append(_step(
        'compatibility',
        'delta_S . e_n = delta_{e_n} for every n',
        all(ModuleVector.basis(s).right_act(e) == ModuleVector.basis(e) for e in chain),
        checked=len(chain),
    ))
    steps.append(_step(
        'epsilon_instances',
        '<delta_p,delta_p> = eps_p, <delta_S,delta_S> = eps_1, <delta_S,delta_1> = 0, '
        'delta_S eps_1 = delta_S, delta_S eps_{e_n} = 0',
        all(epsilon_inner(e, e) == EpsilonFunction.basis(e) for e in chain)
        and epsilon_inner(s, s) == EpsilonFunction.basis(one)
        and epsilon_inner(s, one).is_zero()
        and epsilon_module_product(s, one) == EpsilonModuleVector.basis(s)
        and all(epsilon_module_product(s, e).is_zero() for e in chain),
        rule='inferred from instances: <delta_g,delta_h> = 1_{g=h} eps_{g*g}, delta_g eps_f = 1_{g*g=f} delta_g',
    ))

    principal_points = [principal(e) for e in chain]
    pairs = {'S,S': (s, s), 'S,1': (s, one), '1,1': (one, one)}
    inner = {key: phi_inner(a, b, truncation, basis_budget) for key, (a, b) in pairs.items()}
    on_chain = {key: all(f.evaluate(x) == 1 for x in principal_points) for key, f in inner.items()}
    steps.append(_step(
        'restriction_to_carriers',
        '<delta_S,delta_S> e_n = <delta_{e_n},delta_{e_n}> = e_n, so every entry is 1 on each carrier(e_n)',
        all(on_chain.values()) and all(phi_inner(e, e, truncation, basis_budget).evaluate(principal(e)) == 1 for e in chain),
        entries=on_chain,
    ))

    opens = basic_opens_containing(limit_point, truncation, basis_budget)
    approached = all(any(y != limit_point for y in principal_members(u, truncation)) for u in opens)
    steps.append(_step(
        'limit_point',
        'Principal(1) lies in the closure of {Principal(e_n)}, so continuity forces value 1 there',
        approached and limit_point not in principal_points,
        neighbourhoods_checked=len(opens),
        compatible_value_at_limit={key: f.evaluate(limit_point) for key, f in inner.items()},
        attainment={key: f.attainment.status for key, f in inner.items()},
    ))

    # continuity forces each entry at the limit to the common value of the approaching points
    approaching = [y for u in opens for y in principal_members(u, truncation) if y != limit_point]
    forced_at_limit = {}
    for key, f in inner.items():
        values = {f.evaluate(y) for y in approaching}
        forced_at_limit[key] = values.pop() if len(values) == 1 else None

    def gram_of(value) -> sympy.Matrix:
        return sympy.Matrix([[value('1,1'), value('S,1')], [value('S,1'), value('S,S')]])

    grams = [(x, gram_of(lambda key, x=x: inner[key].evaluate(x))) for x in principal_points]
    forced = None
    if None not in forced_at_limit.values():
        forced = gram_of(forced_at_limit.get)
        grams.append((limit_point, forced))
    forms = [quadratic_form([1, -1], m) for _, m in grams]
    norm = max(forms) if forms else sympy.Integer(0)
    steps.append(_step(
        'forced_gram',
        'the Gram of (delta_1, delta_S) on each carrier(e_n), with its forced limit at Principal(1), '
        'gives ||delta_1 - delta_S||^2 = 0 at every character',
        forced is not None and all(v == 0 for v in forms),
        forced_value_at_limit=dict(forced_at_limit),
        gram=None if forced is None else [[str(v) for v in row] for row in forced.tolist()],
        characters=len(grams),
    ))

    degenerate = all(step['verified'] for step in steps)
    if degenerate:
        logger.warning("chain_with_symmetry: the compatible module degenerates")
    return {
        'carrier': carrier.label,
        'truncation': truncation,
        'steps': steps,
        'norm_squared': str(norm),
        'conclusion': 'module degenerates' if degenerate else 'trace incomplete',
    }
