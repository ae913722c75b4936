"""Inverse semigroup carriers: partial-bijection closures and the built-in families"""

import itertools
import logging
import re
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from errors import ClosureCapExceeded, UsageError

logger = logging.getLogger(__name__)

FAMILIES = ('chain_with_symmetry', 'pure_chain', 'bicyclic', 'polycyclic')

DEFAULT_CLOSURE_CAP = 5000
DEFAULT_LIMIT_DEPTH = 3


@dataclass(frozen=True)
class PartialBijection:
    """Injective partial map on {1..degree}, stored as sorted (source, target) pairs"""
    degree: int
    pairs: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.degree < 1:
            raise UsageError(f"Degree must be positive, got {self.degree}")
        sources = [s for s, _ in self.pairs]
        targets = [t for _, t in self.pairs]
        if len(set(sources)) != len(sources):
            raise UsageError(f"Repeated source point in {self.pairs}")
        if len(set(targets)) != len(targets):
            raise UsageError(f"Repeated target point in {self.pairs}")
        for point in sources + targets:
            if not 1 <= point <= self.degree:
                raise UsageError(f"Point {point} outside 1..{self.degree}")

    @classmethod
    def from_pairs(cls, degree: int, pairs: Iterable[Sequence[int]]) -> 'PartialBijection':
        return cls(degree, tuple(sorted((int(s), int(t)) for s, t in pairs)))

    @classmethod
    def partial_identity(cls, degree: int, points: Iterable[int]) -> 'PartialBijection':
        return cls.from_pairs(degree, [(p, p) for p in points])

    @property
    def rank(self) -> int:
        return len(self.pairs)

    @property
    def domain(self) -> Tuple[int, ...]:
        return tuple(s for s, _ in self.pairs)

    def compose(self, other: 'PartialBijection') -> 'PartialBijection':
        """Relational composition: apply `other` first, then `self`"""
        if other.degree != self.degree:
            raise UsageError(f"Degree mismatch: {self.degree} vs {other.degree}")
        mine = dict(self.pairs)
        return PartialBijection.from_pairs(
            self.degree,
            [(s, mine[t]) for s, t in other.pairs if t in mine]
        )

    def star(self) -> 'PartialBijection':
        return PartialBijection.from_pairs(self.degree, [(t, s) for s, t in self.pairs])

    def sort_key(self) -> Tuple:
        return (self.rank, self.pairs)

    def __str__(self):
        return '[' + ','.join(f"{s}>{t}" for s, t in self.pairs) + ']'


@dataclass(frozen=True)
class Element:
    """An element of an inverse semigroup: a carrier-specific code bound to its carrier"""
    carrier: 'InverseSemigroup' = field(repr=False)
    code: Hashable

    def __mul__(self, other: 'Element') -> 'Element':
        return self.carrier.compose(self, other)

    @property
    def name(self) -> str:
        return self.carrier.format_code(self.code)

    @property
    def sort_key(self) -> Tuple:
        return self.carrier.sort_key(self.code)

    def is_idempotent(self) -> bool:
        return self.carrier.is_idempotent(self)

    def __repr__(self):
        return f"Element({self.name})"


@dataclass(frozen=True)
class LowerSetShape:
    """Exact description of {e in E | e <= g}: a finite set of maxima, or no finite maximum set"""
    bounded: bool
    maxima: Tuple[Element, ...] = ()


def canonical(elements: Iterable[Element]) -> List[Element]:
    """Sort elements in their carrier's canonical order, dropping duplicates"""
    return sorted(set(elements), key=lambda e: e.sort_key)


class InverseSemigroup(ABC):
    """Common interface of finite closures and symbolic families"""

    label: str = 'inverse-semigroup'
    is_finite: bool = False

    def __init__(self, kill_zero: bool = False):
        self.kill_zero = kill_zero

    # --- carrier-specific encoding -------------------------------------

    @abstractmethod
    def _product(self, a: Hashable, b: Hashable) -> Hashable:
        """Product of two codes"""

    @abstractmethod
    def _star(self, a: Hashable) -> Hashable:
        """Generalized inverse of a code"""

    @abstractmethod
    def element_codes(self, truncation: int) -> List[Hashable]:
        """All codes up to the truncation level"""

    @abstractmethod
    def format_code(self, code: Hashable) -> str:
        pass

    @abstractmethod
    def parse_code(self, name: str) -> Hashable:
        pass

    @abstractmethod
    def sort_key(self, code: Hashable) -> Tuple:
        pass

    def idempotent_codes(self, truncation: int) -> List[Hashable]:
        return [c for c in self.element_codes(truncation) if self._product(c, c) == c]

    # --- element level ---------------------------------------------------

    def element(self, code: Hashable) -> Element:
        return Element(self, code)

    def parse(self, name: str) -> Element:
        """Resolve a canonical element name"""
        try:
            return Element(self, self.parse_code(name.strip()))
        except UsageError:
            raise
        except (ValueError, KeyError, IndexError) as e:
            raise UsageError(f"Unknown element name {name!r} for {self.label}: {e}") from e

    def _check(self, *elements: Element):
        for el in elements:
            if el.carrier is not self:
                raise UsageError(f"Element {el.name} belongs to {el.carrier.label}, not {self.label}")

    def compose(self, a: Element, b: Element) -> Element:
        self._check(a, b)
        return Element(self, self._product(a.code, b.code))

    def star(self, a: Element) -> Element:
        self._check(a)
        return Element(self, self._star(a.code))

    def is_idempotent(self, a: Element) -> bool:
        self._check(a)
        return self._product(a.code, a.code) == a.code

    def natural_leq(self, g: Element, h: Element) -> bool:
        """g <= h iff g = h g* g"""
        return self.compose(self.compose(h, self.star(g)), g) == g

    def elements(self, truncation: int) -> List[Element]:
        return [Element(self, c) for c in sorted(self.element_codes(truncation), key=self.sort_key)]

    def idempotents(self, truncation: int) -> List[Element]:
        return [Element(self, c) for c in sorted(self.idempotent_codes(truncation), key=self.sort_key)]

    def iter_idempotents(self, truncation: int) -> Iterator[Element]:
        """Idempotents in canonical order, produced lazily"""
        yield from self.idempotents(truncation)

    def zero(self) -> Optional[Element]:
        """The zero element, when the carrier has one"""
        return None

    def describe(self) -> Dict:
        return {'carrier': self.label, 'finite': self.is_finite, 'kill_zero': self.kill_zero}

    # --- family knowledge consulted by spectrum / continuity -------------

    def boundary_idempotents(self) -> List[Element]:
        """Idempotents whose principal characters are limits of other principal characters"""
        return []

    def limit_codes(self, truncation: int) -> List[str]:
        """Codes of the non-principal filters represented at this truncation"""
        return []

    def limit_contains(self, code: str, e: Element) -> bool:
        raise UsageError(f"{self.label} has no limit character {code!r}")

    def limit_act(self, code: str, g: Element) -> Optional[str]:
        """Code of x.g for the limit character x, or None when x.g is zero"""
        raise UsageError(f"{self.label} has no limit character {code!r}")

    def limit_within_principal(self, code: str, f: Element) -> bool:
        """Whether the limit filter is contained in the principal filter of f"""
        return False

    def limit_agreement_idempotent(self, code: str, elements: Sequence[Element]) -> Optional[Element]:
        """An idempotent of the limit filter deep enough to settle germ agreement of `elements`"""
        return None

    def lower_set_shape(self, g: Element) -> Optional[LowerSetShape]:
        """Exact lower idempotent set of g, or None when the carrier has no oracle"""
        return None


class FiniteInverseSemigroup(InverseSemigroup):
    """Finite inverse semigroup given by total product and star tables over codes 0..N-1"""

    is_finite = True

    def __init__(self, product: Sequence[Sequence[int]], star: Sequence[int],
                 labels: Optional[Sequence[str]] = None,
                 realizations: Optional[Sequence[PartialBijection]] = None,
                 kill_zero: bool = False):
        super().__init__(kill_zero)
        size = len(star)
        if len(product) != size or any(len(row) != size for row in product):
            raise UsageError(f"Product table must be {size}x{size}")
        self.product = [list(row) for row in product]
        self.star_table = list(star)
        self.labels = list(labels) if labels is not None else [f"g{i}" for i in range(size)]
        self.realizations = list(realizations) if realizations is not None else None
        self._by_label = {name: i for i, name in enumerate(self.labels)}
        self.label = f"finite({size})"
        self._lower_cache: Dict[int, LowerSetShape] = {}

    @property
    def size(self) -> int:
        return len(self.star_table)

    def _product(self, a, b):
        return self.product[a][b]

    def _star(self, a):
        return self.star_table[a]

    def element_codes(self, truncation: int = 0) -> List[int]:
        return list(range(self.size))

    def format_code(self, code) -> str:
        return self.labels[code]

    def parse_code(self, name: str) -> int:
        if name in self._by_label:
            return self._by_label[name]
        raise UsageError(f"Unknown element name {name!r} for {self.label}")

    def sort_key(self, code) -> Tuple:
        return (code,)

    def zero(self) -> Optional[Element]:
        for z in range(self.size):
            if all(self.product[z][x] == z and self.product[x][z] == z for x in range(self.size)):
                return Element(self, z)
        return None

    def lower_set_shape(self, g: Element) -> LowerSetShape:
        # E is finite, so the lower set always has a finite set of maxima
        if g.code not in self._lower_cache:
            lower = [e for e in self.idempotents(0) if self.compose(g, e) == e]
            maxima = tuple(e for e in lower
                           if not any(f != e and self.natural_leq(e, f) for f in lower))
            self._lower_cache[g.code] = LowerSetShape(True, maxima)
        return self._lower_cache[g.code]

    def describe(self) -> Dict:
        info = super().describe()
        info['size'] = self.size
        if self.realizations is not None:
            info['elements'] = {self.labels[i]: str(p) for i, p in enumerate(self.realizations)}
        return info


def generate_closure(generators: Sequence[PartialBijection], cap: int = DEFAULT_CLOSURE_CAP,
                     kill_zero: bool = False) -> FiniteInverseSemigroup:
    """Smallest set containing the generators closed under product and star"""
    if not generators:
        raise UsageError("At least one generator is required")
    if cap < 1:
        raise UsageError(f"Cap must be positive, got {cap}")
    degrees = {g.degree for g in generators}
    if len(degrees) != 1:
        raise UsageError(f"Generators must share one degree, got {sorted(degrees)}")

    letters = list(dict.fromkeys(list(generators) + [g.star() for g in generators]))
    seen = set(letters)
    if len(seen) > cap:
        raise ClosureCapExceeded(len(seen), cap)
    queue = deque(letters)
    # every element is a word in the generators and their stars
    while queue:
        current = queue.popleft()
        for letter in letters:
            product = current.compose(letter)
            if product not in seen:
                seen.add(product)
                if len(seen) > cap:
                    raise ClosureCapExceeded(len(seen), cap)
                queue.append(product)

    ordered = sorted(seen, key=PartialBijection.sort_key)
    index = {p: i for i, p in enumerate(ordered)}
    product_table = [[index[a.compose(b)] for b in ordered] for a in ordered]
    star_table = [index[a.star()] for a in ordered]
    logger.info(f"Closure of {len(generators)} generators on {degrees.pop()} points has {len(ordered)} elements")
    return FiniteInverseSemigroup(product_table, star_table, realizations=ordered, kill_zero=kill_zero)


class ChainFamily(InverseSemigroup):
    """
    Idempotent chain e1 < e2 < ... < 1, optionally with a symmetry S:
    S^2 = 1, S* = S, S en = en S = en.
    """

    ONE = 0
    SYMMETRY = -1

    def __init__(self, with_symmetry: bool, kill_zero: bool = False):
        super().__init__(kill_zero)
        self.with_symmetry = with_symmetry
        self.label = 'chain_with_symmetry' if with_symmetry else 'pure_chain'

    def _product(self, a, b):
        if a == self.ONE:
            return b
        if b == self.ONE:
            return a
        if a == self.SYMMETRY and b == self.SYMMETRY:
            return self.ONE
        if a == self.SYMMETRY:
            return b
        if b == self.SYMMETRY:
            return a
        return min(a, b)

    def _star(self, a):
        return a

    def element_codes(self, truncation: int) -> List[int]:
        codes = [self.ONE] + ([self.SYMMETRY] if self.with_symmetry else [])
        return codes + list(range(1, truncation + 1))

    def idempotent_codes(self, truncation: int) -> List[int]:
        return [self.ONE] + list(range(1, truncation + 1))

    def format_code(self, code) -> str:
        if code == self.ONE:
            return '1'
        if code == self.SYMMETRY:
            return 'S'
        return f"e{code}"

    def parse_code(self, name: str) -> int:
        if name == '1':
            return self.ONE
        if name == 'S' and self.with_symmetry:
            return self.SYMMETRY
        match = re.fullmatch(r'e([1-9][0-9]*)', name)
        if not match:
            raise UsageError(f"Unknown element name {name!r} for {self.label}")
        return int(match.group(1))

    def sort_key(self, code) -> Tuple:
        if code == self.ONE:
            return (0, 0)
        if code == self.SYMMETRY:
            return (1, 0)
        return (2, code)

    def boundary_idempotents(self) -> List[Element]:
        # the filter {1} is the limit of the principal filters of e_n
        return [Element(self, self.ONE)]

    def lower_set_shape(self, g: Element) -> LowerSetShape:
        if g.code == self.SYMMETRY:
            # every e_n lies below S and the chain has no largest e_n
            return LowerSetShape(False)
        return LowerSetShape(True, (g,))


class BicyclicMonoid(InverseSemigroup):
    """Pairs (m, n) with (m,n)(k,l) = (m-n+max(n,k), l-k+max(n,k)) and (m,n)* = (n,m)"""

    label = 'bicyclic'
    INFINITY = 'inf'

    def _product(self, a, b):
        (m, n), (k, l) = a, b
        top = max(n, k)
        return (m - n + top, l - k + top)

    def _star(self, a):
        return (a[1], a[0])

    def element_codes(self, truncation: int) -> List[Tuple[int, int]]:
        return list(itertools.product(range(truncation + 1), repeat=2))

    def idempotent_codes(self, truncation: int) -> List[Tuple[int, int]]:
        return [(k, k) for k in range(truncation + 1)]

    def format_code(self, code) -> str:
        return f"({code[0]},{code[1]})"

    def parse_code(self, name: str) -> Tuple[int, int]:
        match = re.fullmatch(r'\(\s*(\d+)\s*,\s*(\d+)\s*\)', name)
        if not match:
            raise UsageError(f"Unknown element name {name!r} for bicyclic")
        return (int(match.group(1)), int(match.group(2)))

    def sort_key(self, code) -> Tuple:
        return code

    def limit_codes(self, truncation: int) -> List[str]:
        return [self.INFINITY]

    def _require_limit(self, code: str):
        if code != self.INFINITY:
            raise UsageError(f"bicyclic has no limit character {code!r}")

    def limit_contains(self, code: str, e: Element) -> bool:
        # x_inf is the union of all principal filters
        self._require_limit(code)
        return self.is_idempotent(e)

    def limit_act(self, code: str, g: Element) -> Optional[str]:
        self._require_limit(code)
        return self.INFINITY

    def limit_agreement_idempotent(self, code: str, elements: Sequence[Element]) -> Element:
        self._require_limit(code)
        depth = max([max(el.code) for el in elements] + [0])
        return Element(self, (depth, depth))

    def lower_set_shape(self, g: Element) -> LowerSetShape:
        m, n = g.code
        return LowerSetShape(True, (g,) if m == n else ())


Word = Tuple[int, ...]


class PolycyclicMonoid(InverseSemigroup):
    """
    Polycyclic monoid on n letters: pairs of words (mu, nu) standing for
    S_mu S_nu*, plus a zero for incompatible products.
    """

    label = 'polycyclic'
    ZERO = '0'

    def __init__(self, n: int, kill_zero: bool = False, limit_depth: int = DEFAULT_LIMIT_DEPTH):
        super().__init__(kill_zero)
        if not 2 <= n <= 9:
            raise UsageError(f"Polycyclic alphabet size must be in 2..9, got {n}")
        self.n = n
        self.limit_depth = limit_depth
        self.label = f"polycyclic({n})"

    def words(self, max_length: int) -> List[Word]:
        letters = range(1, self.n + 1)
        return [w for k in range(max_length + 1) for w in itertools.product(letters, repeat=k)]

    def _product(self, a, b):
        if a == self.ZERO or b == self.ZERO:
            return self.ZERO
        (mu, nu), (alpha, beta) = a, b
        # prefix cancellation of nu* alpha
        if alpha[:len(nu)] == nu:
            return (mu + alpha[len(nu):], beta)
        if nu[:len(alpha)] == alpha:
            return (mu, beta + nu[len(alpha):])
        return self.ZERO

    def _star(self, a):
        if a == self.ZERO:
            return a
        return (a[1], a[0])

    def element_codes(self, truncation: int) -> List:
        words = self.words(truncation)
        return [self.ZERO] + [(mu, nu) for mu in words for nu in words]

    def idempotent_codes(self, truncation: int) -> List:
        return [self.ZERO] + [(w, w) for w in self.words(truncation)]

    def iter_idempotents(self, truncation: int) -> Iterator[Element]:
        yield self.zero()
        for k in range(truncation + 1):
            for w in itertools.product(range(1, self.n + 1), repeat=k):
                yield Element(self, (w, w))

    @staticmethod
    def _word(w: Word) -> str:
        return ''.join(str(letter) for letter in w) or '-'

    def _parse_word(self, text: str) -> Word:
        if text == '-':
            return ()
        if not text.isdigit() or any(not 1 <= int(ch) <= self.n for ch in text):
            raise UsageError(f"Invalid word {text!r} over letters 1..{self.n}")
        return tuple(int(ch) for ch in text)

    def format_code(self, code) -> str:
        if code == self.ZERO:
            return '0'
        return f"{self._word(code[0])}|{self._word(code[1])}"

    def parse_code(self, name: str):
        if name == '0':
            return self.ZERO
        if name.count('|') != 1:
            raise UsageError(f"Unknown element name {name!r} for {self.label}")
        mu, nu = name.split('|')
        return (self._parse_word(mu), self._parse_word(nu))

    def sort_key(self, code) -> Tuple:
        if code == self.ZERO:
            return (0,)
        mu, nu = code
        return (1, len(mu), mu, len(nu), nu)

    def zero(self) -> Element:
        return Element(self, self.ZERO)

    def describe(self) -> Dict:
        info = super().describe()
        info.update({'n': self.n, 'limit_depth': self.limit_depth})
        return info

    # eventually periodic infinite words, coded as "prefix(period)"

    @staticmethod
    def _canonical_limit(prefix: Word, period: Word) -> Tuple[Word, Word]:
        for size in range(1, len(period) + 1):
            if len(period) % size == 0 and period[:size] * (len(period) // size) == period:
                period = period[:size]
                break
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = period[-1:] + period[:-1]
        return prefix, period

    def _limit_code(self, prefix: Word, period: Word) -> str:
        prefix, period = self._canonical_limit(prefix, period)
        return f"{''.join(map(str, prefix))}({''.join(map(str, period))})"

    def _parse_limit(self, code: str) -> Tuple[Word, Word]:
        match = re.fullmatch(r'(\d*)\((\d+)\)', code)
        if not match:
            raise UsageError(f"{self.label} has no limit character {code!r}")
        prefix = self._parse_word(match.group(1)) if match.group(1) else ()
        period = self._parse_word(match.group(2))
        if (prefix, period) != self._canonical_limit(prefix, period):
            raise UsageError(f"Limit code {code!r} is not canonical")
        return prefix, period

    @staticmethod
    def _unroll(prefix: Word, period: Word, length: int) -> Word:
        repeats = max(0, length - len(prefix)) // len(period) + 1
        return (prefix + period * repeats)[:length]

    def limit_codes(self, truncation: int) -> List[str]:
        depth = min(truncation, self.limit_depth)
        codes = set()
        for total in range(1, depth + 1):
            for split in range(total):
                for prefix in itertools.product(range(1, self.n + 1), repeat=split):
                    for period in itertools.product(range(1, self.n + 1), repeat=total - split):
                        codes.add(self._limit_code(prefix, period))
        return sorted(codes, key=lambda c: (len(c), c))

    def limit_contains(self, code: str, e: Element) -> bool:
        prefix, period = self._parse_limit(code)
        if e.code == self.ZERO:
            return False
        word = e.code[0]
        return self._unroll(prefix, period, len(word)) == word

    def limit_act(self, code: str, g: Element) -> Optional[str]:
        prefix, period = self._parse_limit(code)
        if g.code == self.ZERO:
            return None
        mu, nu = g.code
        if self._unroll(prefix, period, len(mu)) != mu:
            return None
        if len(mu) <= len(prefix):
            rest_prefix, rest_period = prefix[len(mu):], period
        else:
            shift = (len(mu) - len(prefix)) % len(period)
            rest_prefix, rest_period = (), period[shift:] + period[:shift]
        return self._limit_code(nu + rest_prefix, rest_period)

    def limit_within_principal(self, code: str, f: Element) -> bool:
        # only the zero filter (all of E) contains an infinite-word filter
        self._parse_limit(code)
        return f.code == self.ZERO

    def limit_agreement_idempotent(self, code: str, elements: Sequence[Element]) -> Element:
        prefix, period = self._parse_limit(code)
        depth = max([max(len(el.code[0]), len(el.code[1])) for el in elements if el.code != self.ZERO] + [0])
        word = self._unroll(prefix, period, depth)
        return Element(self, (word, word))

    def lower_set_shape(self, g: Element) -> LowerSetShape:
        if g.code != self.ZERO and g.code[0] == g.code[1]:
            return LowerSetShape(True, (g,))
        # only the zero lies below a non-idempotent
        return LowerSetShape(True, (self.zero(),))


@dataclass(frozen=True)
class FamilySpec:
    """A built-in family with its parameters and truncation level"""
    family: str
    params: Mapping = field(default_factory=dict)
    truncation: int = 10

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"Unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if self.truncation < 1:
            raise UsageError(f"Truncation must be positive, got {self.truncation}")

    def build(self, kill_zero: bool = False, limit_depth: int = DEFAULT_LIMIT_DEPTH) -> InverseSemigroup:
        if self.family == 'chain_with_symmetry':
            return ChainFamily(True, kill_zero)
        if self.family == 'pure_chain':
            return ChainFamily(False, kill_zero)
        if self.family == 'bicyclic':
            return BicyclicMonoid(kill_zero)
        return PolycyclicMonoid(int(self.params.get('n', 2)), kill_zero, limit_depth)


def compose(a: Element, b: Element) -> Element:
    """The product ab"""
    return a.carrier.compose(a, b)


def star(a: Element) -> Element:
    """The unique generalized inverse a*"""
    return a.carrier.star(a)


def natural_leq(g: Element, h: Element) -> bool:
    return g.carrier.natural_leq(g, h)


def idempotents(carrier: InverseSemigroup, truncation: int) -> List[Element]:
    return carrier.idempotents(truncation)


def symmetric_inverse_monoid(degree: int) -> FiniteInverseSemigroup:
    """I_n from the symmetric group generators and one partial identity of rank n-1"""
    generators = [PartialBijection.partial_identity(degree, range(1, degree))]
    if degree == 1:
        generators.append(PartialBijection.partial_identity(1, [1]))
    if degree >= 2:
        generators.append(PartialBijection.from_pairs(degree, [(1, 2), (2, 1)] + [(p, p) for p in range(3, degree + 1)]))
    if degree >= 3:
        generators.append(PartialBijection.from_pairs(degree, [(p, p % degree + 1) for p in range(1, degree + 1)]))
    return generate_closure(generators)
