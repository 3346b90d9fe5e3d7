"""The free term algebra over one binary and one omega-ary midpoint.

Terms are Leaf(generator), Pair(left, right) for m-nodes, and
Omega(SeqSpec) for M-nodes whose omega-sequence of children is given by an
eventually-periodic description. Terms are immutable and may share
subterms; traversals memoize on node identity so shared trees stay cheap.

Normal forms are lazily computed sequences of finite (Omega-free) terms,
obtained by the flattening construction.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence, TypeVar, Union

from .convex_bodies import ConvexBody, MidpointAlgebra, _check_tolerance, m_n
from .errors import ArityError, TermSyntaxError, UnknownGeneratorError
from .exact_numbers import WeightFunction, weight_combine
from .lazy import LazySequence

P = TypeVar("P")

TermWeight = WeightFunction


@dataclass(frozen=True)
class Leaf:
    generator: str


@dataclass(frozen=True)
class Pair:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class SeqSpec:
    """prefix followed by cycle repeated forever; the cycle is non-empty."""

    prefix: tuple["Term", ...]
    cycle: tuple["Term", ...]

    def __post_init__(self) -> None:
        if not self.cycle:
            raise ArityError("The cycle of an omega-sequence must be non-empty")

    def __getitem__(self, index: int) -> "Term":
        if index < len(self.prefix):
            return self.prefix[index]
        return self.cycle[(index - len(self.prefix)) % len(self.cycle)]

    def elements(self) -> tuple["Term", ...]:
        """Every distinct position of the description: prefix then cycle."""
        return self.prefix + self.cycle


@dataclass(frozen=True)
class Omega:
    seq: SeqSpec


Term = Union[Leaf, Pair, Omega]


def leaf(generator: str) -> Leaf:
    return Leaf(generator)


def pair(left: Term, right: Term) -> Pair:
    return Pair(left, right)


def omega(cycle: Sequence[Term], prefix: Sequence[Term] = ()) -> Omega:
    return Omega(SeqSpec(tuple(prefix), tuple(cycle)))


def _children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, Pair):
        return (t.left, t.right)
    if isinstance(t, Omega):
        return t.seq.elements()
    return ()


def _postorder(t: Term) -> Iterator[Term]:
    """Each distinct node once, children before parents (iterative)."""
    seen: set[int] = set()
    stack: list[tuple[Term, bool]] = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        stack.extend((c, False) for c in reversed(_children(node)) if id(c) not in seen)


def generators(t: Term) -> tuple[str, ...]:
    """Generators of t in first-occurrence order."""
    # postorder reaches the leftmost leaf first
    found = {n.generator: None for n in _postorder(t) if isinstance(n, Leaf)}
    return tuple(found)


def is_finite(t: Term) -> bool:
    """Membership in the finite binary terms (no Omega nodes)."""
    return not any(isinstance(n, Omega) for n in _postorder(t))


def omega_depth(t: Term) -> int:
    """Maximum nesting of Omega nodes."""
    depth: dict[int, int] = {}
    for n in _postorder(t):
        below = max((depth[id(c)] for c in _children(n)), default=0)
        depth[id(n)] = below + (1 if isinstance(n, Omega) else 0)
    return depth[id(t)]


def _omega_coefficients(seq: SeqSpec) -> list[Fraction]:
    """Total mass each description position carries in M over the sequence.

    Prefix position i gets 2^-(i+1); cycle position r, first occurring at
    L + r, recurs every c steps and gets 2^-(L+r+1) / (1 - 2^-c).
    """
    start = len(seq.prefix)
    period = len(seq.cycle)
    head = [Fraction(1, 1 << (i + 1)) for i in range(start)]
    geometric = 1 - Fraction(1, 1 << period)
    cyclic = [Fraction(1, 1 << (start + r + 1)) / geometric for r in range(period)]
    return head + cyclic


def weight(t: Term) -> TermWeight:
    """Exact weight function: leaves are Diracs, Pair halves, Omega uses closed forms."""
    memo: dict[int, WeightFunction] = {}
    for n in _postorder(t):
        if isinstance(n, Leaf):
            memo[id(n)] = WeightFunction.dirac(n.generator)
        elif isinstance(n, Pair):
            memo[id(n)] = weight_combine(
                [Fraction(1, 2), Fraction(1, 2)], [memo[id(n.left)], memo[id(n.right)]]
            )
        else:
            rows = [memo[id(c)] for c in n.seq.elements()]
            memo[id(n)] = weight_combine(_omega_coefficients(n.seq), rows)
    return memo[id(t)]


Substitution = Mapping[str, Term]


def subst(sigma: Substitution, t: Term) -> Term:
    """Replace every Leaf(g) by sigma[g]."""
    memo: dict[int, Term] = {}
    for n in _postorder(t):
        if isinstance(n, Leaf):
            if n.generator not in sigma:
                raise UnknownGeneratorError(f"Substitution is undefined on generator {n.generator!r}")
            memo[id(n)] = sigma[n.generator]
        elif isinstance(n, Pair):
            memo[id(n)] = Pair(memo[id(n.left)], memo[id(n.right)])
        else:
            memo[id(n)] = Omega(
                SeqSpec(
                    tuple(memo[id(c)] for c in n.seq.prefix),
                    tuple(memo[id(c)] for c in n.seq.cycle),
                )
            )
    return memo[id(t)]


class _TermPairing:
    """The free midpoint algebra on terms: mid builds a Pair node."""

    def mid(self, x: Term, y: Term) -> Term:
        return Pair(x, y)


TERM_PAIRING = _TermPairing()

Grid = Callable[[int, int], Any]


def flatten_grid(grid: Grid, algebra: MidpointAlgebra[P]) -> LazySequence[P]:
    """The sequence whose M equals M_i(M_j grid(i, j)).

    Level l is m(m_{l+1}(x_{0,l+1}, ..., x_{l,l+1}, x_{l,l}),
                m_{l+1}(x_{l+1,0}, ..., x_{l+1,l}, x_{l,l})).
    """

    def level(l: int) -> P:
        column = [grid(i, l + 1) for i in range(l + 1)] + [grid(l, l)]
        row = [grid(l + 1, j) for j in range(l + 1)] + [grid(l, l)]
        return algebra.mid(m_n(algebra, column), m_n(algebra, row))

    return LazySequence(level)


@dataclass(frozen=True)
class NormalForm:
    """A lazily computed sequence of finite terms, M of which is the source.

    The source is a term, or the weight function a free-body normal form
    was built from.
    """

    levels: LazySequence[Term]
    provenance: Union[Term, WeightFunction]

    def level_at(self, l: int) -> Term:
        return self.levels[l]

    def take(self, count: int) -> list[Term]:
        return self.levels.take(count)


def normalize(t: Term) -> NormalForm:
    """Normal form of t: constant levels for finite terms, levelwise pairing,
    and the flattening construction for Omega nodes."""
    memo: dict[int, LazySequence[Term]] = {}

    def levels_of(n: Term) -> LazySequence[Term]:
        if id(n) in memo:
            return memo[id(n)]
        result: LazySequence[Term]
        if is_finite(n):
            result = LazySequence(lambda _l, n=n: n)
        elif isinstance(n, Pair):
            left, right = levels_of(n.left), levels_of(n.right)
            result = LazySequence(lambda l, left=left, right=right: Pair(left[l], right[l]))
        else:
            assert isinstance(n, Omega)
            children = [levels_of(c) for c in n.seq.elements()]
            seq = n.seq

            def child_levels(i: int, seq: SeqSpec = seq, children: list[LazySequence[Term]] = children) -> LazySequence[Term]:
                if i < len(seq.prefix):
                    return children[i]
                return children[len(seq.prefix) + (i - len(seq.prefix)) % len(seq.cycle)]

            result = flatten_grid(lambda i, j: child_levels(i)[j], TERM_PAIRING)
        memo[id(n)] = result
        return result

    return NormalForm(levels_of(t), t)


def truncated_weight(nf: NormalForm, levels: int) -> dict[str, Fraction]:
    """sum_{l<L} 2^-(l+1) weight(level_l), per generator (sums to 1 - 2^-L)."""
    total: dict[str, Fraction] = {}
    for l in range(levels):
        for g, w in weight(nf.level_at(l)).items():
            total[g] = total.get(g, Fraction(0)) + w / (1 << (l + 1))
    return total


def evaluate(
    t: Term,
    assignment: Mapping[str, P],
    body: ConvexBody[P],
    tol: Fraction,
) -> P:
    """
    Value of t in body under the assignment.

    Each Omega nesting level gets an equal share of the tolerance.

    Args:
        t: Term to evaluate
        assignment: Point of body for every generator of t
        body: Convex body the term is interpreted in
        tol: Positive tolerance on the result

    Returns:
        A point of body within tol of the exact value of t

    Raises:
        UnknownGeneratorError: If a generator of t has no assignment
    """
    tol = _check_tolerance(tol)
    missing = [g for g in generators(t) if g not in assignment]
    if missing:
        raise UnknownGeneratorError(f"No assignment for generators {missing}")
    share = tol / max(1, omega_depth(t))
    logging.debug(f"Evaluating in {body}: omega depth {omega_depth(t)}, per-level tolerance {share}")
    memo: dict[int, Any] = {}

    def value(n: Term) -> P:
        key = id(n)
        if key in memo:
            return memo[key]
        result: P
        if isinstance(n, Leaf):
            result = assignment[n.generator]
        elif isinstance(n, Pair):
            result = body.mid(value(n.left), value(n.right))
        else:
            seq = n.seq
            result = body.big_mid(LazySequence(lambda i, seq=seq: value(seq[i])), share)
        memo[key] = result
        return result

    return value(t)


# --- text form ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\(mid\b)|(\(seq\b)|(periodic\b)|([\[\]()])|([^\s\[\]()]+))")
_IDENT_RE = re.compile(r"^[^\W\d][\w.'-]*$", re.UNICODE)


class _TermParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens: list[tuple[str, int]] = []
        position = 0
        while True:
            match = _TOKEN_RE.match(text, position)
            if not match or match.end() == position:
                break
            token = match.group(match.lastindex or 0)
            self.tokens.append((token, match.start(match.lastindex or 0)))
            position = match.end()
        if text[position:].strip():
            raise TermSyntaxError("Unexpected character", position, text)
        self.index = 0

    def _peek(self) -> tuple[str, int]:
        if self.index >= len(self.tokens):
            return "", len(self.text)
        return self.tokens[self.index]

    def _take(self, expected: Optional[str] = None) -> tuple[str, int]:
        token, position = self._peek()
        if not token:
            raise TermSyntaxError("Unexpected end of input", position, self.text)
        if expected is not None and token != expected:
            raise TermSyntaxError(f"Expected {expected!r}, found {token!r}", position, self.text)
        self.index += 1
        return token, position

    def _terms_until(self, closer: str) -> list[Term]:
        found: list[Term] = []
        while self._peek()[0] not in (closer, ""):
            found.append(self.term())
        self._take(closer)
        return found

    def term(self) -> Term:
        token, position = self._take()
        if token == "(mid":
            left = self.term()
            right = self.term()
            self._take(")")
            return Pair(left, right)
        if token == "(seq":
            self._take("periodic")
            self._take("[")
            prefix = self._terms_until("]")
            _, cycle_at = self._take("[")
            cycle = self._terms_until("]")
            if not cycle:
                raise TermSyntaxError("The cycle needs at least one term", cycle_at, self.text)
            self._take(")")
            return Omega(SeqSpec(tuple(prefix), tuple(cycle)))
        if _IDENT_RE.match(token) and token != "periodic":
            return Leaf(token)
        raise TermSyntaxError(f"Unexpected token {token!r}", position, self.text)

    def parse(self) -> Term:
        result = self.term()
        token, position = self._peek()
        if token:
            raise TermSyntaxError(f"Trailing input {token!r}", position, self.text)
        return result


def parse_term(text: str) -> Term:
    """term := ident | "(mid" term term ")" | "(seq" "periodic" "[" term* "]" "[" term+ "]" ")"."""
    return _TermParser(text).parse()


def print_term(t: Term) -> str:
    """Canonical text of t; parse_term(print_term(t)) == t."""
    if isinstance(t, Leaf):
        return t.generator
    if isinstance(t, Pair):
        return f"(mid {print_term(t.left)} {print_term(t.right)})"
    prefix = " ".join(print_term(c) for c in t.seq.prefix)
    cycle = " ".join(print_term(c) for c in t.seq.cycle)
    return f"(seq periodic [{prefix}] [{cycle}])"


__all__ = [
    "Leaf",
    "NormalForm",
    "Omega",
    "Pair",
    "SeqSpec",
    "TERM_PAIRING",
    "Term",
    "TermWeight",
    "evaluate",
    "flatten_grid",
    "generators",
    "is_finite",
    "leaf",
    "normalize",
    "omega",
    "omega_depth",
    "pair",
    "parse_term",
    "print_term",
    "subst",
    "truncated_weight",
    "weight",
]
