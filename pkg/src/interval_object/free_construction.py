"""The free midpoint-convex body over a set of generators.

Points of the free body are finite-support weight functions. A weight is
split greedily into a dyadic part and a remainder, and iterating the split
gives a sequence of dyadic levels whose weighted sum recovers the weight.
Each dyadic level is a finite binary term, so the levels form a normal
form that any body can evaluate with its infinitary midpoint; this is the
homomorphic extension of a generator assignment.

The interval body's own universal map sends a digit stream to the
infinitary midpoint of its digits read as -1 -> a, 0 -> mid(a, b), 1 -> b.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence, TypeVar, Union

from .convex_bodies import ConvexBody, _check_tolerance
from .errors import InvalidWeightsError, UnknownGeneratorError
from .exact_numbers import WeightFunction, format_rational
from .lazy import LazySequence
from .sdstream import DigitStream
from .term_algebra import Leaf, NormalForm, Pair, Term, evaluate

P = TypeVar("P")

FreePoint = WeightFunction

Assignment = Union[Mapping[str, Any], Callable[[str], Any]]


def eta(g: str, universe: Optional[Sequence[str]] = None) -> FreePoint:
    """Insertion of a generator: the Dirac weight at g."""
    if universe is not None and g not in universe:
        raise UnknownGeneratorError(f"{g!r} is not in the generator universe {tuple(universe)}")
    return WeightFunction.dirac(g)


@dataclass(frozen=True)
class DecompositionResult:
    """lam = rho / 2 + mu / 2, with rho dyadic; steps counts greedy moves."""

    rho: WeightFunction
    mu: WeightFunction
    steps: int


def _largest_power_at_most(q: Fraction) -> Fraction:
    """Largest 2^-t <= q with t >= 0, for 0 < q."""
    t = max(0, q.denominator.bit_length() - q.numerator.bit_length() - 1)
    while Fraction(1, 1 << t) > q:
        t += 1
    return Fraction(1, 1 << t)


def decompose(lam: WeightFunction) -> DecompositionResult:
    """Greedy split of lam into a dyadic rho and a remainder mu.

    Start from mu = 2 lam, rho = 0. While rho sums to less than 1, take the
    largest 2^-t that fits under some mu_i, moving it from the first such
    generator (support order) into rho.

    Returns:
        DecompositionResult with lam = rho/2 + mu/2, rho dyadic and summing to 1
    """
    support = lam.restrict_support().support
    mu = {g: 2 * lam[g] for g in support}
    rho = {g: Fraction(0) for g in support}
    total = Fraction(0)
    steps = 0
    while total < 1:
        step = _largest_power_at_most(max(mu.values()))
        target = next(g for g in support if mu[g] >= step)
        mu[target] -= step
        rho[target] += step
        total += step
        steps += 1
    assert total == 1, f"Greedy decomposition overshot to {format_rational(total)}"
    logging.debug(f"Decomposed {lam} in {steps} steps")
    return DecompositionResult(
        rho=WeightFunction(support, rho).restrict_support(),
        mu=WeightFunction(support, mu).restrict_support(),
        steps=steps,
    )


class LevelSequence:
    """Dyadic levels rho^l of a weight lam, with lam^0 = lam and
    lam^l = rho^l / 2 + lam^(l+1) / 2."""

    def __init__(self, source: WeightFunction) -> None:
        self.source = source
        self._splits: LazySequence[tuple[WeightFunction, DecompositionResult]] = LazySequence(
            self._unfold()
        )

    def _unfold(self) -> Iterator[tuple[WeightFunction, DecompositionResult]]:
        current = self.source
        while True:
            split = decompose(current)
            yield current, split
            current = split.mu

    def level_at(self, l: int) -> WeightFunction:
        """rho^l."""
        return self._splits[l][1].rho

    def remainder_at(self, l: int) -> WeightFunction:
        """lam^l."""
        return self._splits[l][0]

    def steps_at(self, l: int) -> int:
        return self._splits[l][1].steps

    def take(self, count: int) -> list[WeightFunction]:
        return [self.level_at(l) for l in range(count)]

    def __getitem__(self, l: int) -> WeightFunction:
        return self.level_at(l)


def levels(lam: WeightFunction) -> LevelSequence:
    return LevelSequence(lam)


def reconstruction_residual(lam: Union[WeightFunction, LevelSequence], count: int) -> Fraction:
    """max_i |lam_i - sum_{l<count} 2^-(l+1) rho^l_i|; at most 2^-count."""
    seq = lam if isinstance(lam, LevelSequence) else levels(lam)
    partial = {g: Fraction(0) for g in seq.source.support}
    for l in range(count):
        for g, w in seq.level_at(l).items():
            partial[g] = partial.get(g, Fraction(0)) + w / (1 << (l + 1))
    return max((abs(seq.source[g] - s) for g, s in partial.items()), default=Fraction(0))


def dyadic_tree(rho: WeightFunction) -> Term:
    """The full binary tree whose weight is the dyadic weight rho.

    For a common denominator 2^t the tree has height t and its 2^t leaves
    are filled in support order, rho_g * 2^t leaves for g. Subtrees whose
    leaves all carry one generator are shared, so the tree is a DAG with
    O(len(support) * t) distinct nodes.
    """
    rho = rho.restrict_support()
    if not rho.is_dyadic():
        raise InvalidWeightsError(f"Weight {rho} is not dyadic")
    height = max(w.denominator.bit_length() - 1 for w in rho.values())
    # leaf interval [start, end) of each generator in the 2^height leaves
    bounds: list[tuple[int, int, str]] = []
    start = 0
    for g, w in rho.items():
        end = start + int(w * (1 << height))
        bounds.append((start, end, g))
        start = end
    uniform: dict[tuple[str, int], Term] = {}

    def solid(g: str, h: int) -> Term:
        key = (g, h)
        if key not in uniform:
            uniform[key] = Leaf(g) if h == 0 else Pair(solid(g, h - 1), solid(g, h - 1))
        return uniform[key]

    def build(offset: int, h: int) -> Term:
        stop = offset + (1 << h)
        for lo, hi, g in bounds:
            if lo <= offset and stop <= hi:
                return solid(g, h)
        half = 1 << (h - 1)
        return Pair(build(offset, h - 1), build(offset + half, h - 1))

    return build(0, height)


def to_term(lam: WeightFunction) -> NormalForm:
    """Normal form of lam: level l is the dyadic tree of rho^l."""
    seq = levels(lam)
    trees: LazySequence[Term] = LazySequence(lambda l: dyadic_tree(seq.level_at(l)))
    return NormalForm(trees, provenance=lam)


def _resolve(f: Assignment, support: Sequence[str]) -> dict[str, Any]:
    if isinstance(f, Mapping):
        missing = [g for g in support if g not in f]
        if missing:
            raise UnknownGeneratorError(f"No image for generators {missing}")
        return {g: f[g] for g in support}
    return {g: f(g) for g in support}


def dyadic_combine(body: ConvexBody[P], rho: WeightFunction, f: Assignment) -> P:
    """
    sum_g rho_g f(g) for a dyadic rho, computed with binary midpoints only.

    Args:
        body: Target convex body
        rho: Weight function whose weights are all dyadic
        f: Generator assignment
    """
    tree = dyadic_tree(rho)
    assignment = _resolve(f, rho.restrict_support().support)
    # finite terms are evaluated exactly; the tolerance is never consulted
    return evaluate(tree, assignment, body, body.diameter)


def extend_h(f: Assignment, body: ConvexBody[P], w: FreePoint, tol: Fraction) -> P:
    """
    The homomorphic extension of f to the free body, evaluated at w.

    Evaluates M_l dyadic_combine(rho^l) with the body's infinitary midpoint,
    so weight-equal presentations of w land on the same point.

    Args:
        f: Generator assignment, a mapping or a function of the generator name
        body: Target convex body
        w: Point of the free body (finite-support rational weight function)
        tol: Positive tolerance on the result, in the body's metric

    Returns:
        A point of body within tol of sum_g w_g f(g)

    Raises:
        ToleranceError: If tol is not positive
        UnknownGeneratorError: If f has no value for a generator in w's support
    """
    tol = _check_tolerance(tol)
    seq = levels(w)
    assignment = _resolve(f, w.restrict_support().support)
    points: LazySequence[P] = LazySequence(
        lambda l: dyadic_combine(body, seq.level_at(l), assignment)
    )
    logging.debug(f"Extending over {w} into {body} at depth {body.depth_for(tol)}")
    return body.big_mid(points, tol)


def hom_from_interval(
    a: P, b: P, body: ConvexBody[P], x: DigitStream, tol: Fraction
) -> P:
    """
    Image of x under the bipointed map [-1, 1] -> body sending -1 to a and 1 to b.

    Args:
        a: Image of -1
        b: Image of 1
        body: Target convex body
        x: Signed-digit stream; digit d selects a, mid(a, b) or b
        tol: Positive tolerance on the result

    Returns:
        A point of body within tol of the affine image of x
    """
    tol = _check_tolerance(tol)
    images = {-1: a, 0: body.mid(a, b), 1: b}
    points: LazySequence[P] = LazySequence(lambda i: images[x[i]])
    return body.big_mid(points, tol)


__all__ = [
    "DecompositionResult",
    "FreePoint",
    "LevelSequence",
    "decompose",
    "dyadic_combine",
    "dyadic_tree",
    "eta",
    "extend_h",
    "hom_from_interval",
    "levels",
    "reconstruction_residual",
    "to_term",
]
