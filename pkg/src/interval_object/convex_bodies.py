"""Midpoint-convex bodies: the abstract contract and its concrete instances.

A body supplies a binary midpoint `mid`, an approximate infinitary
midpoint `approx_M` (the m_n truncation with a tail point), a diameter
bound and a distance. From these, `big_mid` approximates M over a whole
sequence to a given tolerance, and the suites below test the
midpoint axioms, cancellation and the approximation property.

Instances:

- `IntervalBody`: signed-digit streams, exact M via `sdstream.bigmid`.
- `EuclideanBody`: rational vectors in a max-norm ball (numpy object arrays).
- `SimplexBody`: weight functions over n+1 named vertices.
- `LShapeFixture`: a non-cancellative midpoint set, used as a test fixture.
"""

import logging
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Any, Callable, Generic, Iterator, Optional, Protocol, Sequence, TypeVar

import numpy as np
from tqdm import tqdm

from . import sdstream
from .errors import ArityError, BodySpecError, RangeError, ToleranceError
from .exact_numbers import (
    WeightFunction,
    format_rational,
    format_tolerance,
    mid as rational_mid,
    parse_rational,
    weight_combine,
)
from .lazy import LazySequence, as_lazy
from .models import CheckReport, Suite
from .sdstream import DigitStream, Precision

P = TypeVar("P")
State = TypeVar("State")

DEFAULT_BODY_PRECISION = 64

# Denominators for sampled rationals; kept small so exact arithmetic stays cheap
SAMPLE_DENOMINATORS = (1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 16, 27, 32, 64)

Sampler = Callable[[np.random.Generator], Any]
PointSequence = Any  # LazySequence, iterable or index function of points


class MidpointAlgebra(Protocol[P]):
    """Anything with a binary midpoint."""

    def mid(self, x: P, y: P) -> P: ...


def _right_fold(algebra: MidpointAlgebra[P], points: Sequence[P]) -> P:
    if not points:
        raise ArityError("m_n needs at least one point")
    result = points[-1]
    for x in reversed(points[:-1]):
        result = algebra.mid(x, result)
    return result


def m_n(algebra: MidpointAlgebra[P], points: Sequence[P]) -> P:
    """Right-nested midpoint fold: m_0(x) = x, m_n(x_0, ...) = m(x_0, m_{n-1}(...)).

    Bodies may evaluate the fold in one step through `ConvexBody.fold`.
    """
    if isinstance(algebra, ConvexBody):
        return algebra.fold(points)
    return _right_fold(algebra, points)


def fold_coefficients(n: int) -> list[Fraction]:
    """Weights of m_n: 2^-(i+1) for x_0 .. x_{n-1}, then 2^-n for the tail x_n."""
    return [Fraction(1, 1 << (i + 1)) for i in range(n)] + [Fraction(1, 1 << n)]


def _check_tolerance(tol: Fraction) -> Fraction:
    tol = Fraction(tol)
    if tol <= 0:
        raise ToleranceError(f"Tolerance must be positive, got {format_rational(tol)}")
    return tol


def random_rational(
    rng: np.random.Generator,
    lo: Fraction = Fraction(-1),
    hi: Fraction = Fraction(1),
    max_denominator: Optional[int] = None,
) -> Fraction:
    """A rational in [lo, hi], on a grid of width (hi - lo)/den.

    den is one of SAMPLE_DENOMINATORS, or uniform in 1..max_denominator when given.
    """
    if max_denominator is None:
        den = int(SAMPLE_DENOMINATORS[int(rng.integers(len(SAMPLE_DENOMINATORS)))])
    else:
        den = int(rng.integers(1, max_denominator + 1))
    steps = int(rng.integers(0, den + 1))
    return lo + (hi - lo) * Fraction(steps, den)


class ConvexBody(ABC, Generic[P]):
    """Bipointed-free m-convex body contract with approximate infinitary M."""

    name: str = "body"
    diameter: Fraction = Fraction(1)

    @abstractmethod
    def mid(self, x: P, y: P) -> P:
        """Binary midpoint."""

    @property
    @abstractmethod
    def center(self) -> P:
        """Designated tail point for truncated M."""

    @abstractmethod
    def distance(self, x: P, y: P) -> Fraction:
        """Exact distance, or a certified upper bound where values are lazy."""

    @abstractmethod
    def sample(self, rng: np.random.Generator) -> P:
        """A random point; deterministic given the generator state."""

    @abstractmethod
    def parse_point(self, text: str) -> P:
        """Point from its CLI text form."""

    @abstractmethod
    def format_point(self, x: P) -> Any:
        """JSON-ready rendering of a point."""

    def exact_combination(
        self, coefficients: Sequence[Fraction], points: Sequence[P]
    ) -> Optional[P]:
        """sum_i c_i * x_i computed exactly, or None where the body has no linear oracle."""
        return None

    def fold(self, points: Sequence[P]) -> P:
        """m_n over points, the last one acting as the tail."""
        return _right_fold(self, points)

    def approx_M(self, prefix: Sequence[P], tail: Optional[P] = None, depth: Optional[int] = None) -> P:
        """m_n(x_0, ..., x_{n-1}, tail), within 2^-n * diameter of the true M."""
        n = len(prefix) if depth is None else depth
        if n > len(prefix):
            raise ArityError(f"approx_M at depth {n} needs {n} points, got {len(prefix)}")
        return m_n(self, [*prefix[:n], self.center if tail is None else tail])

    def depth_for(self, tol: Fraction) -> int:
        """Smallest n with 2^-n * diameter <= tol."""
        tol = _check_tolerance(tol)
        n = 0
        while self.diameter / (1 << n) > tol:
            n += 1
        return n

    def big_mid(self, points: PointSequence, tol: Fraction) -> P:
        """M over a whole sequence, within tol."""
        seq = as_lazy(points)
        n = self.depth_for(tol)
        return self.approx_M(seq.take(n), depth=n)

    def __str__(self) -> str:
        return self.name


class IntervalBody(ConvexBody[DigitStream]):
    """The interval [-1, 1] as signed-digit streams; M is exact."""

    diameter = Fraction(2)

    def __init__(self, precision: int = DEFAULT_BODY_PRECISION) -> None:
        self.precision = Precision(precision)
        self.name = "interval"

    def mid(self, x: DigitStream, y: DigitStream) -> DigitStream:
        return sdstream.mid(x, y)

    @property
    def center(self) -> DigitStream:
        return sdstream.ZERO

    def fold(self, points: Sequence[DigitStream]) -> DigitStream:
        if len(points) < 2:
            return _right_fold(self, points)
        exact = self.exact_combination(fold_coefficients(len(points) - 1), points)
        if exact is not None:
            return exact
        # m_n(x_0, ..., x_{n-1}, t) = M(x_0, ..., x_{n-1}, t, t, ...)
        head, tail = list(points[:-1]), points[-1]
        return sdstream.bigmid(LazySequence(lambda i: head[i] if i < len(head) else tail))

    def big_mid(self, points: PointSequence, tol: Fraction) -> DigitStream:
        _check_tolerance(tol)
        return sdstream.bigmid(points)

    def _oracle_error(self, x: DigitStream) -> Fraction:
        """How far the digits of x are from its known value (0 when consistent)."""
        assert x.known_value is not None
        enclosure = sdstream.approx_value(x, self.precision)
        lo, hi = enclosure.lo.to_fraction(), enclosure.hi.to_fraction()
        return max(Fraction(0), lo - x.known_value, x.known_value - hi)

    def distance(self, x: DigitStream, y: DigitStream) -> Fraction:
        if x.known_value is not None and y.known_value is not None:
            exact = abs(x.known_value - y.known_value)
            return exact + self._oracle_error(x) + self._oracle_error(y)
        return sdstream.distance_bound(x, y, self.precision)

    def sample(self, rng: np.random.Generator) -> DigitStream:
        return sdstream.from_rational(random_rational(rng, Fraction(-1), Fraction(1)))

    def parse_point(self, text: str) -> DigitStream:
        return sdstream.from_rational(parse_rational(text))

    def format_point(self, x: DigitStream) -> Any:
        rendered: dict[str, Any] = {"value": sdstream.approx_value(x, self.precision).format(self.precision.digits)}
        if x.known_value is not None:
            rendered["exact"] = format_rational(x.known_value)
        return rendered

    def exact_combination(
        self, coefficients: Sequence[Fraction], points: Sequence[DigitStream]
    ) -> Optional[DigitStream]:
        if any(p.known_value is None for p in points):
            return None
        total = sum((c * p.known_value for c, p in zip(coefficients, points)), Fraction(0))  # type: ignore[operator]
        return sdstream.from_rational(total)


Vector = np.ndarray  # object array of Fraction


class EuclideanBody(ConvexBody[Vector]):
    """Rational vectors of dimension k with max-norm at most R."""

    def __init__(self, dimension: int, radius: Fraction = Fraction(1)) -> None:
        if dimension < 1:
            raise BodySpecError(f"Dimension must be positive, got {dimension}")
        radius = Fraction(radius)
        if radius <= 0:
            raise BodySpecError(f"Radius must be positive, got {format_rational(radius)}")
        self.dimension = dimension
        self.radius = radius
        self.diameter = 2 * radius
        self.name = f"euclid:{dimension}:{format_rational(radius)}"

    def point(self, components: Sequence[Any]) -> Vector:
        """Validated point from rational-like components."""
        vector = np.array([Fraction(c) for c in components], dtype=object)
        if vector.shape != (self.dimension,):
            raise RangeError(f"Expected {self.dimension} components, got {len(components)}")
        if np.max(np.abs(vector)) > self.radius:
            raise RangeError(f"Point {self.format_point(vector)} lies outside {self.name}")
        return vector

    def mid(self, x: Vector, y: Vector) -> Vector:
        return (x + y) / 2

    @property
    def center(self) -> Vector:
        return np.array([Fraction(0)] * self.dimension, dtype=object)

    def fold(self, points: Sequence[Vector]) -> Vector:
        if not points:
            return _right_fold(self, points)
        return self._linear(fold_coefficients(len(points) - 1), points)

    def distance(self, x: Vector, y: Vector) -> Fraction:
        return Fraction(np.max(np.abs(x - y)))

    def sample(self, rng: np.random.Generator) -> Vector:
        return np.array(
            [random_rational(rng, -self.radius, self.radius) for _ in range(self.dimension)],
            dtype=object,
        )

    def parse_point(self, text: str) -> Vector:
        return self.point([parse_rational(part) for part in text.split(":")])

    def format_point(self, x: Vector) -> Any:
        return [format_rational(c) for c in x]

    def exact_combination(
        self, coefficients: Sequence[Fraction], points: Sequence[Vector]
    ) -> Optional[Vector]:
        return self._linear(coefficients, points)

    def _linear(self, coefficients: Sequence[Fraction], points: Sequence[Vector]) -> Vector:
        result = self.center
        for c, x in zip(coefficients, points):
            result = result + x * c
        return result


class SimplexBody(ConvexBody[WeightFunction]):
    """The free body on n+1 vertices: weight functions, max-norm distance."""

    diameter = Fraction(1)

    def __init__(self, vertices: Sequence[str]) -> None:
        if not vertices:
            raise BodySpecError("A simplex needs at least one vertex")
        self.vertices = tuple(vertices)
        self.name = f"simplex:{len(self.vertices) - 1}"

    @classmethod
    def of_dimension(cls, n: int) -> "SimplexBody":
        if n < 0:
            raise BodySpecError(f"Simplex dimension must be >= 0, got {n}")
        return cls([f"v{i}" for i in range(n + 1)])

    def mid(self, x: WeightFunction, y: WeightFunction) -> WeightFunction:
        return weight_combine([Fraction(1, 2), Fraction(1, 2)], [x, y])

    @property
    def center(self) -> WeightFunction:
        return WeightFunction.uniform(self.vertices)

    def fold(self, points: Sequence[WeightFunction]) -> WeightFunction:
        if not points:
            return _right_fold(self, points)
        return weight_combine(fold_coefficients(len(points) - 1), points)

    def distance(self, x: WeightFunction, y: WeightFunction) -> Fraction:
        return max(abs(x[v] - y[v]) for v in self.vertices)

    def sample(self, rng: np.random.Generator) -> WeightFunction:
        raw = [int(r) for r in rng.integers(0, 9, size=len(self.vertices))]
        if sum(raw) == 0:
            raw[int(rng.integers(len(raw)))] = 1
        total = sum(raw)
        return WeightFunction.from_mapping({v: Fraction(r, total) for v, r in zip(self.vertices, raw)})

    def parse_point(self, text: str) -> WeightFunction:
        """A vertex name, or "v0=p/q;v1=p/q;..." barycentric weights."""
        if text in self.vertices:
            return WeightFunction.dirac(text)
        weights: dict[str, Fraction] = {}
        for part in text.split(";"):
            gen, _, raw = part.partition("=")
            if gen not in self.vertices:
                raise RangeError(f"{gen!r} is not a vertex of {self.name}")
            weights[gen] = parse_rational(raw)
        return WeightFunction.from_mapping(weights)

    def format_point(self, x: WeightFunction) -> Any:
        return x.to_json()

    def exact_combination(
        self, coefficients: Sequence[Fraction], points: Sequence[WeightFunction]
    ) -> Optional[WeightFunction]:
        return weight_combine(coefficients, points)


LPoint = tuple[Fraction, Fraction]


class LShapeFixture(ConvexBody[LPoint]):
    """Points (x, y) of [0,1]^2 with x = 1 or y = 1.

    m((1, y), (1, y')) = (1, (y + y')/2) and otherwise
    m((x, y), (x', y')) = ((x + x')/2, 1). A midpoint set that is iterative
    but not cancellative.
    """

    diameter = Fraction(1)

    def __init__(self) -> None:
        self.name = "lshape"

    @staticmethod
    def point(x: Any, y: Any) -> LPoint:
        p = (Fraction(x), Fraction(y))
        if not all(0 <= c <= 1 for c in p) or 1 not in p:
            raise RangeError(f"({format_rational(p[0])}, {format_rational(p[1])}) is not on the L")
        return p

    def mid(self, x: LPoint, y: LPoint) -> LPoint:
        if x[0] == 1 and y[0] == 1:
            return (Fraction(1), rational_mid(x[1], y[1]))
        return (rational_mid(x[0], y[0]), Fraction(1))

    @property
    def center(self) -> LPoint:
        return (Fraction(1), Fraction(1))

    def distance(self, x: LPoint, y: LPoint) -> Fraction:
        return max(abs(x[0] - y[0]), abs(x[1] - y[1]))

    def sample(self, rng: np.random.Generator) -> LPoint:
        t = random_rational(rng, Fraction(0), Fraction(1))
        return (Fraction(1), t) if rng.integers(2) else (t, Fraction(1))

    def parse_point(self, text: str) -> LPoint:
        x, _, y = text.partition(":")
        return self.point(parse_rational(x), parse_rational(y))

    def format_point(self, x: LPoint) -> Any:
        return [format_rational(c) for c in x]


def parse_body(spec: str, precision: int = DEFAULT_BODY_PRECISION) -> ConvexBody[Any]:
    """"interval", "simplex:N", "euclid:K:R" or "lshape"."""
    kind, *params = spec.strip().split(":")
    try:
        if kind == "interval" and not params:
            return IntervalBody(precision)
        if kind == "lshape" and not params:
            return LShapeFixture()
        if kind == "simplex" and len(params) == 1:
            return SimplexBody.of_dimension(int(params[0]))
        if kind == "euclid" and len(params) in (1, 2):
            radius = parse_rational(params[1]) if len(params) == 2 else Fraction(1)
            return EuclideanBody(int(params[0]), radius)
    except ValueError as e:
        if isinstance(e, BodySpecError):
            raise
        raise BodySpecError(f"Bad body descriptor {spec!r}: {e}") from e
    raise BodySpecError(
        f"Unknown body descriptor {spec!r} (expected interval, simplex:N, euclid:K:R or lshape)"
    )


def _orbit(tail: Callable[[State], State], s0: State) -> Iterator[State]:
    state = s0
    while True:
        yield state
        state = tail(state)


def iterate_coalgebra(
    body: ConvexBody[P],
    head: Callable[[State], P],
    tail: Callable[[State], State],
    s0: State,
    tol: Fraction,
) -> P:
    """
    The solution u(s0) = M_i head(tail^i(s0)) of the coalgebra (head, tail).

    Args:
        body: Convex body the heads live in
        head: Point emitted at each state
        tail: Next state
        s0: Initial state
        tol: Positive tolerance on the result

    Returns:
        A point of body within tol of the unique fixed point at s0
    """
    tol = _check_tolerance(tol)
    states: LazySequence[State] = LazySequence(_orbit(tail, s0))
    points: LazySequence[P] = LazySequence(lambda i: head(states[i]))
    return body.big_mid(points, tol)


def _format_violations(violations: dict[str, Fraction]) -> dict[str, str]:
    return {name: format_rational(v) for name, v in violations.items()}


def check_midpoint_axioms(
    body: ConvexBody[P],
    sampler: Optional[Sampler] = None,
    samples: int = 1000,
    tol: Fraction = Fraction(0),
    seed: int = 0,
    quiet: bool = True,
) -> CheckReport:
    """Max observed violation of idempotency, commutativity and transposition."""
    sampler = sampler or body.sample
    rng = np.random.default_rng(seed)
    worst = {"idempotency": Fraction(0), "commutativity": Fraction(0), "transposition": Fraction(0)}
    logging.debug(f"Midpoint axioms on {body}: {samples} samples, seed {seed}")
    for _ in tqdm(range(samples), desc=f"Axioms ({body})", disable=quiet):
        x, y, z, w = (sampler(rng) for _ in range(4))
        worst["idempotency"] = max(worst["idempotency"], body.distance(body.mid(x, x), x))
        worst["commutativity"] = max(
            worst["commutativity"], body.distance(body.mid(x, y), body.mid(y, x))
        )
        left = body.mid(body.mid(x, y), body.mid(z, w))
        right = body.mid(body.mid(x, z), body.mid(y, w))
        worst["transposition"] = max(worst["transposition"], body.distance(left, right))
    return CheckReport(
        suite=Suite.AXIOMS.value,
        body=str(body),
        samples=samples,
        seed=seed,
        tolerance=format_tolerance(tol),
        max_violation=_format_violations(worst),
        passed=all(v <= tol for v in worst.values()),
    )


def check_unfolding(
    body: ConvexBody[P],
    sampler: Optional[Sampler] = None,
    samples: int = 200,
    tol: Fraction = Fraction(1, 1 << 40),
    seed: int = 0,
    quiet: bool = True,
) -> CheckReport:
    """M(x) against mid(x_0, M(tail x)) on random eventually-periodic sequences."""
    sampler = sampler or body.sample
    rng = np.random.default_rng(seed)
    worst = Fraction(0)
    for _ in tqdm(range(samples), desc=f"Unfolding ({body})", disable=quiet):
        prefix = [sampler(rng) for _ in range(int(rng.integers(0, 4)))]
        cycle = [sampler(rng) for _ in range(int(rng.integers(1, 4)))]

        def element(i: int, prefix: list[P] = prefix, cycle: list[P] = cycle) -> P:
            return prefix[i] if i < len(prefix) else cycle[(i - len(prefix)) % len(cycle)]

        whole = body.big_mid(LazySequence(element), tol / 4)
        unfolded = body.mid(element(0), body.big_mid(LazySequence(lambda i: element(i + 1)), tol / 4))
        worst = max(worst, body.distance(whole, unfolded))
    return CheckReport(
        suite="unfolding",
        body=str(body),
        samples=samples,
        seed=seed,
        tolerance=format_tolerance(tol),
        max_violation={"unfolding": format_rational(worst)},
        passed=worst <= tol,
    )


def check_cancellation_probe(
    body: ConvexBody[P],
    sampler: Optional[Sampler] = None,
    samples: int = 2000,
    tol: Fraction = Fraction(1, 1 << 40),
    seed: int = 0,
    quiet: bool = True,
) -> CheckReport:
    """Search for x, y, z with m(x, z) = m(y, z) within tol while x and y are > 2 tol apart."""
    sampler = sampler or body.sample
    rng = np.random.default_rng(seed)
    counterexample: Optional[dict[str, Any]] = None
    tried = 0
    for tried in tqdm(range(1, samples + 1), desc=f"Cancellation ({body})", disable=quiet):
        x, y, z = sampler(rng), sampler(rng), sampler(rng)
        if body.distance(x, y) <= 2 * tol:
            continue
        if body.distance(body.mid(x, z), body.mid(y, z)) <= tol:
            counterexample = {
                "x": body.format_point(x),
                "y": body.format_point(y),
                "z": body.format_point(z),
                "mid": body.format_point(body.mid(x, z)),
                "sample": tried,
            }
            logging.debug(f"Cancellation fails in {body} at sample {tried}")
            break
    return CheckReport(
        suite=Suite.CANCELLATION.value,
        body=str(body),
        samples=tried,
        seed=seed,
        tolerance=format_tolerance(tol),
        max_violation={"cancellation": "1" if counterexample else "0"},
        passed=counterexample is None,
        counterexample=counterexample,
    )


SequencePair = tuple[PointSequence, PointSequence]


def check_approximation(
    body: ConvexBody[P],
    sequences: Sequence[SequencePair],
    n_max: int,
    tol: Fraction = Fraction(1, 1 << 40),
    seed: int = 0,
    quiet: bool = True,
) -> CheckReport:
    """Prefix agreement within eps bounds M agreement by 4 eps + 2^(2-n) * diameter."""
    tol = _check_tolerance(tol)
    worst = Fraction(0)
    for xs_raw, ys_raw in tqdm(sequences, desc=f"Approximation ({body})", disable=quiet):
        xs, ys = as_lazy(xs_raw), as_lazy(ys_raw)
        gap = body.distance(body.big_mid(xs, tol / 4), body.big_mid(ys, tol / 4))
        for n in range(1, n_max + 1):
            eps = body.distance(m_n(body, xs.take(n + 1)), m_n(body, ys.take(n + 1)))
            bound = 4 * eps + body.diameter * Fraction(4, 1 << n)
            worst = max(worst, gap - bound)
    return CheckReport(
        suite=Suite.APPROX.value,
        body=str(body),
        samples=len(sequences),
        seed=seed,
        tolerance=format_tolerance(tol),
        max_violation={"approximation": format_rational(worst)},
        passed=worst <= tol,
    )
