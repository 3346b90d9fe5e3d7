"""Exact rational and dyadic arithmetic, plus weight functions.

Nothing in this module rounds. `Fraction` is the rational type; `Dyadic`
is the lossless subset with power-of-two denominators used for digit
partial sums and enclosures; `WeightFunction` is a finite-support
probability vector over named generators.
"""

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    DivisionByZeroError,
    ExactArithmeticError,
    InvalidWeightsError,
    RangeError,
    RationalParseError,
)
from .models import RatOp

ExactRational = Fraction

RationalLike = Union[Fraction, int]

_RATIONAL_RE = re.compile(r"\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")
ONE = Fraction(1)
HALF = Fraction(1, 2)


def parse_rational(text: str) -> Fraction:
    """Parse a "p/q" or "p" literal. Decimal points are rejected."""
    # U+2212 is accepted as a minus sign, as in digit strings
    normalized = text.replace("−", "-")
    match = _RATIONAL_RE.match(normalized)
    if not match:
        bad = next(
            (i for i, c in enumerate(normalized) if not (c.isdigit() or c in "+-/ \t")),
            0,
        )
        raise RationalParseError(f"Malformed rational literal {text!r}", bad, text)
    numerator, denominator = match.groups()
    if denominator is not None and int(denominator) == 0:
        raise RationalParseError(
            f"Zero denominator in {text!r}", normalized.index("/") + 1, text
        )
    return Fraction(int(numerator), int(denominator or 1))


def format_rational(q: Fraction) -> str:
    """Inverse of parse_rational: "p/q", or "p" when the denominator is 1."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_tolerance(tol: Fraction) -> str:
    """"2^-n" for a power of two at most 1, the plain rational otherwise."""
    tol = Fraction(tol)
    den = tol.denominator
    if tol.numerator == 1 and den & (den - 1) == 0:
        return f"2^-{den.bit_length() - 1}"
    return format_rational(tol)


def rat_arith(a: RationalLike, b: RationalLike, op: RatOp) -> Fraction:
    """Exact binary arithmetic; `mid` is (a + b) / 2."""
    a, b = Fraction(a), Fraction(b)
    if op == RatOp.ADD:
        return a + b
    elif op == RatOp.SUB:
        return a - b
    elif op == RatOp.MUL:
        return a * b
    elif op == RatOp.DIV:
        if b == 0:
            raise DivisionByZeroError(f"Division of {format_rational(a)} by zero")
        return a / b
    elif op == RatOp.MID:
        return (a + b) / 2
    else:
        raise RangeError(f"Unknown rational operation: {op}")


def mid(a: RationalLike, b: RationalLike) -> Fraction:
    """Binary midpoint of two rationals."""
    return rat_arith(a, b, RatOp.MID)


def confine(q: RationalLike) -> Fraction:
    """Clamp to [-1, 1]: Min(1, Max(q, -1))."""
    return min(ONE, max(Fraction(q), -ONE))


def is_dyadic(a: RationalLike) -> bool:
    """True iff the reduced denominator is a power of two."""
    d = Fraction(a).denominator
    return d & (d - 1) == 0


@dataclass(frozen=True, order=False)
class Dyadic:
    """mantissa / 2**exponent, normalized so the mantissa is odd (or zero)."""

    mantissa: int
    exponent: int = 0

    def __post_init__(self) -> None:
        if self.exponent < 0:
            # fold negative exponents into the mantissa
            object.__setattr__(self, "mantissa", self.mantissa << -self.exponent)
            object.__setattr__(self, "exponent", 0)
        m, e = self.mantissa, self.exponent
        if m == 0:
            e = 0
        else:
            shift = min(e, (m & -m).bit_length() - 1)
            m, e = m >> shift, e - shift
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def from_fraction(cls, q: RationalLike) -> "Dyadic":
        q = Fraction(q)
        if not is_dyadic(q):
            raise ExactArithmeticError(f"{format_rational(q)} is not dyadic")
        return cls(q.numerator, q.denominator.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.exponent)

    def _aligned(self, other: "Dyadic") -> tuple[int, int, int]:
        e = max(self.exponent, other.exponent)
        return (
            self.mantissa << (e - self.exponent),
            other.mantissa << (e - other.exponent),
            e,
        )

    def __add__(self, other: "Dyadic") -> "Dyadic":
        a, b, e = self._aligned(other)
        return Dyadic(a + b, e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        a, b, e = self._aligned(other)
        return Dyadic(a - b, e)

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.mantissa, self.exponent)

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.mantissa), self.exponent)

    def shift(self, k: int) -> "Dyadic":
        """Multiply by 2**k (k may be negative)."""
        return Dyadic(self.mantissa, self.exponent - k)

    def __lt__(self, other: "Dyadic") -> bool:
        a, b, _ = self._aligned(other)
        return a < b

    def __le__(self, other: "Dyadic") -> bool:
        a, b, _ = self._aligned(other)
        return a <= b

    def __gt__(self, other: "Dyadic") -> bool:
        return other < self

    def __ge__(self, other: "Dyadic") -> bool:
        return other <= self

    def sign(self) -> int:
        return (self.mantissa > 0) - (self.mantissa < 0)

    def __str__(self) -> str:
        return format_rational(self.to_fraction())


DYADIC_ZERO = Dyadic(0)
DYADIC_ONE = Dyadic(1)


def clip(d: Dyadic, lo: Dyadic = -DYADIC_ONE, hi: Dyadic = DYADIC_ONE) -> Dyadic:
    return lo if d < lo else hi if d > hi else d


def decimal_string(q: RationalLike, places: int) -> str:
    """q rounded to `places` decimal places (half-even), as plain text."""
    scaled = round(Fraction(q) * 10**places)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    if places == 0:
        return f"{sign}{digits}"
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


@dataclass(frozen=True)
class DyadicInterval:
    """A closed enclosure [lo, hi] with dyadic endpoints."""

    lo: Dyadic
    hi: Dyadic

    def __post_init__(self) -> None:
        if self.hi < self.lo:
            raise RangeError(f"Empty interval [{self.lo}, {self.hi}]")

    def contains(self, q: RationalLike) -> bool:
        q = Fraction(q)
        return self.lo.to_fraction() <= q <= self.hi.to_fraction()

    @property
    def width(self) -> Fraction:
        return (self.hi - self.lo).to_fraction()

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi).shift(-1).to_fraction()

    def format(self, digits: int) -> str:
        """Decimal centre with an explicit error bound: "value ± 2^-n"."""
        places = max(1, (digits * 3) // 10 + 1)
        return f"{decimal_string(self.midpoint, places)} ± 2^-{digits}"

    def to_dict(self) -> dict[str, str]:
        return {"lo": str(self.lo), "hi": str(self.hi)}


def _check_weight_range(gen: str, w: Fraction) -> None:
    if not 0 <= w <= 1:
        raise InvalidWeightsError(
            f"Weight of {gen!r} is {format_rational(w)}, outside [0, 1]"
        )


@dataclass(frozen=True)
class WeightFunction:
    """Finite-support map generator -> rational weight, weights summing to 1.

    The support is ordered: iteration, serialization and tie-breaking all
    follow it. Generators outside the support have weight 0.
    """

    support: tuple[str, ...]
    weights: Mapping[str, Fraction] = field(hash=False)

    def __post_init__(self) -> None:
        if len(set(self.support)) != len(self.support):
            raise InvalidWeightsError(f"Duplicate generators in support {self.support}")
        if set(self.weights) != set(self.support):
            raise InvalidWeightsError(
                "Weights must be given for exactly the generators of the support"
            )
        frozen = {g: Fraction(self.weights[g]) for g in self.support}
        for g, w in frozen.items():
            _check_weight_range(g, w)
        total = sum(frozen.values(), Fraction(0))
        if total != 1:
            raise InvalidWeightsError(
                f"Weights sum to {format_rational(total)}, not 1"
            )
        object.__setattr__(self, "weights", frozen)

    @classmethod
    def from_mapping(cls, weights: Mapping[str, RationalLike]) -> "WeightFunction":
        return cls(tuple(weights), {g: Fraction(w) for g, w in weights.items()})

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, RationalLike]]) -> "WeightFunction":
        return cls.from_mapping(dict(pairs))

    @classmethod
    def dirac(cls, gen: str) -> "WeightFunction":
        return cls((gen,), {gen: ONE})

    @classmethod
    def uniform(cls, gens: Sequence[str]) -> "WeightFunction":
        return cls(tuple(gens), {g: Fraction(1, len(gens)) for g in gens})

    def __getitem__(self, gen: str) -> Fraction:
        return self.weights.get(gen, Fraction(0))

    def __iter__(self):  # type: ignore[no-untyped-def]
        return iter(self.support)

    def __len__(self) -> int:
        return len(self.support)

    def __eq__(self, other: object) -> bool:
        # support order is presentation only; zero weights are immaterial
        if not isinstance(other, WeightFunction):
            return NotImplemented
        gens = set(self.support) | set(other.support)
        return all(self[g] == other[g] for g in gens)

    def __hash__(self) -> int:
        return hash(frozenset((g, w) for g, w in self.weights.items() if w))

    def items(self) -> list[tuple[str, Fraction]]:
        return [(g, self.weights[g]) for g in self.support]

    def values(self) -> list[Fraction]:
        return [self.weights[g] for g in self.support]

    def is_dyadic(self) -> bool:
        return all(is_dyadic(w) for w in self.weights.values())

    def restrict_support(self) -> "WeightFunction":
        """Drop generators with zero weight, keeping order."""
        kept = tuple(g for g in self.support if self.weights[g])
        return WeightFunction(kept, {g: self.weights[g] for g in kept})

    def to_json(self) -> dict[str, str]:
        return {g: format_rational(w) for g, w in self.items()}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: Mapping[str, object]) -> "WeightFunction":
        weights: dict[str, Fraction] = {}
        for gen, raw in data.items():
            if isinstance(raw, bool) or not isinstance(raw, (str, int)):
                raise InvalidWeightsError(
                    f"Weight of {gen!r} must be a \"p/q\" string or an integer"
                )
            weights[gen] = parse_rational(str(raw))
        return cls.from_mapping(weights)

    @classmethod
    def loads(cls, text: str) -> "WeightFunction":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise InvalidWeightsError("Weight JSON must be an object")
        return cls.from_json(data)

    def __str__(self) -> str:
        return " ".join(f"{g}:{format_rational(w)}" for g, w in self.items())


def weight_combine(
    coefficients: Union[WeightFunction, Sequence[RationalLike]],
    rows: Sequence[WeightFunction],
) -> WeightFunction:
    """j -> sum_i coefficients_i * rows_i(j), exactly.

    Coefficients are taken in support order when given as a WeightFunction
    over an index set. The result's support is the union of the rows'
    supports in first-seen order.
    """
    if isinstance(coefficients, WeightFunction):
        lam = coefficients.values()
    else:
        lam = [Fraction(c) for c in coefficients]
        for i, c in enumerate(lam):
            _check_weight_range(str(i), c)
        if sum(lam, Fraction(0)) != 1:
            raise InvalidWeightsError("Combination coefficients must sum to 1")
    if len(lam) != len(rows):
        raise InvalidWeightsError(
            f"{len(lam)} coefficients for {len(rows)} rows"
        )
    combined: dict[str, Fraction] = {}
    for c, row in zip(lam, rows):
        for g, w in row.items():
            combined[g] = combined.get(g, Fraction(0)) + c * w
    return WeightFunction.from_mapping(combined)
