"""Signed-digit streams: the interval object [-1, 1].

A stream s denotes val(s) = sum_i 2^-(i+1) * s_i with s_i in {-1, 0, +1}.
Streams are lazy and memoized (see `lazy.LazySequence`); every operation
here is productive with a bounded lookahead, documented per operation as
"n output digits force at most n + c input digits".

Two digit engines are used:

- `mid` is a carry automaton over integers (`_mid_digits`).
- Everything else is driven by `_emit`, which turns a sequence of
  shrinking dyadic enclosures of the target value into digits.

Streams built from rationals carry `known_value`, their exact value; the
operations whose value law is rational in their inputs propagate it, so
callers can compare against the rational oracle without deciding stream
equality.
"""

import logging
import threading
from fractions import Fraction
from itertools import count
from typing import Callable, Iterable, Iterator, Literal, Optional, Sequence, Union

import numpy as np

from .errors import ArityError, DigitParseError, RangeError, ToleranceError
from .exact_numbers import (
    DYADIC_ZERO,
    HALF,
    Dyadic,
    DyadicInterval,
    RationalLike,
    clip,
    confine,
    format_rational,
)
from .lazy import LazySequence, as_lazy
from .models import Ordering

Digit = Literal[-1, 0, 1]

DEFAULT_DIGITS = 64

# n output digits force at most n + LOOKAHEAD digits of each argument
MID_LOOKAHEAD = 2
DOUBLE_LOOKAHEAD = 3
BIGMID_LOOKAHEAD = 3  # also bounds how many elements are touched

_DIGIT_CHARS = {"+": 1, "0": 0, "-": -1, "−": -1}
_DIGIT_SYMBOLS = {1: "+", 0: "0", -1: "-"}

StreamSequence = Union[
    LazySequence["DigitStream"],
    Iterable["DigitStream"],
    Callable[[int], "DigitStream"],
]


class Precision:
    """An absolute error bound 2^-digits, digits >= 1."""

    __slots__ = ("digits",)

    def __init__(self, digits: int) -> None:
        if digits < 1:
            raise ToleranceError(f"Precision needs at least one digit, got {digits}")
        self.digits = digits

    @classmethod
    def parse(cls, text: str) -> "Precision":
        """Accepts "2^-n" or a bare "n"."""
        cleaned = text.strip().replace("−", "-").replace(" ", "")
        if cleaned.startswith("2^-"):
            cleaned = cleaned[3:]
        if not cleaned.isdigit():
            raise ToleranceError(f"Tolerance must look like 2^-n, got {text!r}")
        return cls(int(cleaned))

    @classmethod
    def from_tolerance(cls, tol: RationalLike) -> "Precision":
        """Smallest n with 2^-n <= tol."""
        tol = Fraction(tol)
        if tol <= 0:
            raise ToleranceError(f"Tolerance must be positive, got {format_rational(tol)}")
        n = 1
        while Fraction(1, 1 << n) > tol:
            n += 1
        return cls(n)

    @property
    def error_bound(self) -> Fraction:
        return Fraction(1, 1 << self.digits)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Precision) and other.digits == self.digits

    def __hash__(self) -> int:
        return hash(self.digits)

    def __str__(self) -> str:
        return f"2^-{self.digits}"

    def __repr__(self) -> str:
        return f"Precision({self.digits})"


def _digits_of(p: Union[Precision, int]) -> int:
    n = p.digits if isinstance(p, Precision) else int(p)
    if n < 1:
        raise ToleranceError(f"Precision needs at least one digit, got {n}")
    return n


class DigitStream:
    """A memoized total digit sequence denoting a point of [-1, 1]."""

    def __init__(
        self,
        digits: Union[Iterable[int], Callable[[int], int]],
        known_value: Optional[Fraction] = None,
    ) -> None:
        self._digits: LazySequence[int] = LazySequence(digits)
        # _sums[n] * 2^-n is the partial sum of the first n digits
        self._sums: list[int] = [0]
        self._sums_lock = threading.Lock()
        self.known_value = known_value

    def digit_at(self, index: int) -> int:
        return self._digits[index]

    def __getitem__(self, index: int) -> int:
        return self._digits[index]

    def __iter__(self) -> Iterator[int]:
        return iter(self._digits)

    def prefix(self, n: int) -> list[int]:
        return self._digits.take(n)

    @property
    def forced(self) -> int:
        """Number of digits materialized so far."""
        return self._digits.forced

    def partial_sum(self, n: int) -> Dyadic:
        """t_n = sum_{i<n} 2^-(i+1) * s_i."""
        with self._sums_lock:
            have = len(self._sums) - 1
        if have < n:
            digits = [self._digits[i] for i in range(have, n)]
            with self._sums_lock:
                # another thread may have extended the table meanwhile
                for i in range(len(self._sums) - 1, n):
                    self._sums.append(2 * self._sums[i] + digits[i - have])
        return Dyadic(self._sums[n], n)

    def approx_value(self, p: Union[Precision, int]) -> DyadicInterval:
        return approx_value(self, p)

    def __repr__(self) -> str:
        shown = print_digits(self, min(self.forced, 16))
        known = f", known_value={format_rational(self.known_value)}" if self.known_value is not None else ""
        return f"DigitStream({shown}...{known})"


def _check_range(r: Fraction) -> None:
    if not -1 <= r <= 1:
        raise RangeError(f"{format_rational(r)} is outside [-1, 1]")


def _rational_digits(r: Fraction) -> Iterator[int]:
    while True:
        d = 1 if r > HALF else -1 if r < -HALF else 0
        yield d
        r = 2 * r - d


def from_rational(r: RationalLike) -> DigitStream:
    """Canonical expansion: +1 if r > 1/2, -1 if r < -1/2, else 0; r <- 2r - d."""
    r = Fraction(r)
    _check_range(r)
    return DigitStream(_rational_digits(r), known_value=r)


def from_binary(bits: Iterable[int]) -> DigitStream:
    """Embed a {-1, 1} digit sequence (the binary representation of [-1, 1])."""

    def checked() -> Iterator[int]:
        for i, b in enumerate(bits):
            if b not in (-1, 1):
                raise RangeError(f"Binary digit {i} is {b}, expected -1 or 1")
            yield b

    return DigitStream(checked())


def random_stream(rng: np.random.Generator) -> DigitStream:
    """A seeded random stream, independent of the order digits are forced in."""
    own = np.random.default_rng(int(rng.integers(2**63)))
    return DigitStream(int(own.integers(-1, 2)) for _ in count())


def constant(d: int) -> DigitStream:
    """The stream d, d, d, ... (value d)."""
    return from_rational(d)


ZERO = constant(0)
ONE = constant(1)
MINUS_ONE = constant(-1)


def approx_value(s: DigitStream, p: Union[Precision, int]) -> DyadicInterval:
    """[t_n - 2^-n, t_n + 2^-n] clipped to [-1, 1]."""
    n = _digits_of(p)
    t = s.partial_sum(n)
    radius = Dyadic(1, n)
    return DyadicInterval(clip(t - radius), clip(t + radius))


def _emit(enclose: Callable[[int], tuple[Dyadic, Dyadic]]) -> Iterator[int]:
    """Digits of a value, given enclose(k) of width at most 2^-(k+1).

    Keeps the emitted partial sum E; the target always lies in
    [E - 2^-k, E + 2^-k] before digit k is chosen.
    """
    emitted = DYADIC_ZERO
    for k in count():
        lo, hi = enclose(k)
        if lo >= emitted:
            d = 1
        elif hi <= emitted:
            d = -1
        else:
            d = 0
        emitted = emitted + Dyadic(d, k + 1)
        yield d


def _mid_digits(x: DigitStream, y: DigitStream) -> Iterator[int]:
    # carry is 8 times the known part of the output remainder; |carry| <= 6.
    # Output digit k reads input digits up to k + 1.
    carry = 2 * (x[0] + y[0]) + (x[1] + y[1])
    for k in count():
        d = 1 if carry >= 2 else -1 if carry <= -2 else 0
        yield d
        carry = 2 * carry - 8 * d + x[k + 2] + y[k + 2]


def _combine_known(*values: Optional[Fraction]) -> bool:
    return all(v is not None for v in values)


def mid(x: DigitStream, y: DigitStream) -> DigitStream:
    """val = (val x + val y) / 2."""
    known = (x.known_value + y.known_value) / 2 if _combine_known(x.known_value, y.known_value) else None  # type: ignore[operator]
    return DigitStream(_mid_digits(x, y), known_value=known)


def neg(x: DigitStream) -> DigitStream:
    """Digitwise negation."""
    known = -x.known_value if x.known_value is not None else None
    return DigitStream((-d for d in x), known_value=known)


def tdouble(x: DigitStream) -> DigitStream:
    """val = Confine(2 * val x)."""

    def enclose(k: int) -> tuple[Dyadic, Dyadic]:
        inner = approx_value(x, k + DOUBLE_LOOKAHEAD)
        return clip(inner.lo.shift(1)), clip(inner.hi.shift(1))

    known = confine(2 * x.known_value) if x.known_value is not None else None
    return DigitStream(_emit(enclose), known_value=known)


def tadd(x: DigitStream, y: DigitStream) -> DigitStream:
    """val = Confine(val x + val y), computed as tdouble(mid(x, y))."""
    return tdouble(mid(x, y))


def tsub(x: DigitStream, y: DigitStream) -> DigitStream:
    """val = Confine(val x - val y)."""
    return tadd(x, neg(y))


def bigmid(xs: StreamSequence) -> DigitStream:
    """val = sum_i 2^-(i+1) * val x_i.

    Output digit k reads the first k + 3 digits of elements 0 .. k + 2.
    """
    seq = as_lazy(xs)

    def enclose(k: int) -> tuple[Dyadic, Dyadic]:
        n = k + BIGMID_LOOKAHEAD
        # sum_{i<n} 2^-(i+1) t_{i,n}, each t at exponent n, over 2^(2n)
        total = 0
        for i in range(n):
            t = seq[i].partial_sum(n)
            total += t.mantissa << (2 * n - 1 - i - t.exponent)
        centre = Dyadic(total, 2 * n)
        # element errors sum to < 2^-n, the untouched tail to 2^-n
        radius = Dyadic(1, n - 1)
        return centre - radius, centre + radius

    return DigitStream(_emit(enclose))


def m_n(xs: Sequence[DigitStream]) -> DigitStream:
    """m_0(x) = x; m_n(x_0, ..., x_n) = mid(x_0, m_{n-1}(x_1, ..., x_n))."""
    if not xs:
        raise ArityError("m_n needs at least one argument")
    result = xs[-1]
    for x in reversed(xs[:-1]):
        result = mid(x, result)
    return result


def _select(digit_map: dict[int, DigitStream], selector: DigitStream) -> LazySequence[DigitStream]:
    return LazySequence(digit_map[d] for d in selector)


def mul(x: DigitStream, y: DigitStream) -> DigitStream:
    """val = val x * val y, as bigmid over y's digits (-1 -> -x, 0 -> 0, 1 -> x)."""
    result = bigmid(_select({-1: neg(x), 0: ZERO, 1: x}, y))
    if _combine_known(x.known_value, y.known_value):
        result.known_value = x.known_value * y.known_value  # type: ignore[operator]
    return result


def cc(lam: DigitStream, x0: DigitStream, x1: DigitStream) -> DigitStream:
    """Binary convex combination: lam = -1 gives x0, lam = 1 gives x1."""
    result = bigmid(_select({-1: x0, 0: mid(x0, x1), 1: x1}, lam))
    if _combine_known(lam.known_value, x0.known_value, x1.known_value):
        a, b, t = x0.known_value, x1.known_value, lam.known_value
        result.known_value = a + (t + 1) / 2 * (b - a)  # type: ignore[operator]
    return result


def limit(alpha: StreamSequence) -> DigitStream:
    """Limit of a sequence with |alpha_{i+1} - alpha_i| <= 2^-(i+1).

    lim = 2 * bigmid(alpha_0, 2(alpha_1 - alpha_0), 4(alpha_2 - alpha_1), ...).
    The modulus is not checked; see `check_modulus`.
    """
    seq = as_lazy(alpha)

    def element(i: int) -> DigitStream:
        if i == 0:
            return seq[0]
        e = tsub(seq[i], seq[i - 1])
        for _ in range(i):
            e = tdouble(e)
        return e

    return tdouble(bigmid(LazySequence(element)))


def check_modulus(
    alpha: StreamSequence, depth: int, p: Union[Precision, int] = DEFAULT_DIGITS
) -> Optional[int]:
    """First i < depth where |alpha_{i+1} - alpha_i| > 2^-(i+1) is certain, or None."""
    seq = as_lazy(alpha)
    for i in range(depth):
        a, b = seq[i], seq[i + 1]
        if _combine_known(a.known_value, b.known_value):
            gap = abs(b.known_value - a.known_value)  # type: ignore[operator]
        else:
            ia, ib = approx_value(a, p), approx_value(b, p)
            gap = max(
                Fraction(0),
                (ib.lo - ia.hi).to_fraction(),
                (ia.lo - ib.hi).to_fraction(),
            )
        if gap > Fraction(1, 1 << (i + 1)):
            logging.debug(f"Modulus violated at index {i}: gap {format_rational(gap)}")
            return i
    return None


def compare(x: DigitStream, y: DigitStream, p: Union[Precision, int]) -> Ordering:
    """Compare values at precision p; never decides equality."""
    ix, iy = approx_value(x, p), approx_value(y, p)
    if ix.hi < iy.lo:
        return Ordering.LESS
    if ix.lo > iy.hi:
        return Ordering.GREATER
    return Ordering.INDISTINGUISHABLE


def distance_bound(x: DigitStream, y: DigitStream, p: Union[Precision, int]) -> Fraction:
    """A certified upper bound on |val x - val y|."""
    ix, iy = approx_value(x, p), approx_value(y, p)
    return max(ix.hi - iy.lo, iy.hi - ix.lo).to_fraction()


def parse_digits(text: str) -> DigitStream:
    """'+', '0', '-' (or U+2212) per digit; digits after the text are 0."""
    prefix: list[int] = []
    for position, char in enumerate(text):
        if char not in _DIGIT_CHARS:
            raise DigitParseError(f"Invalid digit {char!r}", position, text)
        prefix.append(_DIGIT_CHARS[char])
    value = sum((Fraction(d, 1 << (i + 1)) for i, d in enumerate(prefix)), Fraction(0))

    def digits() -> Iterator[int]:
        yield from prefix
        while True:
            yield 0

    return DigitStream(digits(), known_value=value)


def print_digits(s: DigitStream, n: int) -> str:
    """The first n digits as '+', '0', '-'."""
    return "".join(_DIGIT_SYMBOLS[d] for d in s.prefix(n))


__all__ = [
    "BIGMID_LOOKAHEAD",
    "DEFAULT_DIGITS",
    "DOUBLE_LOOKAHEAD",
    "Digit",
    "DigitStream",
    "MID_LOOKAHEAD",
    "MINUS_ONE",
    "ONE",
    "Precision",
    "ZERO",
    "approx_value",
    "bigmid",
    "cc",
    "check_modulus",
    "compare",
    "constant",
    "distance_bound",
    "from_binary",
    "from_rational",
    "limit",
    "m_n",
    "mid",
    "mul",
    "neg",
    "parse_digits",
    "print_digits",
    "random_stream",
    "tadd",
    "tdouble",
    "tsub",
]
