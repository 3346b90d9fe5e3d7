"""Arithmetic expressions over signed-digit streams, as typed on the command line.

    expr     := rational | name "(" expr ("," expr)* ")" | name "(" sequence ")"
    sequence := "[" [expr ("," expr)*] ";" expr "]"

A sequence lists a finite prefix followed by a tail element repeated
forever. Rational literals are "p" or "p/q" and must lie in [-1, 1].
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from . import sdstream
from .errors import ExpressionSyntaxError
from .exact_numbers import format_rational
from .lazy import LazySequence
from .sdstream import DigitStream

# operator -> (arity, takes a sequence argument)
OPERATORS: dict[str, tuple[int, bool]] = {
    "neg": (1, False),
    "mid": (2, False),
    "mul": (2, False),
    "cc": (3, False),
    "tadd": (2, False),
    "tsub": (2, False),
    "tdouble": (1, False),
    "bigmid": (1, True),
    "limit": (1, True),
}

_BINARY: dict[str, Callable[[DigitStream, DigitStream], DigitStream]] = {
    "mid": sdstream.mid,
    "mul": sdstream.mul,
    "tadd": sdstream.tadd,
    "tsub": sdstream.tsub,
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<decimal>[+\-−]?\d*\.\d+|[+\-−]?\d+\.)"
    r"|(?P<number>[+\-−]?\d+(?:\s*/\s*\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<punct>[()\[\],;]))"
)


@dataclass(frozen=True)
class Literal:
    value: Fraction
    position: int = 0


@dataclass(frozen=True)
class SequenceArg:
    prefix: tuple["Expression", ...]
    tail: "Expression"


@dataclass(frozen=True)
class Call:
    op: str
    args: tuple[Union["Expression", SequenceArg], ...]
    position: int = 0


Expression = Union[Literal, Call]


class _ExpressionParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        position = 0
        while True:
            match = _TOKEN_RE.match(text, position)
            if not match:
                break
            kind = match.lastgroup or ""
            if kind == "decimal":
                raise ExpressionSyntaxError(
                    "Decimal literals are not accepted; write p/q", match.start(kind), text
                )
            self.tokens.append((kind, match.group(kind), match.start(kind)))
            position = match.end()
        rest = text[position:]
        if rest.strip():
            raise ExpressionSyntaxError("Unexpected character", len(text) - len(rest.lstrip()), text)
        self.index = 0

    def _peek(self) -> tuple[str, str, int]:
        if self.index >= len(self.tokens):
            return "", "", len(self.text)
        return self.tokens[self.index]

    def _take(self, expected: str = "") -> tuple[str, str, int]:
        kind, token, position = self._peek()
        if not kind:
            raise ExpressionSyntaxError("Unexpected end of input", position, self.text)
        if expected and token != expected:
            raise ExpressionSyntaxError(f"Expected {expected!r}, found {token!r}", position, self.text)
        self.index += 1
        return kind, token, position

    def expression(self) -> Expression:
        kind, token, position = self._take()
        if kind == "number":
            value = Fraction(token.replace("−", "-").replace(" ", ""))
            if not -1 <= value <= 1:
                raise ExpressionSyntaxError(
                    f"Literal {format_rational(value)} lies outside [-1, 1]", position, self.text
                )
            return Literal(value, position)
        if kind != "name":
            raise ExpressionSyntaxError(f"Unexpected {token!r}", position, self.text)
        if token not in OPERATORS:
            raise ExpressionSyntaxError(f"Unknown operator {token!r}", position, self.text)
        arity, takes_sequence = OPERATORS[token]
        self._take("(")
        args: list[Union[Expression, SequenceArg]] = []
        if takes_sequence:
            args.append(self.sequence())
        else:
            args.append(self.expression())
            while self._peek()[1] == ",":
                self._take(",")
                args.append(self.expression())
        if len(args) != arity:
            raise ExpressionSyntaxError(
                f"{token} takes {arity} argument{'s' if arity > 1 else ''}, got {len(args)}",
                position,
                self.text,
            )
        self._take(")")
        return Call(token, tuple(args), position)

    def sequence(self) -> SequenceArg:
        self._take("[")
        prefix: list[Expression] = []
        if self._peek()[1] != ";":
            prefix.append(self.expression())
            while self._peek()[1] == ",":
                self._take(",")
                prefix.append(self.expression())
        self._take(";")
        tail = self.expression()
        self._take("]")
        return SequenceArg(tuple(prefix), tail)

    def parse(self) -> Expression:
        result = self.expression()
        _, token, position = self._peek()
        if token:
            raise ExpressionSyntaxError(f"Trailing input {token!r}", position, self.text)
        return result


def parse_expression(text: str) -> Expression:
    return _ExpressionParser(text).parse()


def evaluate_sequence(seq: SequenceArg) -> LazySequence[DigitStream]:
    prefix = [evaluate_expression(e) for e in seq.prefix]
    tail = evaluate_expression(seq.tail)
    return LazySequence(lambda i: prefix[i] if i < len(prefix) else tail)


def evaluate_expression(expr: Expression) -> DigitStream:
    """The stream an expression denotes."""
    if isinstance(expr, Literal):
        return sdstream.from_rational(expr.value)
    if expr.op in ("bigmid", "limit"):
        seq = expr.args[0]
        assert isinstance(seq, SequenceArg)
        elements = evaluate_sequence(seq)
        if expr.op == "limit":
            return sdstream.limit(elements)
        result = sdstream.bigmid(elements)
        known = [elements[i].known_value for i in range(len(seq.prefix) + 1)]
        if all(v is not None for v in known):
            # prefix then a constant tail: sum 2^-(i+1) v_i + 2^-n v_tail
            n = len(seq.prefix)
            result.known_value = sum(
                (Fraction(v, 1 << (i + 1)) for i, v in enumerate(known[:n])), Fraction(0)
            ) + Fraction(known[n], 1 << n)  # type: ignore[arg-type]
        return result
    args = [evaluate_expression(a) for a in expr.args]  # type: ignore[arg-type]
    if expr.op == "neg":
        return sdstream.neg(args[0])
    if expr.op == "tdouble":
        return sdstream.tdouble(args[0])
    if expr.op == "cc":
        return sdstream.cc(*args)
    return _BINARY[expr.op](*args)


def print_expression(expr: Union[Expression, SequenceArg]) -> str:
    if isinstance(expr, Literal):
        return format_rational(expr.value)
    if isinstance(expr, SequenceArg):
        prefix = ", ".join(print_expression(e) for e in expr.prefix)
        return f"[{prefix}; {print_expression(expr.tail)}]"
    return f"{expr.op}({', '.join(print_expression(a) for a in expr.args)})"


__all__ = [
    "Call",
    "Expression",
    "Literal",
    "OPERATORS",
    "SequenceArg",
    "evaluate_expression",
    "evaluate_sequence",
    "parse_expression",
    "print_expression",
]
