"""Exception hierarchy for interval-object."""

from typing import Optional


class IntervalObjectError(Exception):
    """Base class for all errors raised by this package."""


class ExactArithmeticError(IntervalObjectError, ArithmeticError):
    """An exact operation has no exact result (e.g. a non-dyadic Dyadic)."""


class DivisionByZeroError(ExactArithmeticError, ZeroDivisionError):
    """Exact division by zero."""


class RangeError(IntervalObjectError, ValueError):
    """A value lies outside the carrier it was meant for."""


class ArityError(IntervalObjectError, ValueError):
    """An operation got fewer arguments than it needs (m_n, approx_M, an empty cycle)."""


class InvalidWeightsError(IntervalObjectError, ValueError):
    """Weights outside [0, 1], not summing to 1, or with duplicated generators."""


class UnknownGeneratorError(IntervalObjectError, KeyError):
    """A generator was referenced that the universe or substitution lacks."""

    def __str__(self) -> str:
        # KeyError would repr() the message
        return str(self.args[0]) if self.args else ""


class ToleranceError(IntervalObjectError, ValueError):
    """A tolerance was not strictly positive."""


class BodySpecError(IntervalObjectError, ValueError):
    """A body descriptor string could not be understood."""


class UnknownSuiteError(IntervalObjectError, ValueError):
    """A check suite name is not known."""


class ParseError(IntervalObjectError, ValueError):
    """Base class for all text-parsing errors, carrying a source position."""

    def __init__(
        self,
        message: str,
        position: int = 0,
        text: Optional[str] = None,
    ) -> None:
        self.position = position
        self.line, self.column = _line_column(text or "", position)
        super().__init__(f"{message} (line {self.line}, column {self.column})")


class DigitParseError(ParseError):
    """Invalid character in a signed-digit string."""


class RationalParseError(ParseError):
    """Malformed rational literal."""


class TermSyntaxError(ParseError):
    """Malformed term text."""


class ExpressionSyntaxError(ParseError):
    """Malformed CLI expression."""


def _line_column(text: str, position: int) -> tuple[int, int]:
    """1-based line and column of a 0-based offset into text."""
    before = text[:position]
    line = before.count("\n") + 1
    column = position - (before.rfind("\n") + 1) + 1
    return line, column
