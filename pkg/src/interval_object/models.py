"""Data models and enums shared across modules."""

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional


class RatOp(str, Enum):
    """Exact binary operations on rationals."""

    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    MID = "mid"  # (a + b) / 2


class Ordering(str, Enum):
    """Outcome of comparing two streams at a finite precision."""

    LESS = "less"
    GREATER = "greater"
    INDISTINGUISHABLE = "indistinguishable"


class Suite(str, Enum):
    """Check suites runnable from the CLI."""

    AXIOMS = "axioms"  # idempotency, commutativity, transposition
    CANCELLATION = "cancellation"  # search for m(x,z) = m(y,z), x != y
    APPROX = "approx"  # prefix agreement bounds M agreement
    FLATTEN = "flatten"  # M_i M_j x_ij against the flattened sequence
    UNIVERSAL = "universal"  # interval-object and free-body universal maps


@dataclass
class CheckReport:
    """Result of a check suite."""

    suite: str
    body: str
    samples: int
    seed: int
    tolerance: str  # "2^-n"
    max_violation: dict[str, str] = field(default_factory=dict)  # property -> rational
    passed: bool = True
    counterexample: Optional[dict[str, Any]] = None
    # true when failing is the expected outcome (lshape cancellation)
    expected_failure: bool = False

    @property
    def succeeded(self) -> bool:
        """Whether the harness counts this report as a success."""
        return self.passed != self.expected_failure

    def to_json(self) -> dict[str, Any]:
        output: dict[str, Any] = {
            "suite": self.suite,
            "body": self.body,
            "samples": self.samples,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "max_violation": self.max_violation,
        }
        if self.counterexample is not None:
            output["counterexample"] = self.counterexample
        output["passed"] = self.passed
        output["expected_failure"] = self.expected_failure
        return output

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)
