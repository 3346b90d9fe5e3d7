"""
Interval Object - exact real arithmetic on [-1, 1] generated by midpoints.

Points of [-1, 1] are lazy signed-digit streams. The binary midpoint and
the infinitary midpoint M(x_0, x_1, ...) = sum 2^-(i+1) x_i generate the
arithmetic; terms over both operations, free midpoint-convex bodies and
their universal maps are built on top.

Example usage:
    from fractions import Fraction
    from interval_object import approx_value, from_rational, mul

    product = mul(from_rational(Fraction(1, 3)), from_rational(Fraction(1, 2)))
    print(approx_value(product, 50).format(50))
"""

from importlib.metadata import version

from .checks import run_check
from .convex_bodies import (
    ConvexBody,
    EuclideanBody,
    IntervalBody,
    LShapeFixture,
    SimplexBody,
    check_approximation,
    check_cancellation_probe,
    check_midpoint_axioms,
    iterate_coalgebra,
    parse_body,
)
from .errors import IntervalObjectError, ParseError
from .exact_numbers import Dyadic, DyadicInterval, WeightFunction, rat_arith, weight_combine
from .free_construction import (
    decompose,
    eta,
    extend_h,
    hom_from_interval,
    levels,
    to_term,
)
from .models import CheckReport, Ordering, RatOp, Suite
from .sdstream import (
    DigitStream,
    Precision,
    approx_value,
    bigmid,
    cc,
    from_rational,
    limit,
    mid,
    mul,
    neg,
    parse_digits,
    print_digits,
    tadd,
    tdouble,
    tsub,
)
from .term_algebra import (
    Leaf,
    NormalForm,
    Omega,
    Pair,
    evaluate,
    flatten_grid,
    normalize,
    parse_term,
    print_term,
    subst,
    weight,
)

__version__ = version("interval-object")

__all__ = [
    # Streams
    "DigitStream",
    "Precision",
    "approx_value",
    "bigmid",
    "cc",
    "from_rational",
    "limit",
    "mid",
    "mul",
    "neg",
    "parse_digits",
    "print_digits",
    "tadd",
    "tdouble",
    "tsub",
    # Exact numbers
    "Dyadic",
    "DyadicInterval",
    "WeightFunction",
    "rat_arith",
    "weight_combine",
    # Terms
    "Leaf",
    "NormalForm",
    "Omega",
    "Pair",
    "evaluate",
    "flatten_grid",
    "normalize",
    "parse_term",
    "print_term",
    "subst",
    "weight",
    # Bodies and checks
    "ConvexBody",
    "EuclideanBody",
    "IntervalBody",
    "LShapeFixture",
    "SimplexBody",
    "check_approximation",
    "check_cancellation_probe",
    "check_midpoint_axioms",
    "iterate_coalgebra",
    "parse_body",
    "run_check",
    # Free construction
    "decompose",
    "eta",
    "extend_h",
    "hom_from_interval",
    "levels",
    "to_term",
    # Models and errors
    "CheckReport",
    "IntervalObjectError",
    "Ordering",
    "ParseError",
    "RatOp",
    "Suite",
    # Version
    "__version__",
]
