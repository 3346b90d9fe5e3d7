"""Command-line interface for interval-object."""

import argparse
import json
import logging
import sys
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from . import __version__, sdstream
from .checks import DEFAULT_TOLERANCE, run_check
from .convex_bodies import ConvexBody, parse_body
from .errors import IntervalObjectError, ParseError
from .exact_numbers import WeightFunction, format_rational, parse_rational
from .expression import Call, SequenceArg, evaluate_expression, evaluate_sequence, parse_expression, print_expression
from .free_construction import levels, reconstruction_residual
from .models import Suite
from .sdstream import DEFAULT_DIGITS, Precision
from .term_algebra import evaluate, normalize, parse_term, print_term, weight

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

DEFAULT_LEVELS = 4

# global flags, accepted before or after the subcommand
GLOBAL_DEFAULTS: dict[str, Any] = {
    "json": False,
    "seed": 0,
    "digits": DEFAULT_DIGITS,
    "tol": str(Precision.from_tolerance(DEFAULT_TOLERANCE)),
    "verbose": False,
    "quiet": False,
}


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _natural(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _global_flags() -> argparse.ArgumentParser:
    flags = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    flags.add_argument("--json", action="store_true", help="Print machine-readable JSON")
    flags.add_argument("--seed", type=_natural, help="Seed for sampled inputs (default: 0)")
    flags.add_argument(
        "--digits", type=_positive_int, help=f"Output precision in digits (default: {DEFAULT_DIGITS})"
    )
    flags.add_argument("--tol", help="Tolerance as 2^-n (default: 2^-40)")
    flags.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging")
    flags.add_argument(
        "-q", "--quiet", action="store_true", help="Suppress progress bars and logging"
    )
    return flags


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    flags = _global_flags()
    parser = argparse.ArgumentParser(
        prog="interval-object",
        description="""\
Exact real arithmetic on the interval [-1, 1] with signed-digit streams.

Streams are generated by the binary midpoint and the infinitary midpoint
M(x_0, x_1, ...) = sum 2^-(i+1) x_i. Around them sit tools for terms over
both operations, free midpoint-convex bodies, and property check suites.
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[flags],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    eval_parser = commands.add_parser(
        "eval", parents=[flags], help="Evaluate an expression such as 'mul(1/3, 1/2)'"
    )
    eval_parser.add_argument("expression", help="Expression over neg, mid, mul, cc, tadd, tsub, tdouble, bigmid, limit")
    eval_parser.add_argument(
        "--check-modulus",
        type=_natural,
        metavar="N",
        help="For a top-level limit, check the modulus |a_(i+1) - a_i| <= 2^-(i+1) for i < N",
    )

    digits_parser = commands.add_parser("digits", parents=[flags], help="Convert rationals and digit strings")
    digits_parser.add_argument("direction", choices=["to", "from"], help="to: rational -> digits; from: digits -> enclosure")
    digits_parser.add_argument("payload", help="A rational p/q (to) or a digit string over + 0 - (from)")
    digits_parser.add_argument("-n", "--n", type=_positive_int, dest="count", help="Number of digits (default: --digits)")

    term_parser = commands.add_parser("term", parents=[flags], help="Weights, normal forms and values of terms")
    term_parser.add_argument("action", choices=["weight", "flatten", "eval"])
    term_parser.add_argument("file", type=Path, help="File with one term, '-' for stdin")
    term_parser.add_argument(
        "--levels", type=_positive_int, default=DEFAULT_LEVELS, help=f"Normal-form levels to print (default: {DEFAULT_LEVELS})"
    )
    term_parser.add_argument("--body", default="interval", help="Body descriptor (default: interval)")
    term_parser.add_argument("--assign", default="", help="Generator values, e.g. a=1,b=-1")

    decompose_parser = commands.add_parser(
        "decompose", parents=[flags], help="Dyadic levels of a weight function"
    )
    decompose_parser.add_argument("file", type=Path, help="Weight JSON such as {\"a\": \"1/3\", \"b\": \"2/3\"}, '-' for stdin")
    decompose_parser.add_argument(
        "--levels", type=_positive_int, default=20, help="Number of levels L (default: 20)"
    )

    check_parser = commands.add_parser("check", parents=[flags], help="Run a check suite")
    check_parser.add_argument("suite", choices=[s.value for s in Suite])
    check_parser.add_argument("--body", default="interval", help="interval, simplex:N, euclid:K:R or lshape")
    check_parser.add_argument("--samples", type=_positive_int, help="Number of samples (default: per suite)")

    return parser


def _read_source(path: Path) -> str:
    if str(path) == "-":
        return sys.stdin.read()
    return path.read_text(encoding="utf-8")


def _emit(args: argparse.Namespace, human: str, payload: Any) -> None:
    print(json.dumps(payload, indent=2) if args.json else human)


def _tolerance(args: argparse.Namespace) -> Fraction:
    return Precision.parse(args.tol).error_bound


def cmd_eval(args: argparse.Namespace) -> int:
    expr = parse_expression(args.expression)
    stream = evaluate_expression(expr)
    n = args.digits
    enclosure = sdstream.approx_value(stream, n)
    digits = sdstream.print_digits(stream, n)
    payload: dict[str, Any] = {
        "expression": print_expression(expr),
        "digits": n,
        "value": enclosure.format(n),
        "enclosure": enclosure.to_dict(),
        "stream": digits,
    }
    if stream.known_value is not None:
        payload["exact"] = format_rational(stream.known_value)

    exit_code = EXIT_OK
    if args.check_modulus is not None:
        if not (isinstance(expr, Call) and expr.op == "limit"):
            logging.error("--check-modulus needs a top-level limit(...) expression")
            return EXIT_USAGE
        seq = expr.args[0]
        assert isinstance(seq, SequenceArg)
        violated = sdstream.check_modulus(evaluate_sequence(seq), args.check_modulus, n)
        payload["modulus_violation"] = violated
        if violated is not None:
            logging.error(f"Modulus violated at index {violated}")
            exit_code = EXIT_CHECK_FAILED

    _emit(args, f"value: {payload['value']}\ndigits: {digits}", payload)
    return exit_code


def cmd_digits(args: argparse.Namespace) -> int:
    if args.direction == "to":
        n = args.digits if args.count is None else args.count
        r = parse_rational(args.payload)
        digits = sdstream.print_digits(sdstream.from_rational(r), n)
        _emit(args, digits, {"rational": format_rational(r), "digits": digits})
        return EXIT_OK
    stream = sdstream.parse_digits(args.payload)
    n = max(1, len(args.payload))
    enclosure = sdstream.approx_value(stream, n)
    _emit(
        args,
        f"[{enclosure.lo}, {enclosure.hi}]",
        {"digits": args.payload, "enclosure": enclosure.to_dict(), "value": enclosure.format(n)},
    )
    return EXIT_OK


def _parse_assignment(text: str, body: ConvexBody[Any]) -> dict[str, Any]:
    assignment: dict[str, Any] = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        gen, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"Assignment {item!r} is not of the form name=value", text.find(item), text)
        assignment[gen.strip()] = body.parse_point(value.strip())
    return assignment


def cmd_term(args: argparse.Namespace) -> int:
    term = parse_term(_read_source(args.file))
    if args.action == "weight":
        w = weight(term)
        _emit(args, str(w), w.to_json())
    elif args.action == "flatten":
        printed = [print_term(level) for level in normalize(term).take(args.levels)]
        _emit(args, "\n".join(printed), printed)
    else:
        body = parse_body(args.body, Precision.parse(args.tol).digits)
        result = evaluate(term, _parse_assignment(args.assign, body), body, _tolerance(args))
        point = body.format_point(result)
        _emit(args, point["value"] if isinstance(point, dict) and "value" in point else json.dumps(point), point)
    return EXIT_OK


def cmd_decompose(args: argparse.Namespace) -> int:
    lam = WeightFunction.loads(_read_source(args.file))
    seq = levels(lam)
    count = args.levels
    residual = reconstruction_residual(seq, count)
    bound = Fraction(1, 1 << count)
    output = {
        "source": lam.to_json(),
        "levels": [seq.level_at(l).to_json() for l in range(count)],
        "steps": [seq.steps_at(l) for l in range(count)],
        "residual": format_rational(residual),
        "bound": f"2^-{count}",
    }
    print(json.dumps(output, indent=2))
    if residual > bound:
        logging.error(f"Reconstruction residual {format_rational(residual)} exceeds 2^-{count}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    report = run_check(
        suite=args.suite,
        body_spec=args.body,
        samples=args.samples,
        seed=args.seed,
        tol=_tolerance(args),
        quiet=args.quiet,
    )
    print(report.dumps())
    if report.expected_failure:
        logging.info(f"Suite {report.suite} fails on {report.body}, as expected")
    return EXIT_OK if report.succeeded else EXIT_CHECK_FAILED


COMMANDS = {
    "eval": cmd_eval,
    "digits": cmd_digits,
    "term": cmd_term,
    "decompose": cmd_decompose,
    "check": cmd_check,
}


def main(argv: Optional[list[str]] = None) -> None:
    """Main entry point for the CLI."""
    parser = create_parser()
    args = parser.parse_args(argv)
    for name, default in GLOBAL_DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, default)

    if args.quiet:
        logging.disable(logging.CRITICAL)
    else:
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.INFO,
            format="%(asctime)s - %(levelname)s - %(message)s",
        )

    start_time = datetime.now()
    try:
        exit_code = COMMANDS[args.command](args)
    except (IntervalObjectError, json.JSONDecodeError) as e:
        logging.error(str(e))
        exit_code = EXIT_USAGE
    except OSError as e:
        logging.error(f"Cannot read input: {e}")
        exit_code = EXIT_USAGE

    compute_time = (datetime.now() - start_time).total_seconds()
    logging.debug(f"{args.command} finished in {compute_time:.2f} seconds")
    sys.exit(exit_code)


if __name__ == "__main__":
    main()
