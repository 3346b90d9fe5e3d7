"""Tests for exact rationals, dyadics and weight functions."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from interval_object.errors import (
    DivisionByZeroError,
    ExactArithmeticError,
    IntervalObjectError,
    InvalidWeightsError,
    RangeError,
    RationalParseError,
)
from interval_object.exact_numbers import (
    Dyadic,
    DyadicInterval,
    WeightFunction,
    confine,
    decimal_string,
    format_rational,
    is_dyadic,
    mid,
    parse_rational,
    rat_arith,
    weight_combine,
)
from interval_object.models import RatOp

rationals = st.fractions(min_value=-10, max_value=10, max_denominator=1000)


class TestRationals:
    """Tests for parsing, formatting and exact arithmetic."""

    @pytest.mark.parametrize(
        "text,expected",
        [
            ("1/3", Fraction(1, 3)),
            ("-1/2", Fraction(-1, 2)),
            ("−1/2", Fraction(-1, 2)),
            (" 3 ", Fraction(3)),
            ("+2/4", Fraction(1, 2)),
        ],
    )
    def test_parse_rational(self, text: str, expected: Fraction) -> None:
        """Test the p/q literal forms."""
        assert parse_rational(text) == expected

    @pytest.mark.parametrize("text", ["0.5", "abc", "1/", "", "1/0"])
    def test_parse_rational_rejects(self, text: str) -> None:
        """Test that malformed literals and zero denominators are rejected."""
        with pytest.raises(RationalParseError):
            parse_rational(text)

    def test_parse_error_position(self) -> None:
        """Test that the error points at the offending character."""
        with pytest.raises(RationalParseError) as info:
            parse_rational("1/0")
        assert info.value.column == 3, f"Column was {info.value.column}"

    @given(rationals)
    def test_format_parse_roundtrip(self, q: Fraction) -> None:
        """Test that format_rational is inverse to parse_rational."""
        assert parse_rational(format_rational(q)) == q

    def test_examples(self) -> None:
        """Test the documented arithmetic examples."""
        assert rat_arith(Fraction(1, 3), Fraction(1, 6), RatOp.ADD) == Fraction(1, 2)
        assert mid(Fraction(1, 3), Fraction(2, 3)) == Fraction(1, 2)
        assert rat_arith(Fraction(-1), Fraction(1), RatOp.MUL) == Fraction(-1)

    def test_division_by_zero(self) -> None:
        """Test that exact division by zero raises a dedicated error."""
        with pytest.raises(DivisionByZeroError):
            rat_arith(Fraction(1), Fraction(0), RatOp.DIV)
        # also a builtin ZeroDivisionError
        with pytest.raises(ZeroDivisionError):
            rat_arith(Fraction(1), Fraction(0), RatOp.DIV)

    def test_unknown_operation(self) -> None:
        """Test that an unknown operation raises a package error."""
        with pytest.raises(IntervalObjectError):
            rat_arith(Fraction(1), Fraction(2), "pow")  # type: ignore[arg-type]

    @given(rationals, rationals)
    def test_mid_is_average(self, a: Fraction, b: Fraction) -> None:
        """Test mid against the rational average."""
        assert mid(a, b) == (a + b) / 2
        assert mid(a, b) == mid(b, a)

    @pytest.mark.parametrize(
        "q,expected",
        [(Fraction(3, 2), Fraction(1)), (Fraction(-5), Fraction(-1)), (Fraction(1, 3), Fraction(1, 3))],
    )
    def test_confine(self, q: Fraction, expected: Fraction) -> None:
        """Test clamping to [-1, 1]."""
        assert confine(q) == expected

    def test_decimal_string(self) -> None:
        """Test rounding to a fixed number of decimal places."""
        assert decimal_string(Fraction(1, 3), 4) == "0.3333"
        assert decimal_string(Fraction(-1, 8), 2) == "-0.12"
        assert decimal_string(Fraction(0), 3) == "0.000"


class TestDyadic:
    """Tests for the dyadic rationals."""

    def test_normalization(self) -> None:
        """Test that equal values get equal representations."""
        assert Dyadic(2, 2) == Dyadic(1, 1)
        assert Dyadic(0, 7) == Dyadic(0)
        assert Dyadic(3, -2) == Dyadic(12)

    @given(st.integers(-1000, 1000), st.integers(0, 20), st.integers(-1000, 1000), st.integers(0, 20))
    def test_arithmetic_matches_fractions(self, m1: int, e1: int, m2: int, e2: int) -> None:
        """Test add, sub and ordering against Fraction."""
        a, b = Dyadic(m1, e1), Dyadic(m2, e2)
        fa, fb = Fraction(m1, 1 << e1), Fraction(m2, 1 << e2)
        assert (a + b).to_fraction() == fa + fb
        assert (a - b).to_fraction() == fa - fb
        assert (a < b) == (fa < fb)
        assert (a <= b) == (fa <= fb)
        assert a.shift(-3).to_fraction() == fa / 8

    def test_from_fraction(self) -> None:
        """Test conversion from dyadic and non-dyadic fractions."""
        assert Dyadic.from_fraction(Fraction(3, 8)) == Dyadic(3, 3)
        with pytest.raises(ExactArithmeticError):
            Dyadic.from_fraction(Fraction(1, 3))
        assert is_dyadic(Fraction(5, 16))
        assert not is_dyadic(Fraction(1, 6))

    def test_interval(self) -> None:
        """Test enclosure membership, width and formatting."""
        enclosure = DyadicInterval(Dyadic(1, 2), Dyadic(3, 2))
        assert enclosure.contains(Fraction(1, 2))
        assert not enclosure.contains(Fraction(1))
        assert enclosure.width == Fraction(1, 2)
        assert enclosure.midpoint == Fraction(1, 2)
        assert enclosure.format(8).endswith("± 2^-8")
        with pytest.raises(RangeError):
            DyadicInterval(Dyadic(1), Dyadic(0))


class TestWeightFunction:
    """Tests for validated weight functions."""

    def test_valid(self) -> None:
        """Test construction and lookups."""
        w = WeightFunction.from_mapping({"a": Fraction(1, 3), "b": Fraction(2, 3)})
        assert w["a"] == Fraction(1, 3)
        assert w["z"] == 0
        assert list(w) == ["a", "b"]
        assert str(w) == "a:1/3 b:2/3"

    @pytest.mark.parametrize(
        "weights",
        [
            {"a": Fraction(1, 2)},
            {"a": Fraction(3, 2), "b": Fraction(-1, 2)},
            {},
        ],
    )
    def test_invalid(self, weights: dict[str, Fraction]) -> None:
        """Test that bad sums and out-of-range weights are rejected."""
        with pytest.raises(InvalidWeightsError):
            WeightFunction.from_mapping(weights)

    def test_equality_ignores_order_and_zeros(self) -> None:
        """Test that support order and zero weights are immaterial."""
        w = WeightFunction.from_mapping({"a": Fraction(1, 2), "b": Fraction(1, 2)})
        v = WeightFunction.from_mapping({"b": Fraction(1, 2), "c": Fraction(0), "a": Fraction(1, 2)})
        assert w == v
        assert hash(w) == hash(v)
        assert v.restrict_support().support == ("b", "a")

    def test_json_roundtrip(self) -> None:
        """Test the {generator: "p/q"} JSON form."""
        w = WeightFunction.from_mapping({"a": Fraction(1, 3), "b": Fraction(2, 3)})
        assert w.to_json() == {"a": "1/3", "b": "2/3"}
        assert WeightFunction.loads(w.dumps()) == w
        with pytest.raises(InvalidWeightsError):
            WeightFunction.loads('{"a": 0.5, "b": 0.5}')

    def test_combine_diracs(self) -> None:
        """Test that averaging two Diracs gives the uniform weight."""
        combined = weight_combine(
            [Fraction(1, 2), Fraction(1, 2)],
            [WeightFunction.dirac("a"), WeightFunction.dirac("b")],
        )
        assert combined == WeightFunction.uniform(["a", "b"])

    def test_combine_validates(self) -> None:
        """Test that coefficients must form a weight of matching length."""
        rows = [WeightFunction.dirac("a"), WeightFunction.dirac("b")]
        with pytest.raises(InvalidWeightsError):
            weight_combine([Fraction(1, 2), Fraction(1, 3)], rows)
        with pytest.raises(InvalidWeightsError):
            weight_combine([Fraction(1)], rows)

    def test_dyadic(self) -> None:
        """Test the dyadic predicate on weights."""
        assert WeightFunction.uniform(["a", "b", "c", "d"]).is_dyadic()
        assert not WeightFunction.uniform(["a", "b", "c"]).is_dyadic()
