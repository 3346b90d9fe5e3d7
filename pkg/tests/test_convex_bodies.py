"""Tests for the body contract, its instances and the check suites."""

from fractions import Fraction
from typing import Any

import numpy as np
import pytest

from interval_object import sdstream
from interval_object.convex_bodies import (
    ConvexBody,
    EuclideanBody,
    IntervalBody,
    LShapeFixture,
    SimplexBody,
    check_approximation,
    check_cancellation_probe,
    check_midpoint_axioms,
    check_unfolding,
    iterate_coalgebra,
    m_n,
    parse_body,
)
from interval_object.errors import ArityError, BodySpecError, RangeError, ToleranceError
from interval_object.exact_numbers import WeightFunction
from interval_object.lazy import LazySequence
from interval_object.sdstream import approx_value

from .conftest import SEED

TOL = Fraction(1, 1 << 30)


class TestParseBody:
    """Tests for body descriptors."""

    @pytest.mark.parametrize(
        "spec,kind,name",
        [
            ("interval", IntervalBody, "interval"),
            ("simplex:3", SimplexBody, "simplex:3"),
            ("euclid:2:1/2", EuclideanBody, "euclid:2:1/2"),
            ("euclid:3", EuclideanBody, "euclid:3:1"),
            ("lshape", LShapeFixture, "lshape"),
        ],
    )
    def test_valid(self, spec: str, kind: type, name: str) -> None:
        """Test each descriptor form."""
        body = parse_body(spec)
        assert isinstance(body, kind)
        assert str(body) == name

    @pytest.mark.parametrize(
        "spec",
        ["cube", "simplex:x", "simplex:-1", "euclid:0:1", "euclid:2:0", "interval:3", "euclid:2:abc", ""],
    )
    def test_invalid(self, spec: str) -> None:
        """Test that bad descriptors raise BodySpecError."""
        with pytest.raises(BodySpecError):
            parse_body(spec)

    def test_simplex_vertices(self) -> None:
        """Test vertex naming and diameter."""
        body = SimplexBody.of_dimension(3)
        assert body.vertices == ("v0", "v1", "v2", "v3")
        assert body.diameter == 1


class TestPoints:
    """Tests for point parsing and validation."""

    def test_euclid(self, euclid2: EuclideanBody) -> None:
        """Test component parsing and the radius check."""
        x = euclid2.parse_point("1/2:-1")
        assert euclid2.format_point(x) == ["1/2", "-1"]
        with pytest.raises(RangeError):
            euclid2.point([Fraction(3, 2), 0])
        with pytest.raises(RangeError):
            euclid2.point([0])

    def test_simplex(self, triangle: SimplexBody) -> None:
        """Test vertex names and barycentric weights."""
        assert triangle.parse_point("v1") == WeightFunction.dirac("v1")
        w = triangle.parse_point("v0=1/2;v2=1/2")
        assert w == WeightFunction.from_mapping({"v0": Fraction(1, 2), "v2": Fraction(1, 2)})
        with pytest.raises(RangeError):
            triangle.parse_point("v7=1")

    def test_lshape(self, lshape: LShapeFixture) -> None:
        """Test that points off the L are rejected."""
        assert lshape.parse_point("1:1/4") == (Fraction(1), Fraction(1, 4))
        with pytest.raises(RangeError):
            lshape.point(Fraction(1, 2), Fraction(1, 2))

    def test_interval(self, interval: IntervalBody) -> None:
        """Test rational points and their rendering."""
        x = interval.parse_point("1/3")
        rendered = interval.format_point(x)
        assert rendered["exact"] == "1/3"
        assert rendered["value"].endswith("± 2^-64")


class TestMidpoints:
    """Tests for the binary and finite midpoints."""

    def test_lshape_counterexample(self, lshape: LShapeFixture) -> None:
        """Test the documented failure of cancellation on the L."""
        x, y, z = lshape.point(1, Fraction(1, 4)), lshape.point(1, Fraction(3, 4)), lshape.point(Fraction(1, 2), 1)
        assert lshape.mid(x, z) == lshape.mid(y, z) == (Fraction(3, 4), Fraction(1))
        assert x != y

    def test_m_n_is_right_nested(self, euclid2: EuclideanBody) -> None:
        """Test m_n against the closed form sum 2^-(i+1) x_i + 2^-n x_n."""
        xs = [euclid2.point([Fraction(k, 4), 0]) for k in (1, -1, 3, 2)]
        expected = xs[0] / 2 + xs[1] / 4 + xs[2] / 8 + xs[3] / 8
        assert euclid2.distance(m_n(euclid2, xs), expected) == 0

    def test_m_n_empty(self, euclid2: EuclideanBody) -> None:
        """Test that m_n needs a point."""
        with pytest.raises(ArityError):
            m_n(euclid2, [])

    def test_depth_for(self, euclid2: EuclideanBody, triangle: SimplexBody) -> None:
        """Test the truncation depth for a tolerance."""
        assert euclid2.depth_for(Fraction(1, 1024)) == 11
        assert triangle.depth_for(Fraction(1, 1024)) == 10
        with pytest.raises(ToleranceError):
            euclid2.depth_for(Fraction(0))

    @pytest.mark.parametrize("n", [1, 5, 12])
    def test_approx_m_bound(self, n: int, euclid2: EuclideanBody, rng: np.random.Generator) -> None:
        """Test |approx_M at depth n - M| <= 2^-n * diameter on periodic sequences."""
        for _ in range(10):
            cycle = [euclid2.sample(rng) for _ in range(int(rng.integers(1, 4)))]
            seq = LazySequence(lambda i, cycle=cycle: cycle[i % len(cycle)])
            truncated = euclid2.approx_M(seq.take(n))
            exact = euclid2.big_mid(seq, Fraction(1, 1 << 50))
            assert euclid2.distance(truncated, exact) <= euclid2.diameter / (1 << n) + Fraction(1, 1 << 50)

    def test_approx_m_needs_points(self, triangle: SimplexBody) -> None:
        """Test that the depth cannot exceed the prefix."""
        with pytest.raises(ArityError):
            triangle.approx_M([triangle.center], depth=2)

    @pytest.mark.parametrize("n", [0, 1, 6, 30])
    def test_fold_matches_nested_midpoints(self, n: int, interval: IntervalBody, rng: np.random.Generator) -> None:
        """Test the one-step fold against right-nested mid, with and without known values."""
        rational = [interval.sample(rng) for _ in range(n + 1)]
        nested = sdstream.m_n(rational)
        assert interval.fold(rational).known_value == nested.known_value
        digits = [sdstream.random_stream(rng) for _ in range(n + 1)]
        folded = interval.fold(digits)
        assert folded.known_value is None or n == 0
        assert sdstream.distance_bound(folded, sdstream.m_n(digits), 50) <= Fraction(1, 1 << 47)

    def test_fold_in_linear_bodies(self, euclid2: EuclideanBody, triangle: SimplexBody, rng: np.random.Generator) -> None:
        """Test the closed-form folds against repeated midpoints."""
        for body in (euclid2, triangle):
            points = [body.sample(rng) for _ in range(5)]
            nested = body.mid(points[0], body.mid(points[1], body.mid(points[2], body.mid(points[3], points[4]))))
            assert body.distance(m_n(body, points), nested) == 0

    def test_interval_big_mid_is_exact(self, interval: IntervalBody) -> None:
        """Test M over 1, -1, 0, 0, ... in the interval body."""
        points = [sdstream.ONE, sdstream.MINUS_ONE]
        result = interval.big_mid(lambda i: points[i] if i < 2 else sdstream.ZERO, TOL)
        assert approx_value(result, 40).contains(Fraction(1, 4))


class TestIterateCoalgebra:
    """Tests for solutions of coalgebras."""

    def test_alternating_interval(self, interval: IntervalBody) -> None:
        """Test head alternating 1, -1: the solution is 1/3."""
        result = iterate_coalgebra(
            interval,
            head=lambda s: sdstream.ONE if s == 0 else sdstream.MINUS_ONE,
            tail=lambda s: 1 - s,
            s0=0,
            tol=TOL,
        )
        assert approx_value(result, 40).contains(Fraction(1, 3))

    def test_alternating_plane(self, euclid2: EuclideanBody) -> None:
        """Test head alternating e0, e1: the solution is (2/3, 1/3)."""
        units = [euclid2.point([1, 0]), euclid2.point([0, 1])]
        result = iterate_coalgebra(euclid2, lambda s: units[s], lambda s: 1 - s, 0, TOL)
        assert euclid2.distance(result, euclid2.point([Fraction(2, 3), Fraction(1, 3)])) <= TOL

    def test_counter_state(self, triangle: SimplexBody) -> None:
        """Test an unbounded state space: head(n) = v0 for n = 0, else v1."""
        result = iterate_coalgebra(
            triangle,
            head=lambda n: WeightFunction.dirac("v0" if n == 0 else "v1"),
            tail=lambda n: n + 1,
            s0=0,
            tol=TOL,
        )
        expected = WeightFunction.from_mapping({"v0": Fraction(1, 2), "v1": Fraction(1, 2)})
        assert triangle.distance(result, expected) <= TOL

    def test_bad_tolerance(self, euclid2: EuclideanBody) -> None:
        """Test that a non-positive tolerance is rejected."""
        with pytest.raises(ToleranceError):
            iterate_coalgebra(euclid2, lambda s: euclid2.center, lambda s: s, 0, Fraction(-1))


BODIES = [IntervalBody(64), SimplexBody.of_dimension(3), EuclideanBody(2, Fraction(1))]


class TestProbes:
    """Tests for the axiom, unfolding, cancellation and approximation suites."""

    @pytest.mark.parametrize("body", BODIES, ids=str)
    def test_axioms_exact(self, body: ConvexBody[Any]) -> None:
        """Test that the exact bodies satisfy the axioms with zero violation."""
        report = check_midpoint_axioms(body, samples=200, seed=SEED)
        assert report.passed, f"Violations: {report.max_violation}"
        assert set(report.max_violation.values()) == {"0"}

    def test_axioms_lshape(self, lshape: LShapeFixture) -> None:
        """Test that the L still satisfies the axioms."""
        assert check_midpoint_axioms(lshape, samples=200, seed=SEED).passed

    def test_cancellation_lshape(self, lshape: LShapeFixture) -> None:
        """Test that the cancellation check finds a counterexample within 1000 samples."""
        report = check_cancellation_probe(lshape, samples=1000, seed=SEED)
        assert not report.passed
        assert report.counterexample is not None
        assert report.counterexample["sample"] <= 1000
        x = lshape.parse_point(":".join(report.counterexample["x"]))
        y = lshape.parse_point(":".join(report.counterexample["y"]))
        z = lshape.parse_point(":".join(report.counterexample["z"]))
        assert x != y
        assert lshape.mid(x, z) == lshape.mid(y, z)

    @pytest.mark.parametrize("body", BODIES, ids=str)
    def test_cancellation_holds(self, body: ConvexBody[Any]) -> None:
        """Test that cancellative bodies yield no counterexample."""
        report = check_cancellation_probe(body, samples=2000, seed=SEED)
        assert report.passed
        assert report.counterexample is None
        assert report.samples == 2000

    @pytest.mark.parametrize("body", [*BODIES, LShapeFixture()], ids=str)
    def test_unfolding(self, body: ConvexBody[Any]) -> None:
        """Test M(x) = mid(x_0, M(tail x)) on 200 eventually periodic sequences."""
        report = check_unfolding(body, samples=200, seed=SEED)
        assert report.passed, f"Violations: {report.max_violation}"

    def test_lshape_is_iterative_but_not_cancellative(self, lshape: LShapeFixture) -> None:
        """Test that the L passes the axiom and unfolding suites and fails cancellation."""
        assert check_midpoint_axioms(lshape, samples=200, seed=SEED).passed
        assert check_unfolding(lshape, samples=200, seed=SEED).passed
        assert not check_cancellation_probe(lshape, samples=1000, seed=SEED).passed

    def test_approximation_of_third(self, interval: IntervalBody) -> None:
        """Test two digit expansions of 1/3, 0+0+... and +-+-..., as point sequences."""
        canonical = sdstream.from_rational(Fraction(1, 3))
        xs = LazySequence(lambda i: sdstream.constant(canonical[i]))
        ys = LazySequence(lambda i: sdstream.ONE if i % 2 == 0 else sdstream.MINUS_ONE)
        report = check_approximation(interval, [(xs, ys)], n_max=20, seed=SEED)
        assert report.passed, f"Violations: {report.max_violation}"
        for seq in (xs, ys):
            assert approx_value(interval.big_mid(seq, TOL), 40).contains(Fraction(1, 3))

    def test_approximation(self, euclid2: EuclideanBody, rng: np.random.Generator) -> None:
        """Test the prefix-agreement bound on sequences sharing a prefix."""
        pairs = []
        for shared in range(4):
            prefix = [euclid2.sample(rng) for _ in range(shared)]
            x_tail, y_tail = euclid2.sample(rng), euclid2.sample(rng)
            xs = LazySequence(lambda i, p=prefix, t=x_tail: p[i] if i < len(p) else t)
            ys = LazySequence(lambda i, p=prefix, t=y_tail: p[i] if i < len(p) else t)
            pairs.append((xs, ys))
        report = check_approximation(euclid2, pairs, n_max=10, seed=SEED)
        assert report.passed, f"Violations: {report.max_violation}"
        assert report.samples == 4

    def test_reports_are_deterministic(self, triangle: SimplexBody) -> None:
        """Test that equal seeds give equal reports."""
        first = check_midpoint_axioms(triangle, samples=50, seed=7).dumps()
        second = check_midpoint_axioms(triangle, samples=50, seed=7).dumps()
        assert first == second
