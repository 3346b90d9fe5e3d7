"""Pytest configuration and fixtures for interval-object tests."""

from fractions import Fraction

import numpy as np
import pytest

from interval_object import EuclideanBody, IntervalBody, LShapeFixture, SimplexBody

# Seed shared by all sampled tests; reports must be reproducible from it
SEED = 20240601


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for sampled inputs."""
    return np.random.default_rng(SEED)


@pytest.fixture
def interval() -> IntervalBody:
    """The interval body at 64 digits of precision."""
    return IntervalBody(64)


@pytest.fixture
def euclid2() -> EuclideanBody:
    """The unit max-norm ball in dimension 2."""
    return EuclideanBody(2, Fraction(1))


@pytest.fixture
def triangle() -> SimplexBody:
    """The 2-simplex on vertices v0, v1, v2."""
    return SimplexBody.of_dimension(2)


@pytest.fixture
def lshape() -> LShapeFixture:
    """The non-cancellative L-shaped midpoint set."""
    return LShapeFixture()
