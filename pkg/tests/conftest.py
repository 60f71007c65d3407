"""Shared fixtures and helper oracles for the test suite."""

import math

import numpy as np
import pytest

from mixlab.trigpoly import FiberedTrigPoly

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def circle_dist(a: float, b: float) -> float:
    """Distance on R/Z."""
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def mixing_example_roof() -> FiberedTrigPoly:
    """sin(2 pi y) + 2."""
    return FiberedTrigPoly.from_modes(
        {(0, 1): -0.5j, (0, -1): 0.5j, (0, 0): 2.0}, real=True
    )


def coboundary_roof(beta: float, const: float = 3.0) -> FiberedTrigPoly:
    """const + Re(e^{2 pi i beta} e_{1,1} - e_{0,1}).

    Equals u(f(x,y)) - u(x,y) + const for u = cos(2 pi y) and any skew
    shift with this beta.
    """
    w = np.exp(2j * np.pi * beta)
    return FiberedTrigPoly.from_modes(
        {
            (1, 1): 0.5 * w,
            (-1, -1): 0.5 * np.conj(w),
            (0, 1): -0.5,
            (0, -1): -0.5,
            (0, 0): const,
        },
        real=True,
    )


def skew_apply(alpha, beta, x, y):
    return (x + alpha) % 1.0, (y + x + beta) % 1.0


def birkhoff_oracle(alpha, beta, fn, x, y, n):
    """Direct float iteration of sum_{j<n} fn(x_j, y_j); independent of
    the library's phase accumulation."""
    total = 0.0
    for _ in range(n):
        total += fn(x, y)
        x, y = skew_apply(alpha, beta, x, y)
    return total


@pytest.fixture
def golden():
    return GOLDEN


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
