"""Numerical oracles shared by the tests."""

import math

import numpy as np


def gauss_legendre(lo: float, hi: float, n: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def richardson_sqrt(coarse: float, fine: float, coarse_steps: int, fine_steps: int) -> float:
    """Extrapolate to infinitely many steps assuming an error proportional to 1/sqrt(n)."""
    ratio = math.sqrt(fine_steps / coarse_steps)
    return (ratio * fine - coarse) / (ratio - 1.0)


def richardson_sqrt_error(coarse_se: float, fine_se: float, coarse_steps: int, fine_steps: int) -> float:
    """Standard error of ``richardson_sqrt`` for independent runs."""
    ratio = math.sqrt(fine_steps / coarse_steps)
    return math.hypot(ratio * fine_se, coarse_se) / (ratio - 1.0)
