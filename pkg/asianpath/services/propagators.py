"""Closed-form transition densities for the logreturn, its average and the control process.

Coordinates are logreturns measured from the start of the contract:
x = log(S_T / S_0), xbar = (1/T) int_0^T x(t) dt and y = log(S_Ty / S_0y).
"""

import logging
import math

import numpy as np

from asianpath.errors import DomainError, ParameterError
from asianpath.models import AssetDynamics, ControlDynamics, StatePoint
from asianpath.services.specialfn import log_std_normal_cdf, require_open_correlation, std_normal_cdf

logger = logging.getLogger(__name__)

AVERAGE_CORRELATION = math.sqrt(3.0) / 2.0


def _require_density_params(p: AssetDynamics):
    if p.sigma <= 0 or p.T <= 0:
        raise ParameterError(f"densities need sigma > 0 and T > 0 (got sigma={p.sigma}, T={p.T})")


def _require_control_params(c: ControlDynamics):
    if c.xi <= 0:
        raise ParameterError(f"densities need xi > 0 (got xi={c.xi})")
    require_open_correlation(c.rho)


def _result(values: np.ndarray):
    return values.item() if values.ndim == 0 else values


def terminal_moments(p: AssetDynamics, t: float):
    """Mean and variance of x_t."""
    if t <= 0:
        raise ParameterError(f"t must be positive (got {t})")
    return p.drift * t, p.sigma**2 * t


def average_moments(p: AssetDynamics, t: float):
    """Mean and variance of the running average xbar_t, and its correlation with x_t."""
    if t <= 0:
        raise ParameterError(f"t must be positive (got {t})")
    if t > p.T:
        raise ParameterError(f"t={t} beyond the horizon T={p.T}")
    return 0.5 * p.drift * t, p.sigma**2 * t / 3.0, AVERAGE_CORRELATION


def joint_density(p: AssetDynamics, s: StatePoint):
    """Density of (x_T, xbar_T): the propagator restricted to paths with a given average."""
    _require_density_params(p)
    x, xbar, _ = s.arrays()
    var = p.sigma**2 * p.T
    exponent = -((x - p.drift * p.T) ** 2) / (2.0 * var) - 6.0 * (xbar - 0.5 * x) ** 2 / var
    return _result(math.sqrt(3.0) / (math.pi * var) * np.exp(exponent))


def joint_density_gaussian(p: AssetDynamics, s: StatePoint):
    """The same density written as the bivariate Gaussian of (x_T, xbar_T).

    Built from the moments alone; agrees with ``joint_density`` by an
    algebraic identity and serves as its independent cross-check.
    """
    _require_density_params(p)
    x, xbar, _ = s.arrays()
    mean_x, var_x = terminal_moments(p, p.T)
    mean_a, var_a, corr = average_moments(p, p.T)
    u = (x - mean_x) / math.sqrt(var_x)
    v = (xbar - mean_a) / math.sqrt(var_a)
    one_minus = 1.0 - corr**2
    norm = 2.0 * math.pi * math.sqrt(var_x * var_a * one_minus)
    return _result(np.exp(-(u * u + v * v - 2.0 * corr * u * v) / (2.0 * one_minus)) / norm)


def _three_variable_density(p: AssetDynamics, c: ControlDynamics, dx, dy, avg_term, log_scale: float = 0.0):
    """Density at displacement (dx, dy) from the source, given (xbar - x/2)^2 as ``avg_term``.

    The result is multiplied by exp(log_scale) inside the exponential.
    """
    T = p.T
    rho = c.rho
    one_minus = 1.0 - rho * rho
    a = dx - p.drift * T
    b = dy - c.drift * T
    exponent = (
        rho * a * b / (p.sigma * c.xi * one_minus * T)
        - a * a / (2.0 * p.sigma**2 * one_minus * T)
        - b * b / (2.0 * c.xi**2 * one_minus * T)
        - 6.0 * avg_term / (p.sigma**2 * T)
        + log_scale
    )
    prefactor = math.sqrt(3.0 / (2.0 * math.pi**3 * T**3 * p.sigma**4 * c.xi**2 * one_minus))
    with np.errstate(over="ignore"):
        return prefactor * np.exp(exponent)


def two_process_density(p: AssetDynamics, c: ControlDynamics, s: StatePoint):
    """Density of (x_T, y_T, xbar_T) for correlated x and y without a barrier."""
    _require_density_params(p)
    _require_control_params(c)
    if s.y is None:
        raise ParameterError("two_process_density needs the y coordinate")
    x, xbar, y = s.arrays()
    return _result(_three_variable_density(p, c, x, y, (xbar - 0.5 * x) ** 2))


def mirror_source(p: AssetDynamics, c: ControlDynamics):
    """Starting point (x_S, y_S) of the image propagator and the log of its weight.

    The weight itself overflows a double for small xi; callers keep it in the
    exponent.
    """
    rho = c.rho
    y_b = c.y_barrier
    denom = 4.0 - 3.0 * rho * rho
    x_s = 2.0 * y_b / c.xi * rho * p.sigma / denom
    y_s = 2.0 * y_b
    exponent = 2.0 * y_b / (c.xi * denom) * (4.0 / c.xi * c.drift - 3.0 * rho / p.sigma * p.drift)
    return x_s, y_s, exponent


def mirror_average(x_s: float, x, xbar):
    """Average xbar_S assigned to the mirror paths ending at (x, xbar)."""
    x = np.asarray(x, dtype=float)
    xbar = np.asarray(xbar, dtype=float)
    disc = (x_s - x) ** 2 + 4.0 * xbar * (xbar - x)
    bad = disc < 0
    if np.any(bad):
        i = np.flatnonzero(np.broadcast_to(bad, disc.shape))[0]
        xf = np.broadcast_to(x, disc.shape).ravel()[i]
        af = np.broadcast_to(xbar, disc.shape).ravel()[i]
        raise DomainError("mirror average undefined: negative discriminant", x=float(xf), xbar=float(af))
    return 0.5 * (-(x_s - x) + np.sqrt(disc))


def barrier_density(p: AssetDynamics, c: ControlDynamics, s: StatePoint):
    """Density of (x_T, y_T, xbar_T) for paths whose y never reached the barrier.

    Built with the method of images: the free three-variable density minus
    the weighted density started from the mirror source. Vanishes on
    y = y_B and is zero above it. Exact at rho = 0; for rho != 0 it may dip
    below zero, which is logged rather than hidden.
    """
    _require_density_params(p)
    _require_control_params(c)
    if s.y is None:
        raise ParameterError("barrier_density needs the y coordinate")
    y_b = c.y_barrier
    if y_b <= 0:
        raise DomainError("barrier at or below the control spot", barrier=c.barrier, s0y=c.s0y)

    x, xbar, y = s.arrays()
    x, xbar, y = np.broadcast_arrays(x, xbar, y)
    below = y <= y_b
    x_s, y_s, log_weight = mirror_source(p, c)

    # Above the barrier the density is zero by construction; on it the two terms cancel.
    xbar_s = mirror_average(x_s, x[below], xbar[below])
    x_m = x[below] - x_s
    direct = _three_variable_density(p, c, x[below], y[below], (xbar[below] - 0.5 * x[below]) ** 2)
    image = _three_variable_density(p, c, x_m, y[below] - y_s, (xbar_s - 0.5 * x_m) ** 2, log_scale=log_weight)

    values = np.zeros(x.shape)
    values[below] = direct - image
    if c.rho != 0.0:
        negative = int(np.count_nonzero(values < 0))
        if negative:
            logger.warning("barrier density negative at %d of %d points (rho=%s)", negative, values.size, c.rho)
    return _result(values)


def survival_probability(c: ControlDynamics, T: float) -> float:
    """P(max_{t<=T} y_t < y_B) under continuous monitoring."""
    if c.xi <= 0 or T <= 0:
        raise ParameterError("survival probability needs xi > 0 and T > 0")
    y_b = c.y_barrier
    if y_b <= 0:
        return 0.0
    m = c.drift
    vol = c.xi * math.sqrt(T)
    log_reflected = 2.0 * y_b * m / c.xi**2 + log_std_normal_cdf((-y_b - m * T) / vol)
    return std_normal_cdf((y_b - m * T) / vol) - math.exp(log_reflected)
