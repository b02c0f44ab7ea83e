"""Table-producing experiments shared by the command line and the HTTP API."""

import logging
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel

from asianpath.errors import ConfigurationError, DomainError, ParameterError
from asianpath.models import AssetDynamics, ControlDynamics, McConfig, OptionSpec, StatePoint
from asianpath.services import montecarlo, pricers
from asianpath.services.propagators import barrier_density, joint_density
from asianpath.services.specialfn import require_open_correlation

logger = logging.getLogger(__name__)

ASSET_PARAMS = ("s0", "sigma", "T")
CONTROL_PARAMS = ("s0y", "barrier", "xi")
SPEC_PARAMS = ("strike",)
SWEEPABLE = ASSET_PARAMS + CONTROL_PARAMS + SPEC_PARAMS

AXES = ("x", "xbar", "y")


def _with(model: BaseModel, **changes) -> BaseModel:
    """Copy of a frozen model with ``changes`` applied and validated."""
    return type(model).model_validate({**model.model_dump(), **changes})


def sweep_values(start: float, stop: float, points: int) -> np.ndarray:
    if points < 1:
        raise ParameterError(f"points must be at least 1 (got {points})")
    if points == 1:
        return np.array([start])
    if not stop > start:
        raise ParameterError(f"sweep range must be increasing (from {start} to {stop})")
    return np.linspace(start, stop, points)


def run_sweep(
    p: AssetDynamics,
    c: Optional[ControlDynamics],
    spec: OptionSpec,
    cfg: McConfig,
    param: str,
    start: float,
    stop: float,
    points: int,
    rhos: Optional[Sequence[float]] = None,
) -> list[dict]:
    """Closed-form and Monte Carlo prices along one parameter, one row per (value, rho)."""
    if param not in SWEEPABLE:
        raise ParameterError(f"cannot sweep {param!r}; choose one of {', '.join(SWEEPABLE)}")
    if c is None and (param in CONTROL_PARAMS or rhos):
        raise ConfigurationError(f"sweeping {param} over rho needs control dynamics")
    values = sweep_values(start, stop, points)
    rhos = list(rhos) if rhos else [c.rho if c is not None else 0.0]

    rows = []
    for value in values:
        value = float(value)
        for rho in rhos:
            p_i, c_i, spec_i = p, c, spec
            if param in ASSET_PARAMS:
                p_i = _with(p, **{param: value})
            elif param in SPEC_PARAMS:
                spec_i = _with(spec, **{param: value})
            if c_i is not None:
                c_i = _with(c_i, rho=rho, **({param: value} if param in CONTROL_PARAMS else {}))

            analytic = pricers.price(p_i, c_i, spec_i).value if spec.kind.is_call else None
            estimate = montecarlo.mc_price(p_i, c_i, spec_i, cfg)
            rows.append({
                "param_value": value,
                "rho": float(rho),
                "analytic_value": analytic,
                "mc_value": estimate.value,
                "mc_std_error": estimate.std_error,
            })
            logger.debug("sweep %s=%s rho=%s: analytic=%s mc=%s", param, value, rho, analytic, estimate.value)
    return rows


def run_histogram(p: AssetDynamics, c: ControlDynamics, cfg: McConfig, bins: int):
    """Histogram rows of the simulated and approximate averages, and their L1 distance."""
    exact, approx = montecarlo.average_histograms(p, c, cfg, bins)
    rows = [
        {"bin_left": left, "bin_right": right, "exact_mass": e, "approx_mass": a}
        for left, right, e, a in zip(exact.left, exact.right, exact.mass, approx.mass)
    ]
    distance = montecarlo.l1_distance(exact, approx)
    logger.info("histogram L1 distance %.6g at rho=%s", distance, c.rho)
    return rows, distance


def propagator_grid(
    p: AssetDynamics,
    c: Optional[ControlDynamics],
    axes: Sequence[str],
    range1: tuple[float, float, int],
    range2: tuple[float, float, int],
    fixed: Optional[float] = None,
):
    """Density on a rectangular grid of two coordinates, the third held at ``fixed``.

    Returns the column names and the rows. With control dynamics the barrier
    density is tabulated; without, only the (x, xbar) plane of the joint
    density is available.
    """
    axes = tuple(axes)
    if len(axes) != 2 or len(set(axes)) != 2 or not set(axes) <= set(AXES):
        raise ParameterError(f"axes must be two distinct names out of {', '.join(AXES)} (got {axes})")
    grids = []
    for lo, hi, n in (range1, range2):
        if int(n) < 1 or (int(n) > 1 and not hi > lo):
            raise ParameterError(f"bad grid range {lo} {hi} {n}")
        grids.append(np.linspace(lo, hi, int(n)))
    g1, g2 = np.meshgrid(*grids, indexing="ij")
    coords = dict(zip(axes, (g1.ravel(), g2.ravel())))
    (third,) = set(AXES) - set(axes)

    if c is None:
        if third != "y":
            raise ConfigurationError("a grid over y needs control dynamics")
        density = joint_density(p, StatePoint(x=coords["x"], xbar=coords["xbar"]))
    else:
        require_open_correlation(c.rho)
        if fixed is None:
            raise ParameterError(f"--fixed value for {third} is required")
        coords[third] = np.full(g1.size, float(fixed))
        y_b = c.y_barrier
        # y_B round-trips through B = S0y e^{y_B}; allow for the last ulp or two
        tolerance = 1e-12 * max(1.0, abs(y_b))
        above = coords["y"] > y_b + tolerance
        if np.any(above):
            raise DomainError("grid reaches above the barrier", y=float(coords["y"][above].max()), y_barrier=y_b)
        coords["y"] = np.minimum(coords["y"], y_b)
        density = barrier_density(p, c, StatePoint(x=coords["x"], xbar=coords["xbar"], y=coords["y"]))

    density = np.atleast_1d(density)
    columns = [*axes, "density"]
    rows = [dict(zip(columns, values)) for values in zip(coords[axes[0]], coords[axes[1]], density)]
    return columns, rows
