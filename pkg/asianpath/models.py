import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Annotated, Any, Literal, Optional

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

logger = logging.getLogger(__name__)

# |rho| = 1 is representable; operations dividing by 1 - rho^2 reject it.
Correlation = Annotated[float, Field(ge=-1.0, le=1.0)]


class AssetDynamics(BaseModel):
    """Black-Scholes dynamics of the priced asset, x_t = log(S_t / S_0)."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    mu: float  # drift, per year
    sigma: float = Field(ge=0)  # volatility, per sqrt-year
    s0: float = Field(gt=0)
    T: float = Field(ge=0)  # horizon, years

    @property
    def drift(self) -> float:
        """Drift of the logreturn, mu - sigma^2 / 2."""
        return self.mu - 0.5 * self.sigma**2


class ControlDynamics(BaseModel):
    """Control process y carrying an up-and-out barrier."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    nu: float
    xi: float = Field(ge=0)
    s0y: float = Field(gt=0)
    rho: Correlation = 0.0
    barrier: float = Field(gt=0)

    @property
    def drift(self) -> float:
        return self.nu - 0.5 * self.xi**2

    @property
    def y_barrier(self) -> float:
        """Barrier in logreturn units, y_B = ln(B / S0y)."""
        return math.log(self.barrier / self.s0y)


class OptionKind(str, Enum):
    AVG_STRIKE_CALL = "avg-strike-call"
    AVG_STRIKE_PUT = "avg-strike-put"
    AVG_PRICE_CALL = "avg-price-call"
    AVG_PRICE_PUT = "avg-price-put"
    BARRIER_AVG_PRICE_CALL = "barrier-avg-price-call"
    BARRIER_AVG_PRICE_PUT = "barrier-avg-price-put"

    @property
    def is_call(self) -> bool:
        return self.value.endswith("-call")

    @property
    def is_barrier(self) -> bool:
        return self.value.startswith("barrier-")

    @property
    def is_average_strike(self) -> bool:
        return self.value.startswith("avg-strike-")

    @property
    def needs_strike(self) -> bool:
        return not self.is_average_strike


class OptionSpec(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: OptionKind
    strike: Optional[float] = Field(default=None, gt=0)  # unused for average-strike kinds
    rate: float = 0.0  # discount rate, per year

    @model_validator(mode="after")
    def _strike_when_needed(self):
        if self.kind.needs_strike and self.strike is None:
            raise ValueError(f"strike is required for {self.kind.value}")
        return self


@dataclass(frozen=True)
class StatePoint:
    """Terminal point (x_T, xbar_T, y_T); coordinates may be numpy arrays."""

    x: ArrayLike
    xbar: ArrayLike
    y: Optional[ArrayLike] = None

    def arrays(self):
        y = None if self.y is None else np.asarray(self.y, dtype=float)
        return np.asarray(self.x, dtype=float), np.asarray(self.xbar, dtype=float), y


class McConfig(BaseModel):
    """Monte Carlo run settings.

    ``averaging="grid"`` (the default) averages x over the n + 1 grid points
    including x_0; ``"trapezoid"`` halves the two end points instead. The
    chunk count only sets the number of worker lanes and never changes the
    paths drawn.
    """

    model_config = ConfigDict(frozen=True)

    n_paths: int = Field(ge=1)
    n_steps: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2**64)
    n_chunks: int = Field(default=1, ge=1)
    antithetic: bool = False
    averaging: Literal["grid", "trapezoid"] = "grid"

    @model_validator(mode="before")
    @classmethod
    def _round_paths(cls, data: Any):
        if not isinstance(data, dict) or not data.get("antithetic"):
            return data
        try:
            n_paths = int(data.get("n_paths"))
        except (TypeError, ValueError):
            return data  # left to field validation
        if n_paths >= 1 and n_paths % 2:
            logger.warning("n_paths rounded up from %d to %d for antithetic pairs", n_paths, n_paths + 1)
            data = {**data, "n_paths": n_paths + 1}
        return data


class PriceEstimate(BaseModel):
    """Monte Carlo estimate; the common return type of the simulation engine."""

    value: float
    std_error: float = Field(ge=0)
    n_effective: int
    n_paths: int
    knockout_fraction: Optional[float] = Field(default=None, ge=0, le=1)


class PriceResult(BaseModel):
    value: float
    breakdown: dict[str, float] = Field(default_factory=dict)
    flags: list[str] = Field(default_factory=list)


class RunManifest(BaseModel):
    command: str
    parameters: dict[str, Any]
    seed: Optional[int] = None
    tool_version: str
    timestamp: str


class PriceOutput(BaseModel):
    kind: OptionKind
    inputs: dict[str, Any]
    value: float
    breakdown: dict[str, float]
    flags: list[str]
    manifest: RunManifest


class McOutput(BaseModel):
    kind: OptionKind
    inputs: dict[str, Any]
    value: float
    std_error: Optional[float]  # null when fewer than two independent samples
    n_effective: int
    n_paths: int
    knockout_fraction: Optional[float] = None
    manifest: RunManifest
