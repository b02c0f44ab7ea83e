"""Monte Carlo oracle for the closed-form pricers.

Paths are simulated in fixed-size blocks. Block ``i`` always draws from
``make_stream(seed, i)``; blocks are handed to ``n_chunks`` worker lanes and
their results consumed in block order, so a run is a pure function of its
config whatever the chunk count or thread schedule.
"""

import logging
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from asianpath import config
from asianpath.errors import ConfigurationError, DomainError, ParameterError
from asianpath.models import AssetDynamics, ControlDynamics, McConfig, OptionKind, OptionSpec, PriceEstimate
from asianpath.services.specialfn import make_stream, sample_correlated_pair

logger = logging.getLogger(__name__)

BLOCK_PATHS = 8192  # even, so antithetic pairs never straddle two blocks
MIN_HISTOGRAM_BINS = 10


@dataclass
class RunningMoments:
    """Mergeable count/mean/M2 accumulator (Welford, Chan et al. for merges)."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> "RunningMoments":
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return cls()
        mean = float(values.mean())
        return cls(n=int(values.size), mean=mean, m2=float(np.sum((values - mean) ** 2)))

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return RunningMoments(n=n, mean=mean, m2=m2)

    @property
    def variance(self) -> float:
        """Sample variance; nan below two samples."""
        return self.m2 / (self.n - 1) if self.n > 1 else math.nan


@dataclass(frozen=True)
class PathRecord:
    """Terminal state of one block of paths, one array entry per path."""

    x_terminal: np.ndarray
    x_average: np.ndarray
    y_max: Optional[np.ndarray]
    knocked_out: np.ndarray
    x_average_approx: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.x_terminal)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    mass: np.ndarray  # sums to one

    @property
    def left(self) -> np.ndarray:
        return self.edges[:-1]

    @property
    def right(self) -> np.ndarray:
        return self.edges[1:]


@dataclass
class _BlockSummary:
    payoff: RunningMoments = field(default_factory=RunningMoments)
    n_paths: int = 0
    knocked_out: int = 0


def _block_sizes(n_paths: int) -> list[int]:
    full, rest = divmod(n_paths, BLOCK_PATHS)
    return [BLOCK_PATHS] * full + ([rest] if rest else [])


def _run_blocks(cfg: McConfig, work: Callable[[int, int], object]) -> Iterator:
    """Yield ``work(block_index, block_size)`` for every block, in block order.

    At most one block per worker is in flight, so memory stays bounded by the
    worker count however many paths are requested.
    """
    sizes = _block_sizes(cfg.n_paths)
    workers = max(1, min(cfg.n_chunks, len(sizes), config.get_thread_cap()))
    logger.info("simulating %d paths x %d steps in %d blocks, %d chunks, %d workers",
                cfg.n_paths, cfg.n_steps, len(sizes), cfg.n_chunks, workers)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending = deque()
        for index, size in enumerate(sizes):
            pending.append(pool.submit(work, index, size))
            if len(pending) >= workers:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


def _simulate_block(p: AssetDynamics, c: Optional[ControlDynamics], cfg: McConfig,
                    index: int, size: int, with_approximate: bool) -> PathRecord:
    rng = make_stream(cfg.seed, index)
    n = cfg.n_steps
    dt = p.T / n
    x_step = p.drift * dt
    x_vol = p.sigma * math.sqrt(dt)
    rho = c.rho if c is not None else 0.0

    x = np.zeros(size)
    running = np.zeros(size)
    y = y_max = None
    if c is not None:
        y = np.zeros(size)
        y_max = np.zeros(size)  # includes y_0 = 0
        y_step = c.drift * dt
        y_vol = c.xi * math.sqrt(dt)

    for k in range(1, n + 1):
        # Both normals are drawn even without a control process so the x paths
        # for a given seed do not depend on whether y is simulated.
        z1, z2 = sample_correlated_pair(rng, rho, size, antithetic=cfg.antithetic)
        x += x_step + x_vol * z1
        if cfg.averaging == "trapezoid" and k == n:
            running += 0.5 * x
        else:
            running += x
        if y is not None:
            y += y_step + y_vol * z2
            np.maximum(y_max, y, out=y_max)

    # x_0 = 0 contributes nothing to either sum
    x_average = running / n if cfg.averaging == "trapezoid" else running / (n + 1)
    if y_max is not None:
        knocked_out = y_max >= c.y_barrier
    else:
        knocked_out = np.zeros(size, dtype=bool)

    approx = None
    if with_approximate:
        approx = 0.5 * x + p.sigma * math.sqrt(p.T / 12.0) * rng.standard_normal(size)

    return PathRecord(x_terminal=x, x_average=x_average, y_max=y_max,
                      knocked_out=knocked_out, x_average_approx=approx)


def simulate_paths(p: AssetDynamics, c: Optional[ControlDynamics], cfg: McConfig,
                   with_approximate: bool = False) -> Iterator[PathRecord]:
    """Yield the simulated paths block by block.

    ``with_approximate`` adds, per path, the approximate average drawn as
    x_T / 2 plus independent Gaussian noise of variance sigma^2 T / 12, which
    has the exact marginal moments of the average and correlation sqrt(3)/2
    with x_T but ignores the path of y.
    """
    yield from _run_blocks(cfg, lambda i, size: _simulate_block(p, c, cfg, i, size, with_approximate))


def payoff(kind: OptionKind, p: AssetDynamics, strike: Optional[float], record: PathRecord) -> np.ndarray:
    """Undiscounted payoff of every path in ``record``."""
    average = p.s0 * np.exp(record.x_average)
    if kind.is_average_strike:
        terminal = p.s0 * np.exp(record.x_terminal)
        values = terminal - average if kind.is_call else average - terminal
    else:
        values = average - strike if kind.is_call else strike - average
    values = np.maximum(values, 0.0)
    if kind.is_barrier:
        values = np.where(record.knocked_out, 0.0, values)
    return values


def mc_price(p: AssetDynamics, c: Optional[ControlDynamics], spec: OptionSpec, cfg: McConfig) -> PriceEstimate:
    """Discounted mean payoff and its standard error.

    Under antithetic sampling each pair is averaged first and the pairs are
    the independent samples, so ``n_effective`` is half of ``n_paths``.
    """
    if spec.kind.is_barrier and c is None:
        raise ConfigurationError(f"{spec.kind.value} needs control dynamics")
    control = c if spec.kind.is_barrier else None

    def summarize(index: int, size: int) -> _BlockSummary:
        record = _simulate_block(p, control, cfg, index, size, with_approximate=False)
        values = payoff(spec.kind, p, spec.strike, record)
        if cfg.antithetic:
            half = size // 2
            values = 0.5 * (values[:half] + values[half:])
        return _BlockSummary(RunningMoments.of(values), size, int(np.count_nonzero(record.knocked_out)))

    moments = RunningMoments()
    n_paths = knocked = 0
    for block in _run_blocks(cfg, summarize):
        moments = moments.merge(block.payoff)
        n_paths += block.n_paths
        knocked += block.knocked_out

    if not math.isfinite(moments.mean):
        raise DomainError(f"simulated payoffs overflow (mean {moments.mean})", mu=p.mu, sigma=p.sigma, T=p.T)
    discount = math.exp(-spec.rate * p.T)
    std_error = discount * math.sqrt(moments.variance / moments.n) if moments.n > 1 else 0.0
    return PriceEstimate(
        value=discount * moments.mean,
        std_error=std_error,
        n_effective=moments.n,
        n_paths=n_paths,
        knockout_fraction=knocked / n_paths if spec.kind.is_barrier else None,
    )


def average_histograms(p: AssetDynamics, c: ControlDynamics, cfg: McConfig, bins: int):
    """Histograms of the simulated and the approximate average over surviving paths.

    Both use the same bin edges, spanning the combined sample, and are
    normalized to unit mass.
    """
    if bins < MIN_HISTOGRAM_BINS:
        raise ParameterError(f"bins must be at least {MIN_HISTOGRAM_BINS} (got {bins})")
    exact, approx = [], []
    for record in simulate_paths(p, c, cfg, with_approximate=True):
        alive = ~record.knocked_out
        exact.append(record.x_average[alive])
        approx.append(record.x_average_approx[alive])
    exact = np.concatenate(exact)
    approx = np.concatenate(approx)
    if exact.size == 0:
        raise ParameterError("every path was knocked out; nothing to histogram")

    lo = min(exact.min(), approx.min())
    hi = max(exact.max(), approx.max())
    if hi <= lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    return _histogram(exact, edges), _histogram(approx, edges)


def _histogram(values: np.ndarray, edges: np.ndarray) -> Histogram:
    counts, _ = np.histogram(values, bins=edges)
    return Histogram(edges=edges, mass=counts / counts.sum())


def l1_distance(a: Histogram, b: Histogram) -> float:
    if not np.array_equal(a.edges, b.edges):
        raise ParameterError("histograms must share their bin edges")
    return float(np.abs(a.mass - b.mass).sum())
