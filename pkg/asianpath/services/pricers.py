"""Closed-form prices of geometric Asian calls.

All prices discount with ``rate`` and use the drift ``mu`` of the dynamics
as given; risk-neutral prices are obtained by passing mu = rate.
"""

import logging
import math
from typing import Optional

from asianpath.errors import ConfigurationError, DomainError, ParameterError
from asianpath.models import AssetDynamics, ControlDynamics, OptionKind, OptionSpec, PriceResult
from asianpath.services.propagators import mirror_source
from asianpath.services.specialfn import bivariate_normal_cdf, require_open_correlation, std_normal_cdf

logger = logging.getLogger(__name__)

ANALYTIC_LIMIT = "analytic-limit"
KNOCKED_OUT = "knocked-out"
APPROXIMATE_CORRELATION = "approximate-correlation"
D6_AMENDED = "d6-amended"


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise DomainError("price overflows double precision", exponent=x) from None


def _finite(value: float, **coordinates) -> float:
    if not math.isfinite(value):
        raise DomainError(f"price evaluates to {value}", **coordinates)
    return value


def price_average_strike_call(p: AssetDynamics, rate: float) -> PriceResult:
    """Call on S_T - Sbar_T, Sbar the geometric average over [0, T]."""
    discount = _exp(-rate * p.T)
    if p.T == 0:
        return PriceResult(value=0.0, breakdown={"discount": 1.0}, flags=[ANALYTIC_LIMIT])
    if p.sigma == 0:
        # S_T = S0 e^{mu T}, Sbar_T = S0 e^{mu T / 2}
        terminal = _exp(p.mu * p.T)
        average = _exp(0.5 * p.mu * p.T)
        value = p.s0 * discount * max(terminal - average, 0.0)
        return PriceResult(
            value=value,
            breakdown={"discount": discount, "terminal_factor": terminal, "average_factor": average},
            flags=[ANALYTIC_LIMIT],
        )

    scale = math.sqrt(3.0 * p.T / (4.0 * p.sigma**2))
    d1 = scale * (p.mu + 0.5 * p.sigma**2)
    d2 = scale * (p.mu - p.sigma**2 / 6.0)
    terminal = _exp(p.mu * p.T)
    average = _exp(0.5 * (p.mu - p.sigma**2 / 6.0) * p.T)
    value = p.s0 * discount * (terminal * std_normal_cdf(d1) - average * std_normal_cdf(d2))
    _finite(value, mu=p.mu, sigma=p.sigma, T=p.T)
    return PriceResult(
        value=value,
        breakdown={"d1": d1, "d2": d2, "discount": discount, "terminal_factor": terminal, "average_factor": average},
    )


def price_average_price_call(p: AssetDynamics, spec: OptionSpec) -> PriceResult:
    """Call on Sbar_T - K from the Gaussian marginal of the average logreturn."""
    strike = _strike(spec)
    discount = _exp(-spec.rate * p.T)
    if p.T == 0 or p.sigma == 0:
        average = p.s0 * _exp(0.5 * p.mu * p.T)
        return PriceResult(
            value=discount * max(average - strike, 0.0),
            breakdown={"discount": discount, "average": average},
            flags=[ANALYTIC_LIMIT],
        )

    mean = 0.5 * p.drift * p.T
    var = p.sigma**2 * p.T / 3.0
    sd = math.sqrt(var)
    k = math.log(strike / p.s0)
    d1 = (mean - k + var) / sd
    d2 = (mean - k) / sd
    forward = p.s0 * _exp(mean + 0.5 * var)
    value = discount * (forward * std_normal_cdf(d1) - strike * std_normal_cdf(d2))
    _finite(value, mu=p.mu, sigma=p.sigma, T=p.T)
    return PriceResult(
        value=value,
        breakdown={"d1": d1, "d2": d2, "discount": discount, "average_forward": forward, "log_moneyness": k},
    )


def _weighted(log_factor: float, probability: float) -> float:
    """exp(log_factor) * probability, without inf * 0 when the factor overflows."""
    if probability <= 0.0:
        return 0.0
    return _exp(log_factor + math.log(probability))


def price_barrier_average_price_call(p: AssetDynamics, c: ControlDynamics, spec: OptionSpec) -> PriceResult:
    """Average-price call knocked out when the control process reaches B.

    Four terms: the two average-price terms restricted to y_T < y_B and the
    two image corrections from the mirror source. Exact at rho = 0; an
    approximation for rho != 0, flagged as such.

    d6 carries sigma y_S / T where the uncorrected expression has
    sigma x_S / T; only then does the rho = 0 price factor into the plain
    price times the survival probability. The uncorrected value stays in the
    breakdown as ``d6_as_printed``.
    """
    strike = _strike(spec)
    if p.sigma <= 0 or p.T <= 0 or c.xi <= 0:
        raise ParameterError("barrier pricing needs sigma > 0, xi > 0 and T > 0")
    rho = require_open_correlation(c.rho)

    y_b = c.y_barrier
    if y_b <= 0:
        logger.warning("barrier %s at or below control spot %s: contract already knocked out", c.barrier, c.s0y)
        return PriceResult(value=0.0, breakdown={"y_barrier": y_b}, flags=[KNOCKED_OUT])

    T, sigma, xi, mu = p.T, p.sigma, c.xi, p.mu
    m_y = c.drift
    x_s, y_s, log_weight = mirror_source(p, c)
    chi = -math.sqrt(0.75) * rho

    k = math.log(strike / p.s0)
    sd_avg = math.sqrt(sigma**2 * T / 3.0)
    sd_y = xi * math.sqrt(T)

    d1 = -(k - 0.5 * T * (mu + sigma**2 / 6.0)) / sd_avg
    d2 = (y_b - T * (m_y + 0.5 * sigma * xi * rho)) / sd_y
    d3 = -(k - 0.5 * T * (mu - 0.5 * sigma**2)) / sd_avg
    d4 = (y_b - T * m_y) / sd_y
    d5 = -(k - T * (2.0 * x_s / T + 0.5 * (mu + sigma**2 / 6.0))) / sd_avg
    shift6 = 3.0 * xi * rho * x_s / T + sigma * (m_y + 0.5 * sigma * xi * rho)
    d6 = (y_b - T / sigma * (shift6 + sigma * y_s / T)) / sd_y
    d6_as_printed = (y_b - T / sigma * (shift6 + sigma * x_s / T)) / sd_y
    d7 = -(k - T * (2.0 * x_s / T + 0.5 * (mu - 0.5 * sigma**2))) / sd_avg
    d8 = (y_b - T / (2.0 * sigma) * ((6.0 * rho * x_s * xi + 2.0 * sigma * y_s) / T + 2.0 * sigma * m_y)) / sd_y
    logger.debug("d6 amended from %.12g to %.12g", d6_as_printed, d6)

    direct_asset = p.s0 * _exp(0.5 * T * (mu - sigma**2 / 6.0)) * bivariate_normal_cdf(d1, d2, chi)
    direct_strike = strike * bivariate_normal_cdf(d3, d4, chi)
    log_asset_shift = 3.0 * T / sigma**2 * (x_s / T + sigma**2 / 6.0) * (2.0 * x_s / T + mu - sigma**2 / 6.0)
    image_asset = p.s0 * _weighted(log_asset_shift + log_weight, bivariate_normal_cdf(d5, d6, chi))
    log_strike_shift = 3.0 / sigma**2 * x_s * (2.0 * x_s / T + p.drift)
    image_strike = strike * _weighted(log_strike_shift + log_weight, bivariate_normal_cdf(d7, d8, chi))

    discount = _exp(-spec.rate * T)
    value = discount * (direct_asset - direct_strike - image_asset + image_strike)
    _finite(value, mu=p.mu, sigma=p.sigma, xi=c.xi, rho=rho)
    flags = [D6_AMENDED]
    if rho != 0.0:
        flags.append(APPROXIMATE_CORRELATION)
    if value < 0:
        logger.warning("barrier price %.6g is negative at rho=%s", value, rho)

    return PriceResult(
        value=value,
        breakdown={
            "d1": d1, "d2": d2, "d3": d3, "d4": d4,
            "d5": d5, "d6": d6, "d7": d7, "d8": d8,
            "d6_as_printed": d6_as_printed,
            "chi": chi,
            "x_s": x_s,
            "y_s": y_s,
            "y_barrier": y_b,
            "log_image_weight": log_weight,
            "discount": discount,
            "term_direct_asset": direct_asset,
            "term_direct_strike": direct_strike,
            "term_image_asset": image_asset,
            "term_image_strike": image_strike,
        },
        flags=flags,
    )


def price(p: AssetDynamics, c: Optional[ControlDynamics], spec: OptionSpec) -> PriceResult:
    if not spec.kind.is_call:
        raise ParameterError(f"{spec.kind.value} has no closed form; price it with the Monte Carlo engine")
    if spec.kind is OptionKind.AVG_STRIKE_CALL:
        return price_average_strike_call(p, spec.rate)
    if spec.kind is OptionKind.AVG_PRICE_CALL:
        return price_average_price_call(p, spec)
    if c is None:
        raise ConfigurationError(f"{spec.kind.value} needs control dynamics")
    return price_barrier_average_price_call(p, c, spec)


def _strike(spec: OptionSpec) -> float:
    if spec.strike is None:
        raise ParameterError(f"{spec.kind.value} needs a strike")
    return spec.strike
