import math

import numpy as np
import pytest
from scipy import integrate

from asianpath.errors import ConfigurationError, DegenerateCorrelationError, DomainError, ParameterError
from asianpath.models import AssetDynamics, ControlDynamics, OptionKind, OptionSpec, StatePoint
from asianpath.services.pricers import (
    price,
    price_average_price_call,
    price_average_strike_call,
    price_barrier_average_price_call,
)
from asianpath.services.propagators import average_moments, joint_density, survival_probability


def _avg_price(strike: float, rate: float = 0.03) -> OptionSpec:
    return OptionSpec(kind=OptionKind.AVG_PRICE_CALL, strike=strike, rate=rate)


def _barrier(strike: float = 100.0, rate: float = 0.03) -> OptionSpec:
    return OptionSpec(kind=OptionKind.BARRIER_AVG_PRICE_CALL, strike=strike, rate=rate)


def test_average_strike_matches_integral_over_joint_density(asset):
    rate = 0.03
    sd_x = asset.sigma * math.sqrt(asset.T)
    sd_u = asset.sigma * math.sqrt(asset.T / 12.0)
    mean_x = asset.drift * asset.T

    def integrand(u, x):
        xbar = u + 0.5 * x
        return (math.exp(x) - math.exp(xbar)) * joint_density(asset, StatePoint(x=x, xbar=xbar))

    lower = -10.0 * sd_u
    expected, _ = integrate.dblquad(integrand, mean_x - 10.0 * sd_x, mean_x + 10.0 * sd_x,
                                    lower, lambda x: max(0.5 * x, lower), epsabs=1e-11, epsrel=1e-10)
    expected *= asset.s0 * math.exp(-rate * asset.T)
    assert price_average_strike_call(asset, rate).value == pytest.approx(expected, rel=1e-7)


def test_average_strike_reference_value(asset):
    result = price_average_strike_call(asset, 0.03)
    scale = math.sqrt(3.0 / (4.0 * 0.0625))
    assert result.breakdown["d1"] == pytest.approx(scale * (0.03 + 0.03125))
    assert result.breakdown["d2"] == pytest.approx(scale * (0.03 - 0.0625 / 6.0))
    assert result.value == pytest.approx(6.75, abs=0.02)
    assert result.flags == []


def test_average_strike_limits():
    flat = AssetDynamics(mu=0.03, sigma=0.0, s0=100.0, T=1.0)
    result = price_average_strike_call(flat, 0.03)
    assert result.value == math.exp(-0.03) * 100.0 * (math.exp(0.03) - math.exp(0.015))
    assert "analytic-limit" in result.flags
    # the closed form approaches the deterministic payoff
    nearly_flat = AssetDynamics(mu=0.03, sigma=1e-4, s0=100.0, T=1.0)
    assert price_average_strike_call(nearly_flat, 0.03).value == pytest.approx(result.value, rel=1e-6)

    expired = AssetDynamics(mu=0.03, sigma=0.25, s0=100.0, T=0.0)
    assert price_average_strike_call(expired, 0.03).value == 0.0


def test_average_strike_nondecreasing_in_volatility():
    values = [price_average_strike_call(AssetDynamics(mu=0.03, sigma=s, s0=100.0, T=1.0), 0.03).value
              for s in np.linspace(0.05, 0.6, 12)]
    assert all(v >= 0 for v in values)
    assert np.all(np.diff(values) >= 0)


def test_average_price_matches_integral_over_average_marginal(asset):
    spec = _avg_price(105.0)
    mean, var, _ = average_moments(asset, asset.T)
    sd = math.sqrt(var)

    def integrand(a):
        return (asset.s0 * math.exp(a) - 105.0) * math.exp(-0.5 * ((a - mean) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))

    expected, _ = integrate.quad(integrand, math.log(105.0 / asset.s0), mean + 12.0 * sd, epsabs=1e-12, epsrel=1e-12)
    expected *= math.exp(-0.03 * asset.T)
    assert price_average_price_call(asset, spec).value == pytest.approx(expected, rel=1e-9)


def test_average_price_limits(asset):
    tiny_strike = price_average_price_call(asset, _avg_price(1e-12))
    mean, var, _ = average_moments(asset, asset.T)
    assert tiny_strike.value == pytest.approx(math.exp(-0.03) * 100.0 * math.exp(mean + 0.5 * var), rel=1e-9)

    flat = AssetDynamics(mu=0.03, sigma=0.0, s0=100.0, T=1.0)
    result = price_average_price_call(flat, _avg_price(100.0))
    assert result.value == pytest.approx(math.exp(-0.03) * (100.0 * math.exp(0.015) - 100.0), rel=1e-14)
    assert result.flags == ["analytic-limit"]


def test_average_price_monotone_and_convex_in_strike(asset):
    strikes = np.linspace(60.0, 140.0, 17)
    values = np.array([price_average_price_call(asset, _avg_price(k)).value for k in strikes])
    assert np.all(np.diff(values) <= 0)
    assert np.all(np.diff(values, 2) >= -1e-12)


def test_barrier_reduces_to_average_price_times_survival(asset, control):
    plain = price_average_price_call(asset, _avg_price(100.0)).value
    survival = survival_probability(control, asset.T)
    result = price_barrier_average_price_call(asset, control, _barrier())
    assert result.value == pytest.approx(plain * survival, rel=1e-10)
    assert "approximate-correlation" not in result.flags
    assert "d6-amended" in result.flags



def test_barrier_with_tiny_control_volatility_stays_finite(asset):
    c = ControlDynamics(nu=0.03, xi=0.005, s0y=100.0, rho=0.0, barrier=150.0)
    result = price_barrier_average_price_call(asset, c, _barrier())
    survival = survival_probability(c, asset.T)
    assert math.isfinite(result.value)
    assert survival == pytest.approx(1.0, abs=1e-12)
    assert result.value == pytest.approx(price_average_price_call(asset, _avg_price(100.0)).value * survival, rel=1e-10)
    assert result.breakdown["log_image_weight"] > 710.0


def test_overflowing_drift_is_a_domain_error():
    p = AssetDynamics(mu=800.0, sigma=0.25, s0=100.0, T=1.0)
    with pytest.raises(DomainError, match="overflow"):
        price_average_strike_call(p, 0.03)
    with pytest.raises(DomainError):
        price_average_price_call(p, _avg_price(100.0))

def test_barrier_far_away_recovers_average_price(asset, control):
    far = control.model_copy(update={"barrier": 1e8 * control.s0y})
    for rho in (0.0, 0.4, -0.6):
        c = far.model_copy(update={"rho": rho})
        barrier = price_barrier_average_price_call(asset, c, _barrier(95.0)).value
        plain = price_average_price_call(asset, _avg_price(95.0)).value
        assert barrier == pytest.approx(plain, rel=1e-8)


@pytest.mark.parametrize("sigma", [0.15, 0.25, 0.4])
@pytest.mark.parametrize("strike", [90.0, 100.0, 110.0])
def test_barrier_bounded_by_average_price_and_monotone_in_barrier(sigma, strike):
    p = AssetDynamics(mu=0.03, sigma=sigma, s0=100.0, T=1.0)
    plain = price_average_price_call(p, _avg_price(strike)).value
    values = []
    for barrier in (105.0, 120.0, 150.0, 200.0):
        c = ControlDynamics(nu=0.03, xi=0.25, s0y=100.0, rho=0.0, barrier=barrier)
        values.append(price_barrier_average_price_call(p, c, _barrier(strike)).value)
    assert all(0 <= v <= plain for v in values)
    assert np.all(np.diff(values) >= 0)


def test_barrier_breakdown(asset, control):
    c = control.model_copy(update={"rho": 0.5})
    result = price_barrier_average_price_call(asset, c, _barrier())
    for key in ("d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8", "d6_as_printed",
                "term_direct_asset", "term_direct_strike", "term_image_asset", "term_image_strike"):
        assert key in result.breakdown
    assert result.breakdown["d6"] != result.breakdown["d6_as_printed"]
    assert result.breakdown["chi"] == pytest.approx(-math.sqrt(0.75) * 0.5)
    assert "approximate-correlation" in result.flags
    terms = result.breakdown
    undiscounted = (terms["term_direct_asset"] - terms["term_direct_strike"]
                    - terms["term_image_asset"] + terms["term_image_strike"])
    assert result.value == pytest.approx(terms["discount"] * undiscounted)


def test_barrier_already_knocked_out(asset, caplog):
    c = ControlDynamics(nu=0.03, xi=0.25, s0y=150.0, rho=0.0, barrier=150.0)
    result = price_barrier_average_price_call(asset, c, _barrier())
    assert result.value == 0.0
    assert result.flags == ["knocked-out"]
    assert "already knocked out" in caplog.text


def test_barrier_rejects_degenerate_inputs(asset, control):
    with pytest.raises(DegenerateCorrelationError):
        price_barrier_average_price_call(asset, control.model_copy(update={"rho": 1.0}), _barrier())
    flat = AssetDynamics(mu=0.03, sigma=0.0, s0=100.0, T=1.0)
    with pytest.raises(ParameterError):
        price_barrier_average_price_call(flat, control, _barrier())


def test_dispatch(asset, control):
    strike_spec = OptionSpec(kind=OptionKind.AVG_STRIKE_CALL, rate=0.03)
    assert price(asset, None, strike_spec).value == price_average_strike_call(asset, 0.03).value
    assert price(asset, control, _barrier()).value == price_barrier_average_price_call(asset, control, _barrier()).value
    with pytest.raises(ParameterError, match="Monte Carlo"):
        price(asset, None, OptionSpec(kind=OptionKind.AVG_PRICE_PUT, strike=100.0))
    with pytest.raises(ConfigurationError):
        price(asset, None, _barrier())


def test_option_spec_requires_strike():
    with pytest.raises(ValueError, match="strike"):
        OptionSpec(kind=OptionKind.AVG_PRICE_CALL)
