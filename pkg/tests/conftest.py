import pytest

from asianpath import config as settings
from asianpath.models import AssetDynamics, ControlDynamics, OptionKind, OptionSpec


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-size Monte Carlo tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def leave_logging_to_pytest(monkeypatch):
    """Keep main() from replacing the capture handlers with logging.ini."""
    monkeypatch.setattr(settings, "_configured", True)


@pytest.fixture
def asset():
    """Asset shared by most tests."""
    return AssetDynamics(mu=0.03, sigma=0.25, s0=100.0, T=1.0)


@pytest.fixture
def control():
    return ControlDynamics(nu=0.03, xi=0.25, s0y=100.0, rho=0.0, barrier=150.0)


@pytest.fixture
def avg_price_call():
    return OptionSpec(kind=OptionKind.AVG_PRICE_CALL, strike=100.0, rate=0.03)


@pytest.fixture
def barrier_call():
    return OptionSpec(kind=OptionKind.BARRIER_AVG_PRICE_CALL, strike=100.0, rate=0.03)
