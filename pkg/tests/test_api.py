import io

import pandas as pd
import pytest
from fastapi.testclient import TestClient

from asianpath.main import app
from asianpath.models import AssetDynamics, OptionKind, OptionSpec
from asianpath.services.pricers import price_average_price_call

client = TestClient(app)

ASSET = {"mu": 0.03, "sigma": 0.25, "s0": 100.0, "T": 1.0}
CONTROL = {"nu": 0.03, "xi": 0.25, "s0y": 100.0, "rho": 0.0, "barrier": 150.0}
MC = {"n_paths": 4000, "n_steps": 20, "seed": 7}


def test_health():
    response = client.get("/api/health")
    assert response.status_code == 200
    assert response.json()["ok"] is True


def test_price():
    option = {"kind": "avg-price-call", "strike": 100.0, "rate": 0.03}
    response = client.post("/api/price", json={"asset": ASSET, "option": option})
    assert response.status_code == 200
    body = response.json()
    expected = price_average_price_call(AssetDynamics(**ASSET), OptionSpec(**option))
    assert body["value"] == pytest.approx(expected.value, rel=1e-15)
    assert body["kind"] == "avg-price-call"
    assert body["manifest"]["command"] == "price"


def test_mc_reports_knockouts():
    option = {"kind": "barrier-avg-price-call", "strike": 100.0, "rate": 0.03}
    response = client.post("/api/mc", json={"asset": ASSET, "control": CONTROL, "option": option, "mc": MC})
    assert response.status_code == 200
    body = response.json()
    assert body["n_paths"] == 4000
    assert body["std_error"] > 0
    assert 0 < body["knockout_fraction"] < 1
    assert body["manifest"]["seed"] == 7


def test_sweep_returns_csv():
    option = {"kind": "avg-price-call", "strike": 100.0, "rate": 0.03}
    payload = {"asset": ASSET, "option": option, "mc": MC, "param": "strike", "start": 90.0, "stop": 110.0,
               "points": 3}
    response = client.post("/api/sweep", json=payload)
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("text/csv")
    df = pd.read_csv(io.StringIO(response.text))
    assert list(df["param_value"]) == [90.0, 100.0, 110.0]
    assert (df["analytic_value"].diff().dropna() < 0).all()


def test_histogram_returns_csv():
    payload = {"asset": ASSET, "control": {**CONTROL, "barrier": 130.0}, "mc": MC, "bins": 10}
    response = client.post("/api/histogram", json=payload)
    assert response.status_code == 200
    df = pd.read_csv(io.StringIO(response.text))
    assert len(df) == 10
    assert df["exact_mass"].sum() == pytest.approx(1.0)


def test_propagator_grid_returns_csv():
    payload = {"asset": ASSET, "range1": [-0.5, 0.5, 3], "range2": [-0.2, 0.2, 3]}
    response = client.post("/api/propagator-grid", json=payload)
    assert response.status_code == 200
    df = pd.read_csv(io.StringIO(response.text))
    assert list(df.columns) == ["x", "xbar", "density"]
    assert len(df) == 9


def test_put_has_no_closed_form():
    option = {"kind": OptionKind.AVG_PRICE_PUT.value, "strike": 100.0}
    response = client.post("/api/price", json={"asset": ASSET, "option": option})
    assert response.status_code == 400
    assert "Monte Carlo" in response.json()["error"]


def test_barrier_needs_control():
    option = {"kind": "barrier-avg-price-call", "strike": 100.0}
    response = client.post("/api/price", json={"asset": ASSET, "option": option})
    assert response.status_code == 400


def test_degenerate_correlation():
    option = {"kind": "barrier-avg-price-call", "strike": 100.0}
    payload = {"asset": ASSET, "control": {**CONTROL, "rho": 1.0}, "option": option}
    response = client.post("/api/price", json=payload)
    assert response.status_code == 422
    assert "rho" in response.json()["error"]


def test_overflowing_price_is_unprocessable():
    response = client.post("/api/price", json={"asset": {**ASSET, "mu": 800.0}, "option": {"kind": "avg-strike-call"}})
    assert response.status_code == 422
    assert "overflow" in response.json()["error"]


def test_invalid_body_is_rejected():
    response = client.post("/api/price", json={"asset": {**ASSET, "sigma": -1.0},
                                               "option": {"kind": "avg-strike-call"}})
    assert response.status_code == 422
    assert "detail" in response.json()
