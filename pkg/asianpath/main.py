import io
import logging
from datetime import datetime, timezone
from typing import Literal, Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field, ValidationError

from asianpath import config
from asianpath.errors import ConfigurationError, DegenerateCorrelationError, DomainError, ParameterError
from asianpath.models import (
    AssetDynamics,
    ControlDynamics,
    McConfig,
    McOutput,
    OptionSpec,
    PriceOutput,
    RunManifest,
)
from asianpath.services import experiments, montecarlo, pricers
from asianpath.services.csv_generator import CSVGenerator, HistogramCSVGenerator, SweepCSVGenerator

logger = logging.getLogger(__name__)

app = FastAPI(title="asianpath pricing service", version=config.TOOL_VERSION)

USAGE_ERRORS = (ValidationError, ParameterError, ConfigurationError)
DOMAIN_ERRORS = (DomainError, DegenerateCorrelationError, OverflowError)


class PriceRequest(BaseModel):
    asset: AssetDynamics
    control: Optional[ControlDynamics] = None
    option: OptionSpec


class McRequest(PriceRequest):
    mc: McConfig


class SweepRequest(McRequest):
    param: str
    start: float
    stop: float
    points: int
    rhos: Optional[list[float]] = None


class HistogramRequest(BaseModel):
    asset: AssetDynamics
    control: ControlDynamics
    mc: McConfig
    bins: int = 40


class GridRequest(BaseModel):
    asset: AssetDynamics
    control: Optional[ControlDynamics] = None
    axes: list[Literal["x", "xbar", "y"]] = Field(default=["x", "xbar"], min_length=2, max_length=2)
    range1: tuple[float, float, int]
    range2: tuple[float, float, int]
    fixed: Optional[float] = None


@app.on_event("startup")
def on_startup():
    config.configure_logging()


def _manifest(command: str, request: BaseModel, seed: Optional[int] = None) -> RunManifest:
    return RunManifest(
        command=command,
        parameters=request.model_dump(mode="json"),
        seed=seed,
        tool_version=config.TOOL_VERSION,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )


def _error(e: Exception) -> JSONResponse:
    if isinstance(e, USAGE_ERRORS):
        return JSONResponse(status_code=400, content={"error": str(e)})
    if isinstance(e, DOMAIN_ERRORS):
        return JSONResponse(status_code=422, content={"error": str(e)})
    logger.exception("unexpected failure")
    return JSONResponse(status_code=500, content={"error": str(e)})


def _csv_response(text: str, filename: str) -> StreamingResponse:
    return StreamingResponse(
        io.BytesIO(text.encode("utf-8")),
        media_type="text/csv",
        headers={"Content-Disposition": f"attachment; filename={filename}"},
    )


@app.get("/api/health")
def health():
    return {"ok": True, "version": config.TOOL_VERSION}


@app.post("/api/price")
def price_route(request: PriceRequest):
    try:
        result = pricers.price(request.asset, request.control, request.option)
        return PriceOutput(
            kind=request.option.kind,
            inputs=request.model_dump(mode="json"),
            value=result.value,
            breakdown=result.breakdown,
            flags=result.flags,
            manifest=_manifest("price", request),
        )
    except Exception as e:
        return _error(e)


@app.post("/api/mc")
def mc_route(request: McRequest):
    try:
        estimate = montecarlo.mc_price(request.asset, request.control, request.option, request.mc)
        std_error = estimate.std_error
        if estimate.n_effective < 2:
            logger.warning("standard error undefined with %d independent sample(s)", estimate.n_effective)
            std_error = None
        return McOutput(
            kind=request.option.kind,
            inputs=request.model_dump(mode="json"),
            value=estimate.value,
            std_error=std_error,
            n_effective=estimate.n_effective,
            n_paths=estimate.n_paths,
            knockout_fraction=estimate.knockout_fraction,
            manifest=_manifest("mc", request, request.mc.seed),
        )
    except Exception as e:
        return _error(e)


@app.post("/api/sweep")
def sweep_route(request: SweepRequest):
    try:
        rows = experiments.run_sweep(request.asset, request.control, request.option, request.mc, request.param,
                                     request.start, request.stop, request.points, request.rhos)
        return _csv_response(SweepCSVGenerator.generate(rows), f"sweep_{request.param}.csv")
    except Exception as e:
        return _error(e)


@app.post("/api/histogram")
def histogram_route(request: HistogramRequest):
    try:
        rows, _ = experiments.run_histogram(request.asset, request.control, request.mc, request.bins)
        return _csv_response(HistogramCSVGenerator.generate(rows), "histogram.csv")
    except Exception as e:
        return _error(e)


@app.post("/api/propagator-grid")
def propagator_grid_route(request: GridRequest):
    try:
        columns, rows = experiments.propagator_grid(request.asset, request.control, request.axes,
                                                    request.range1, request.range2, request.fixed)
        return _csv_response(CSVGenerator.generate(rows, columns), "propagator_grid.csv")
    except Exception as e:
        return _error(e)
