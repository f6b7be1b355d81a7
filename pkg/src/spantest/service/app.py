"""FastAPI application wrapping the core package.

Every endpoint is a thin shim over the runner layer; domain errors surface
as HTTP 400 with the exception class name, request-shape problems as the
usual 422 validation responses.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import SpantestError
from ..runner import (
    run_changepoint,
    run_diff_r,
    run_estimate_factors,
    run_simulate,
    run_two_subject,
)
from .schemas import (
    ChangepointTestRequest,
    DiffRTestRequest,
    EstimateFactorsRequest,
    FactorCountReport,
    HealthResponse,
    SimulateRequest,
    SimulationReportDocument,
    TestReportDocument,
    TwoSubjectTestRequest,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="spantest",
        description=(
            "Tests for a shared loading space across high-dimensional "
            "factor models, plus the Monte Carlo harness behind them."
        ),
        version=__version__,
    )

    @app.exception_handler(SpantestError)
    async def domain_error_handler(request: Request, exc: SpantestError):
        return JSONResponse(
            status_code=400,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": "ValueError", "detail": str(exc)},
        )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/test/two-subject", response_model=TestReportDocument)
    def test_two_subject(request: TwoSubjectTestRequest) -> TestReportDocument:
        return run_two_subject(request)

    @app.post("/test/changepoint", response_model=TestReportDocument)
    def test_changepoint(request: ChangepointTestRequest) -> TestReportDocument:
        return run_changepoint(request)

    @app.post("/test/diff-r", response_model=TestReportDocument)
    def test_diff_r(request: DiffRTestRequest) -> TestReportDocument:
        return run_diff_r(request)

    @app.post("/estimate-factors", response_model=FactorCountReport)
    def estimate_factors(request: EstimateFactorsRequest) -> FactorCountReport:
        return run_estimate_factors(request)

    @app.post("/simulate", response_model=SimulationReportDocument)
    def simulate(request: SimulateRequest) -> SimulationReportDocument:
        return run_simulate(request)

    return app
