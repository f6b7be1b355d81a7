"""Pydantic request and response models for the service and report files.

The response documents double as the CLI's JSON report format, so any report
written to disk round-trips losslessly through these models.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field

VERDICT_REJECT = "reject common structure"
VERDICT_FAIL = "fail to reject"


class PanelPayload(BaseModel):
    """A T x d panel shipped inline, rows are time points."""

    data: list[list[float]]
    series_names: Optional[list[str]] = None


class TestOptions(BaseModel):
    level: float = Field(default=0.05, gt=0.0, lt=1.0)
    bandwidth: Optional[int] = Field(default=None, ge=1)
    sup_wald: bool = False
    pi0: float = Field(default=0.45, gt=0.0, le=0.5)
    standardize: bool = True
    ridge: float = Field(default=0.0, ge=0.0)


class TwoSubjectTestRequest(TestOptions):
    panel1: PanelPayload
    panel2: PanelPayload
    r: Optional[int] = Field(default=None, ge=1)
    r_max: int = Field(default=8, ge=1)


class ChangepointTestRequest(TestOptions):
    panel: PanelPayload
    break_index: int = Field(ge=1)
    r: Optional[int] = Field(default=None, ge=1)
    r_max: int = Field(default=8, ge=1)
    baseline: bool = False


class DiffRTestRequest(TestOptions):
    panel1: PanelPayload
    panel2: PanelPayload
    r1: int = Field(ge=1)
    r2: int = Field(ge=1)


class EstimateFactorsRequest(BaseModel):
    panel: PanelPayload
    r_max: int = Field(default=8, ge=1)
    standardize: bool = True


class SimulateRequest(BaseModel):
    family: str
    d: int = Field(ge=2)
    T: int = Field(ge=8)
    r: Optional[int] = None
    r1: Optional[int] = None
    r2: Optional[int] = None
    params: dict[str, float] = Field(default_factory=dict)
    n_reps: int = Field(default=1000, ge=1)
    level: float = Field(default=0.05, gt=0.0, lt=1.0)
    seed: int = 0
    pipeline: Literal["wald", "sup_wald", "baseline"] = "wald"
    pi0: float = Field(default=0.45, gt=0.0, le=0.5)
    bandwidth: Optional[int] = Field(default=None, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)


class WaldReportModel(BaseModel):
    v: list[float]
    omega: list[list[float]]
    statistic: float
    df: int
    p_value: float
    bandwidth: int
    decision: bool
    condition_number: float


class SupWaldReportModel(BaseModel):
    sup_statistic: float
    argmax_pi: float
    pi0: float
    critical_value: float
    trajectory: list[tuple[float, float]]
    reject: bool


class TestReportDocument(BaseModel):
    """Report for one hypothesis-test run; serialized as the CLI output."""

    command: str
    config: dict[str, Any]
    r_used: Optional[int] = None
    r1_used: Optional[int] = None
    r2_used: Optional[int] = None
    wald: Optional[WaldReportModel] = None
    sup_wald: Optional[SupWaldReportModel] = None
    baseline: Optional[WaldReportModel] = None
    verdict: str
    version: str
    elapsed_seconds: float


class FactorCountReport(BaseModel):
    command: str
    config: dict[str, Any]
    r_hat: int
    version: str
    elapsed_seconds: float


class SimulationReportDocument(BaseModel):
    command: str
    config: dict[str, Any]
    rejection_rate: float
    mean_statistic: float
    n_failures: int
    summary: str
    version: str
    elapsed_seconds: float


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorResponse(BaseModel):
    error: str
    detail: str
