"""Orchestration shared by the CLI and the HTTP service.

The ``run_*`` functions take validated request models and produce report
documents; :func:`run` is the path-level entry point used by the CLI, which
loads CSV inputs, dispatches on the command and optionally writes the JSON
report to disk.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .csvio import load_csv
from .errors import SpantestError
from .panel import TimeSeriesPanel, standardize
from .pca import estimate_num_factors, estimate_pca
from .service.schemas import (
    VERDICT_FAIL,
    VERDICT_REJECT,
    ChangepointTestRequest,
    DiffRTestRequest,
    EstimateFactorsRequest,
    FactorCountReport,
    PanelPayload,
    SimulateRequest,
    SimulationReportDocument,
    SupWaldReportModel,
    TestReportDocument,
    TwoSubjectTestRequest,
    WaldReportModel,
)
from .simulation import DgpSpec, monte_carlo
from .transform import transform_changepoint, transform_diff_r, transform_two_subject
from .wald import SupWaldReport, WaldReport, baseline_changepoint_wald, sup_wald, wald

COMMANDS = (
    "test-two-subject",
    "test-changepoint",
    "test-diff-r",
    "simulate",
    "estimate-factors",
)


class AmbiguousFactorCount(SpantestError):
    """Estimated factor counts of the two panels disagree and no r was given."""


def _to_panel(payload: PanelPayload) -> TimeSeriesPanel:
    names = tuple(payload.series_names) if payload.series_names else None
    return TimeSeriesPanel(np.asarray(payload.data, dtype=float), series_names=names)


def _wald_model(report: WaldReport) -> WaldReportModel:
    return WaldReportModel(
        v=report.v.tolist(),
        omega=report.omega.tolist(),
        statistic=report.statistic,
        df=report.df,
        p_value=report.p_value,
        bandwidth=report.bandwidth,
        decision=report.decision,
        condition_number=report.condition_number,
    )


def _sup_model(report: SupWaldReport) -> SupWaldReportModel:
    return SupWaldReportModel(
        sup_statistic=report.sup_statistic,
        argmax_pi=report.argmax_pi,
        pi0=report.pi0,
        critical_value=report.critical_value,
        trajectory=list(report.trajectory),
        reject=report.reject,
    )


def _resolve_common_r(
    p1: TimeSeriesPanel, p2: TimeSeriesPanel, r: int | None, r_max: int
) -> int:
    if r is not None:
        return r
    r1 = estimate_num_factors(p1, r_max)
    r2 = estimate_num_factors(p2, r_max)
    if r1 != r2:
        raise AmbiguousFactorCount(
            f"estimated factor counts disagree ({r1} vs {r2}); pass r "
            f"explicitly or use the different-factor-counts test"
        )
    if r1 < 1:
        raise AmbiguousFactorCount(
            "information criterion selects 0 factors; pass r explicitly"
        )
    return r1


def _config_echo(req, exclude: set[str]) -> dict:
    return req.model_dump(exclude=exclude)


def run_two_subject(req: TwoSubjectTestRequest) -> TestReportDocument:
    start = time.perf_counter()
    p1, p2 = _to_panel(req.panel1), _to_panel(req.panel2)
    if req.standardize:
        p1, p2 = standardize(p1), standardize(p2)
    r = _resolve_common_r(p1, p2, req.r, req.r_max)
    y = transform_two_subject(p1, p2, r)
    est = estimate_pca(y.as_panel(), y.r_effective)
    wald_report = wald(est.factors, b_t=req.bandwidth, level=req.level, ridge=req.ridge)
    sup_report = None
    if req.sup_wald:
        sup_report = sup_wald(
            est.factors, req.pi0, b_t=req.bandwidth, level=req.level, ridge=req.ridge
        )
    reject = sup_report.reject if sup_report is not None else wald_report.decision
    config = _config_echo(req, exclude={"panel1", "panel2"})
    config["panel1_shape"] = [p1.T, p1.d]
    config["panel2_shape"] = [p2.T, p2.d]
    return TestReportDocument(
        command="test-two-subject",
        config=config,
        r_used=r,
        wald=_wald_model(wald_report),
        sup_wald=_sup_model(sup_report) if sup_report is not None else None,
        verdict=VERDICT_REJECT if reject else VERDICT_FAIL,
        version=__version__,
        elapsed_seconds=time.perf_counter() - start,
    )


def run_changepoint(req: ChangepointTestRequest) -> TestReportDocument:
    start = time.perf_counter()
    panel = _to_panel(req.panel)
    if req.standardize:
        panel = standardize(panel)
    r = req.r if req.r is not None else estimate_num_factors(panel, req.r_max)
    if r < 1:
        raise AmbiguousFactorCount(
            "information criterion selects 0 factors; pass r explicitly"
        )
    y = transform_changepoint(panel, req.break_index, r)
    est = estimate_pca(y.as_panel(), y.r_effective)
    wald_report = wald(est.factors, b_t=req.bandwidth, level=req.level, ridge=req.ridge)
    sup_report = None
    if req.sup_wald:
        sup_report = sup_wald(
            est.factors, req.pi0, b_t=req.bandwidth, level=req.level, ridge=req.ridge
        )
    baseline_report = None
    if req.baseline:
        baseline_report = baseline_changepoint_wald(
            panel, r, b_t=req.bandwidth, level=req.level
        )
    reject = sup_report.reject if sup_report is not None else wald_report.decision
    config = _config_echo(req, exclude={"panel"})
    config["panel_shape"] = [panel.T, panel.d]
    return TestReportDocument(
        command="test-changepoint",
        config=config,
        r_used=r,
        wald=_wald_model(wald_report),
        sup_wald=_sup_model(sup_report) if sup_report is not None else None,
        baseline=_wald_model(baseline_report) if baseline_report is not None else None,
        verdict=VERDICT_REJECT if reject else VERDICT_FAIL,
        version=__version__,
        elapsed_seconds=time.perf_counter() - start,
    )


def run_diff_r(req: DiffRTestRequest) -> TestReportDocument:
    start = time.perf_counter()
    p1, p2 = _to_panel(req.panel1), _to_panel(req.panel2)
    if req.standardize:
        p1, p2 = standardize(p1), standardize(p2)
    y = transform_diff_r(p1, p2, req.r1, req.r2)
    est = estimate_pca(y.as_panel(), y.r_effective)
    # Degrees of freedom come from the factor count of the transformed
    # series, i.e. r2.
    wald_report = wald(est.factors, b_t=req.bandwidth, level=req.level, ridge=req.ridge)
    sup_report = None
    if req.sup_wald:
        sup_report = sup_wald(
            est.factors, req.pi0, b_t=req.bandwidth, level=req.level, ridge=req.ridge
        )
    reject = sup_report.reject if sup_report is not None else wald_report.decision
    config = _config_echo(req, exclude={"panel1", "panel2"})
    config["panel1_shape"] = [p1.T, p1.d]
    config["panel2_shape"] = [p2.T, p2.d]
    return TestReportDocument(
        command="test-diff-r",
        config=config,
        r1_used=req.r1,
        r2_used=req.r2,
        wald=_wald_model(wald_report),
        sup_wald=_sup_model(sup_report) if sup_report is not None else None,
        verdict=VERDICT_REJECT if reject else VERDICT_FAIL,
        version=__version__,
        elapsed_seconds=time.perf_counter() - start,
    )


def run_estimate_factors(req: EstimateFactorsRequest) -> FactorCountReport:
    start = time.perf_counter()
    panel = _to_panel(req.panel)
    if req.standardize:
        panel = standardize(panel)
    r_hat = estimate_num_factors(panel, req.r_max)
    config = _config_echo(req, exclude={"panel"})
    config["panel_shape"] = [panel.T, panel.d]
    return FactorCountReport(
        command="estimate-factors",
        config=config,
        r_hat=r_hat,
        version=__version__,
        elapsed_seconds=time.perf_counter() - start,
    )


def run_simulate(req: SimulateRequest) -> SimulationReportDocument:
    spec = DgpSpec(
        family=req.family,
        d=req.d,
        T=req.T,
        r=req.r,
        r1=req.r1,
        r2=req.r2,
        params=dict(req.params),
    )
    result = monte_carlo(
        spec,
        req.n_reps,
        level=req.level,
        pipeline=req.pipeline,
        seed=req.seed,
        pi0=req.pi0,
        b_t=req.bandwidth,
        workers=req.workers,
    )
    config = _config_echo(req, exclude=set())
    config["r_resolved"] = spec.r
    config["r1_resolved"] = spec.r1
    config["r2_resolved"] = spec.r2
    config["params_resolved"] = dict(spec.params)
    summary = (
        f"{spec.label()} | pipeline={req.pipeline} level={req.level} "
        f"reps={req.n_reps} seed={req.seed} -> rejection rate "
        f"{result.rejection_rate:.4f}"
    )
    return SimulationReportDocument(
        command="simulate",
        config=config,
        rejection_rate=result.rejection_rate,
        mean_statistic=result.mean_statistic,
        n_failures=result.n_failures,
        summary=summary,
        version=__version__,
        elapsed_seconds=result.elapsed,
    )


@dataclass
class RunConfig:
    """Resolved CLI invocation: one command plus its inputs and flags."""

    command: str
    input_paths: tuple[str, ...] = ()
    r: int | None = None
    r1: int | None = None
    r2: int | None = None
    r_max: int = 8
    break_index: int | None = None
    pi0: float = 0.45
    bandwidth: int | None = None
    level: float = 0.05
    seed: int = 0
    n_reps: int = 1000
    output_path: str | None = None
    standardize: bool = True
    sup_wald: bool = False
    baseline: bool = False
    ridge: float = 0.0
    transpose: bool = False
    family: str | None = None
    d: int | None = None
    T: int | None = None
    params: dict = field(default_factory=dict)
    pipeline: str = "wald"
    workers: int | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")


def _panel_payload(path: str, transpose: bool) -> PanelPayload:
    panel = load_csv(path, transpose=transpose)
    names = list(panel.series_names) if panel.series_names else None
    return PanelPayload(data=panel.data.tolist(), series_names=names)


def build_request(config: RunConfig):
    """Translate a RunConfig into the request model for its command."""
    common = dict(
        level=config.level,
        bandwidth=config.bandwidth,
        sup_wald=config.sup_wald,
        pi0=config.pi0,
        standardize=config.standardize,
        ridge=config.ridge,
    )
    if config.command == "test-two-subject":
        return TwoSubjectTestRequest(
            panel1=_panel_payload(config.input_paths[0], config.transpose),
            panel2=_panel_payload(config.input_paths[1], config.transpose),
            r=config.r,
            r_max=config.r_max,
            **common,
        )
    if config.command == "test-changepoint":
        if config.break_index is None:
            raise ValueError("test-changepoint requires a break index")
        return ChangepointTestRequest(
            panel=_panel_payload(config.input_paths[0], config.transpose),
            break_index=config.break_index,
            r=config.r,
            r_max=config.r_max,
            baseline=config.baseline,
            **common,
        )
    if config.command == "test-diff-r":
        if config.r1 is None or config.r2 is None:
            raise ValueError("test-diff-r requires r1 and r2")
        return DiffRTestRequest(
            panel1=_panel_payload(config.input_paths[0], config.transpose),
            panel2=_panel_payload(config.input_paths[1], config.transpose),
            r1=config.r1,
            r2=config.r2,
            **common,
        )
    if config.command == "estimate-factors":
        return EstimateFactorsRequest(
            panel=_panel_payload(config.input_paths[0], config.transpose),
            r_max=config.r_max,
            standardize=config.standardize,
        )
    if config.family is None or config.d is None or config.T is None:
        raise ValueError("simulate requires family, d and T")
    return SimulateRequest(
        family=config.family,
        d=config.d,
        T=config.T,
        r=config.r,
        r1=config.r1,
        r2=config.r2,
        params=config.params,
        n_reps=config.n_reps,
        level=config.level,
        seed=config.seed,
        pipeline=config.pipeline,
        pi0=config.pi0,
        bandwidth=config.bandwidth,
        workers=config.workers,
    )


_DISPATCH = {
    "test-two-subject": run_two_subject,
    "test-changepoint": run_changepoint,
    "test-diff-r": run_diff_r,
    "estimate-factors": run_estimate_factors,
    "simulate": run_simulate,
}


def document_to_json(document) -> str:
    """Serialize a report document with a stable key order."""
    return json.dumps(document.model_dump(), sort_keys=True, indent=2)


def run(config: RunConfig):
    """Execute one CLI command and return its report document.

    Loads CSV inputs where the command takes them, annotates the config echo
    with the input paths and writes the JSON document to ``output_path``
    when one is configured.
    """
    request = build_request(config)
    document = _DISPATCH[config.command](request)
    if config.input_paths:
        document.config["input_paths"] = list(config.input_paths)
    if config.output_path:
        Path(config.output_path).write_text(document_to_json(document) + "\n")
    return document
