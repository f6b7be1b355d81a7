"""Command-line client for the loading-structure tests.

The CLI is a thin shell around the service layer: it parses arguments,
loads CSV inputs, and either executes the command in process or, with
``--server``, posts the identical request payload to a running spantest
service. Exit codes: 0 on completion, 2 on rejection when
``--exit-on-reject`` is set, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import SpantestError
from .runner import RunConfig, build_request, document_to_json, run
from .simulation import FAMILIES, WORKERS_ENV_VAR

_ENDPOINTS = {
    "test-two-subject": "/test/two-subject",
    "test-changepoint": "/test/changepoint",
    "test-diff-r": "/test/diff-r",
    "estimate-factors": "/estimate-factors",
    "simulate": "/simulate",
}


def _add_common_flags(sub: argparse.ArgumentParser, with_test_flags: bool = True):
    sub.add_argument("--level", type=float, default=0.05, help="significance level")
    sub.add_argument("--output", help="write the JSON report to this path")
    sub.add_argument(
        "--server",
        help="base URL of a running spantest service; the command is sent there",
    )
    sub.add_argument(
        "--transpose", action="store_true", help="input CSV stores series in rows"
    )
    sub.add_argument(
        "--no-standardize",
        action="store_true",
        help="skip per-series standardization",
    )
    if with_test_flags:
        sub.add_argument("--bandwidth", type=int, help="Bartlett bandwidth override")
        sub.add_argument(
            "--sup-wald",
            action="store_true",
            help="also scan splits around the midpoint (sup-Wald)",
        )
        sub.add_argument(
            "--pi0", type=float, default=0.45, help="sup-Wald window edge"
        )
        sub.add_argument(
            "--ridge",
            type=float,
            nargs="?",
            const=1e-6,
            default=0.0,
            help="diagonal jitter scale for the long-run variance (default off)",
        )
        sub.add_argument(
            "--exit-on-reject",
            action="store_true",
            help="exit with status 2 when the test rejects",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spantest",
        description="Test whether factor models share a loading space.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    two = commands.add_parser(
        "test-two-subject", help="test two panels for a common loading space"
    )
    two.add_argument("panel1", help="CSV with the first panel")
    two.add_argument("panel2", help="CSV with the second panel")
    two.add_argument("-r", type=int, help="factor count (estimated when omitted)")
    two.add_argument("--r-max", type=int, default=8, help="cap for estimating r")
    _add_common_flags(two)

    cp = commands.add_parser(
        "test-changepoint",
        help="classify a known loading break as rotational or genuine",
    )
    cp.add_argument("panel", help="CSV with the full series")
    cp.add_argument("--break-index", type=int, required=True, help="break date index")
    cp.add_argument("-r", type=int, help="factor count (estimated when omitted)")
    cp.add_argument("--r-max", type=int, default=8, help="cap for estimating r")
    cp.add_argument(
        "--baseline",
        action="store_true",
        help="also run the untransformed structural-change test for contrast",
    )
    _add_common_flags(cp)

    dnf = commands.add_parser(
        "test-diff-r", help="two-subject test with different factor counts"
    )
    dnf.add_argument("panel1", help="CSV with the first panel")
    dnf.add_argument("panel2", help="CSV with the second panel")
    dnf.add_argument("--r1", type=int, required=True, help="factors in panel 1")
    dnf.add_argument("--r2", type=int, required=True, help="factors in panel 2 (<= r1)")
    _add_common_flags(dnf)

    est = commands.add_parser(
        "estimate-factors", help="estimate the number of factors in a panel"
    )
    est.add_argument("panel", help="CSV with the panel")
    est.add_argument("--r-max", type=int, default=8)
    _add_common_flags(est, with_test_flags=False)

    sim = commands.add_parser(
        "simulate", help="Monte Carlo rejection rate for a named scenario"
    )
    sim.add_argument("family", choices=sorted(FAMILIES), help="DGP family")
    sim.add_argument("--d", type=int, required=True, help="cross-section size")
    sim.add_argument("--T", type=int, required=True, help="sample length")
    sim.add_argument("-r", type=int, help="factor count override")
    sim.add_argument("--r1", type=int, help="pre-break factor count (dnf families)")
    sim.add_argument("--r2", type=int, help="post-break factor count (dnf families)")
    sim.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="family parameter, e.g. --param b=1 --param pi=0.5 (repeatable)",
    )
    sim.add_argument("--reps", type=int, default=1000, help="number of replications")
    sim.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    sim.add_argument(
        "--pipeline",
        choices=("wald", "sup_wald", "baseline"),
        default="wald",
        help="statistic pipeline to run on each replication",
    )
    sim.add_argument("--pi0", type=float, default=0.45, help="sup-Wald window edge")
    sim.add_argument("--bandwidth", type=int, help="Bartlett bandwidth override")
    sim.add_argument("--level", type=float, default=0.05)
    sim.add_argument("--output", help="write the JSON report to this path")
    sim.add_argument("--server", help="base URL of a running spantest service")
    sim.add_argument(
        "--workers",
        type=int,
        help=f"parallel replication workers (default: ${WORKERS_ENV_VAR} or CPU count)",
    )

    serve = commands.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    return parser


def _parse_params(pairs: list[str]) -> dict:
    params = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ValueError(f"--param expects KEY=VALUE, got {pair!r}")
        params[key.strip()] = float(value)
    return params


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    command = args.command
    if command == "test-two-subject":
        return RunConfig(
            command=command,
            input_paths=(args.panel1, args.panel2),
            r=args.r,
            r_max=args.r_max,
            level=args.level,
            bandwidth=args.bandwidth,
            sup_wald=args.sup_wald,
            pi0=args.pi0,
            standardize=not args.no_standardize,
            ridge=args.ridge,
            transpose=args.transpose,
            output_path=args.output,
        )
    if command == "test-changepoint":
        return RunConfig(
            command=command,
            input_paths=(args.panel,),
            r=args.r,
            r_max=args.r_max,
            break_index=args.break_index,
            baseline=args.baseline,
            level=args.level,
            bandwidth=args.bandwidth,
            sup_wald=args.sup_wald,
            pi0=args.pi0,
            standardize=not args.no_standardize,
            ridge=args.ridge,
            transpose=args.transpose,
            output_path=args.output,
        )
    if command == "test-diff-r":
        return RunConfig(
            command=command,
            input_paths=(args.panel1, args.panel2),
            r1=args.r1,
            r2=args.r2,
            level=args.level,
            bandwidth=args.bandwidth,
            sup_wald=args.sup_wald,
            pi0=args.pi0,
            standardize=not args.no_standardize,
            ridge=args.ridge,
            transpose=args.transpose,
            output_path=args.output,
        )
    if command == "estimate-factors":
        return RunConfig(
            command=command,
            input_paths=(args.panel,),
            r_max=args.r_max,
            level=args.level,
            standardize=not args.no_standardize,
            transpose=args.transpose,
            output_path=args.output,
        )
    return RunConfig(
        command="simulate",
        family=args.family,
        d=args.d,
        T=args.T,
        r=args.r,
        r1=args.r1,
        r2=args.r2,
        params=_parse_params(args.param),
        n_reps=args.reps,
        seed=args.seed,
        pipeline=args.pipeline,
        pi0=args.pi0,
        bandwidth=args.bandwidth,
        level=args.level,
        output_path=args.output,
        workers=args.workers,
    )


def _run_remote(server: str, config: RunConfig) -> dict:
    import httpx

    request = build_request(config)
    url = server.rstrip("/") + _ENDPOINTS[config.command]
    response = httpx.post(url, json=request.model_dump(), timeout=None)
    if response.status_code != 200:
        raise SpantestError(
            f"server returned {response.status_code}: {response.text}"
        )
    document = response.json()
    if config.output_path:
        Path(config.output_path).write_text(
            json.dumps(document, sort_keys=True, indent=2) + "\n"
        )
    return document


def _summarize(doc: dict) -> list[str]:
    lines = []
    command = doc.get("command")
    if command == "simulate":
        lines.append(doc["summary"])
        lines.append(
            f"mean statistic {doc['mean_statistic']:.4f}, "
            f"{doc['n_failures']} failed replications, "
            f"{doc['elapsed_seconds']:.1f}s"
        )
        return lines
    if command == "estimate-factors":
        lines.append(f"estimated number of factors: {doc['r_hat']}")
        return lines
    wald_doc = doc.get("wald")
    if wald_doc:
        lines.append(
            f"Wald W = {wald_doc['statistic']:.4f} on {wald_doc['df']} df, "
            f"p = {wald_doc['p_value']:.4f} "
            f"(bandwidth {wald_doc['bandwidth']})"
        )
    sup_doc = doc.get("sup_wald")
    if sup_doc:
        lines.append(
            f"sup-Wald = {sup_doc['sup_statistic']:.4f} at pi = "
            f"{sup_doc['argmax_pi']:.3f}, critical value "
            f"{sup_doc['critical_value']:.4f}"
        )
    base_doc = doc.get("baseline")
    if base_doc:
        lines.append(
            f"baseline (untransformed) W = {base_doc['statistic']:.4f}, "
            f"p = {base_doc['p_value']:.4f}"
        )
    lines.append(f"verdict: {doc['verdict']}")
    return lines


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    try:
        config = _config_from_args(args)
        if getattr(args, "server", None):
            document = _run_remote(args.server, config)
        else:
            document = run(config).model_dump()
    except (SpantestError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for line in _summarize(document):
        print(line)

    if getattr(args, "exit_on_reject", False) and document.get("verdict") == (
        "reject common structure"
    ):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
