"""Command-line client for the evaluation service.

The CLI builds the same request models the HTTP API accepts and dispatches
them either to the in-process handlers (default) or to a running service
(``--server URL``); artifact bytes always come back in the response and are
written locally, atomically. Subcommands:

    evaluate --config cfg.yaml --out report_dir [--metrics a,b] [--seed N]
             [--epsilon2 X] [--server URL]
    validate --dataset d.jsonl --corpus c.jsonl [--server URL]
    version
    serve [--host H] [--port P]

Exit codes: 0 success, 1 completed with metric-level warnings, 2 input
error (bad config, unreadable files, schema violations).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import httpx
import yaml

from .corpus import DatasetError
from .proximity import DegenerateDenominatorError
from .report import write_report_dir
from .service import (
    EvaluateRequest,
    EvaluateResponse,
    SettingsModel,
    ValidateRequest,
    ValidateResponse,
    VersionResponse,
    handle_evaluate,
    handle_validate,
    handle_version,
)

EXIT_OK = 0
EXIT_WARNINGS = 1
EXIT_INPUT_ERROR = 2


class InputError(Exception):
    """Anything that should terminate the CLI with exit code 2."""


class LocalClient:
    """Dispatches requests to the service handlers in this process."""

    def evaluate(self, request: EvaluateRequest) -> EvaluateResponse:
        return handle_evaluate(request)

    def validate(self, request: ValidateRequest) -> ValidateResponse:
        return handle_validate(request)

    def version(self) -> VersionResponse:
        return handle_version()


class RemoteClient:
    """Dispatches requests to a running service over HTTP."""

    def __init__(self, base_url: str):
        self.base_url = base_url.rstrip("/")

    def _post(self, path: str, payload: dict) -> dict:
        response = httpx.post(self.base_url + path, json=payload, timeout=600.0)
        if response.status_code == 422:
            detail = response.json().get("detail", response.text)
            raise InputError(str(detail))
        response.raise_for_status()
        return response.json()

    def evaluate(self, request: EvaluateRequest) -> EvaluateResponse:
        return EvaluateResponse(**self._post("/evaluate", request.model_dump()))

    def validate(self, request: ValidateRequest) -> ValidateResponse:
        return ValidateResponse(**self._post("/validate", request.model_dump()))

    def version(self) -> VersionResponse:
        response = httpx.get(self.base_url + "/version", timeout=60.0)
        response.raise_for_status()
        return VersionResponse(**response.json())


def _client(args):
    return RemoteClient(args.server) if getattr(args, "server", None) else LocalClient()


def _read_file(path: Path, role: str) -> str:
    if not path.exists():
        raise InputError(f"{role} file not found: {path}")
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {role} file {path}: {exc}") from exc


def _load_run_config(path: Path) -> tuple[Path, Path, SettingsModel]:
    """Parse the declarative run config (YAML or JSON): dataset/corpus paths
    plus evaluation settings. Paths are resolved relative to the config file."""
    raw = _read_file(path, "config")
    try:
        data = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise InputError(f"config {path} is not valid YAML/JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"config {path} must be a mapping")
    try:
        dataset = data.pop("dataset")
        corpus = data.pop("corpus")
    except KeyError as exc:
        raise InputError(f"config {path} is missing required key {exc}") from exc
    try:
        settings = SettingsModel(**data)
    except Exception as exc:
        raise InputError(f"config {path} is invalid: {exc}") from exc
    base = path.parent
    return base / str(dataset), base / str(corpus), settings


def _apply_overrides(settings: SettingsModel, args) -> SettingsModel:
    update = {}
    if args.metrics is not None:
        update["metrics"] = [m.strip() for m in args.metrics.split(",") if m.strip()]
    if args.seed is not None:
        update["seed"] = args.seed
    if args.epsilon2 is not None:
        update["epsilon2"] = args.epsilon2
    if not update:
        return settings
    data = settings.model_dump()
    data.update(update)
    try:
        return SettingsModel(**data)
    except Exception as exc:
        raise InputError(f"invalid override: {exc}") from exc


def cmd_evaluate(args) -> int:
    config_path = Path(args.config)
    dataset_path, corpus_path, settings = _load_run_config(config_path)
    settings = _apply_overrides(settings, args)
    request = EvaluateRequest(
        dataset_jsonl=_read_file(dataset_path, "dataset"),
        corpus_jsonl=_read_file(corpus_path, "corpus"),
        dataset_name=dataset_path.name,
        corpus_name=corpus_path.name,
        settings=settings,
    )
    response = _client(args).evaluate(request)
    try:
        out_dir = write_report_dir(response.files, args.out)
    except FileExistsError as exc:
        raise InputError(str(exc)) from exc
    print(f"report written to {out_dir} ({len(response.files)} files)")
    for key, value in sorted(response.summary.items()):
        print(f"  {key}: {value}")
    if response.warnings:
        print(f"{len(response.warnings)} warning(s):", file=sys.stderr)
        for warning in response.warnings:
            print(f"  {warning}", file=sys.stderr)
        return EXIT_WARNINGS
    return EXIT_OK


def cmd_validate(args) -> int:
    dataset_path = Path(args.dataset)
    corpus_path = Path(args.corpus)
    request = ValidateRequest(
        dataset_jsonl=_read_file(dataset_path, "dataset"),
        corpus_jsonl=_read_file(corpus_path, "corpus"),
        dataset_name=dataset_path.name,
        corpus_name=corpus_path.name,
    )
    report = _client(args).validate(request)
    print(f"instances: {report.n_instances}")
    print(f"counterfactuals: {report.n_counterfactuals}")
    print(f"with adversarial twins: {report.n_with_adversarial}")
    for label in sorted(report.corpus_sizes):
        print(f"corpus[{label}]: {report.corpus_sizes[label]}")
    if report.warnings:
        print(f"{len(report.warnings)} warning(s):", file=sys.stderr)
        for warning in report.warnings:
            print(f"  {warning}", file=sys.stderr)
        return EXIT_WARNINGS
    print("no warnings")
    return EXIT_OK


def cmd_version(args) -> int:
    info = _client(args).version()
    print(f"{info.name} {info.version}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("faithbench.service:app", host=args.host, port=args.port)
    return EXIT_OK


def run_evaluation(config_path: str | Path, out_dir: str | Path,
                   metrics: str | None = None, seed: int | None = None,
                   epsilon2: float | None = None, server: str | None = None) -> int:
    """Programmatic equivalent of ``faithbench evaluate``."""
    args = argparse.Namespace(
        config=str(config_path), out=str(out_dir), metrics=metrics,
        seed=seed, epsilon2=epsilon2, server=server,
    )
    return cmd_evaluate(args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faithbench",
        description="Faithfulness evaluation for textual counterfactual explanations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="run the evaluation and write a report directory")
    p_eval.add_argument("--config", required=True, help="run config file (YAML or JSON)")
    p_eval.add_argument("--out", required=True, help="output directory (must not exist)")
    p_eval.add_argument("--metrics", default=None,
                        help="comma-separated subset of metrics to run")
    p_eval.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_eval.add_argument("--epsilon2", type=float, default=None,
                        help="override the stability bound")
    p_eval.add_argument("--server", default=None, help="evaluate via a running service URL")
    p_eval.set_defaults(func=cmd_evaluate)

    p_val = sub.add_parser("validate", help="validate a dataset and corpus pair")
    p_val.add_argument("--dataset", required=True)
    p_val.add_argument("--corpus", required=True)
    p_val.add_argument("--server", default=None, help="validate via a running service URL")
    p_val.set_defaults(func=cmd_validate)

    p_ver = sub.add_parser("version", help="print the engine version")
    p_ver.add_argument("--server", default=None, help="query a running service URL")
    p_ver.set_defaults(func=cmd_version)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (DatasetError, DegenerateDenominatorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except httpx.HTTPError as exc:
        print(f"error: service request failed: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
