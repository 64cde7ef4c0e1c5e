"""HTTP service wrapping the evaluation engine.

The API is content-based: clients post the dataset and corpus JSONL as
strings together with the evaluation settings, and receive every report
artifact back as named file contents. Nothing touches the server
filesystem, so the CLI can run the same handlers in-process or against a
remote instance and write the returned bytes wherever it likes.

Endpoints:
    GET  /version   -> engine name and version
    POST /validate  -> structural validation report for a dataset + corpus
    POST /evaluate  -> full artifact set, warnings, and headline summary
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import __version__
from .corpus import (
    DatasetError,
    EpsRule,
    MetricConfig,
    loads_dataset,
    validate_dataset,
)
from .engine import ALL_METRICS, evaluate_content
from .proximity import DegenerateDenominatorError

# Failures caused by the submitted data rather than by the service itself.
INPUT_ERRORS = (DatasetError, DegenerateDenominatorError)


class EpsRuleModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["fixed", "knn_mean"] = "knn_mean"
    value: float | None = None
    k: int | None = 4

    def to_eps_rule(self) -> EpsRule:
        return EpsRule(kind=self.kind, value=self.value, k=self.k)


class SettingsModel(BaseModel):
    """Evaluation knobs; defaults mirror :class:`MetricConfig`.

    Unknown keys are rejected rather than ignored: the settings double as
    the CLI's documented config-file schema, where a typo silently falling
    back to a default would corrupt a run.
    """

    model_config = ConfigDict(extra="forbid")

    k_grid: list[int] = Field(default_factory=lambda: list(range(2, 11)))
    eps_rule: EpsRuleModel = Field(default_factory=EpsRuleModel)
    stability_bins: list[tuple[float, float]] = Field(
        default_factory=lambda: [(0.0, 0.2), (0.2, 0.4), (0.4, 0.6)]
    )
    stability_neighbor_radius: float = 0.2
    stability_all_pairs: bool = False
    bleu_max_n: int = 4
    bleu_smoothing: float = 1e-9
    epsilon2: float = 3.0
    min_points: int = 2
    shift_sample_cap: int = 300
    robustness_stability: bool = False
    proximity_bin_edges: list[float] | None = None
    score_bin_edges: list[float] | None = None
    seed: int = 0
    metrics: list[str] = Field(default_factory=lambda: list(ALL_METRICS))

    @model_validator(mode="after")
    def _check(self) -> "SettingsModel":
        self.to_metric_config()  # raises ValueError on bad knob combinations
        if not self.metrics:
            raise ValueError("metrics must not be empty")
        unknown = [m for m in self.metrics if m not in ALL_METRICS]
        if unknown:
            raise ValueError(
                f"unknown metrics: {', '.join(unknown)} (valid: {', '.join(ALL_METRICS)})"
            )
        return self

    def to_metric_config(self) -> MetricConfig:
        kwargs = dict(
            k_grid=tuple(self.k_grid),
            eps_rule=self.eps_rule.to_eps_rule(),
            stability_bins=tuple(tuple(b) for b in self.stability_bins),
            stability_neighbor_radius=self.stability_neighbor_radius,
            stability_all_pairs=self.stability_all_pairs,
            bleu_max_n=self.bleu_max_n,
            bleu_smoothing=self.bleu_smoothing,
            epsilon2=self.epsilon2,
            min_points=self.min_points,
            shift_sample_cap=self.shift_sample_cap,
            robustness_stability=self.robustness_stability,
        )
        if self.proximity_bin_edges is not None:
            kwargs["proximity_bin_edges"] = tuple(self.proximity_bin_edges)
        if self.score_bin_edges is not None:
            kwargs["score_bin_edges"] = tuple(self.score_bin_edges)
        return MetricConfig(**kwargs)


class EvaluateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dataset_jsonl: str
    corpus_jsonl: str
    dataset_name: str = "dataset"
    corpus_name: str = "corpus"
    settings: SettingsModel = Field(default_factory=SettingsModel)


class EvaluateResponse(BaseModel):
    files: dict[str, str]
    warnings: list[str]
    summary: dict


class ValidateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dataset_jsonl: str
    corpus_jsonl: str
    dataset_name: str = "dataset"
    corpus_name: str = "corpus"


class ValidateResponse(BaseModel):
    n_instances: int
    n_counterfactuals: int
    counterfactuals_per_instance: list[int]
    n_with_adversarial: int
    corpus_sizes: dict[str, int]
    empty_foil_labels: list[str]
    instances_without_adversarial: list[str]
    warnings: list[str]


class VersionResponse(BaseModel):
    name: str = "faithbench"
    version: str = __version__


def handle_version() -> VersionResponse:
    return VersionResponse()


def handle_validate(request: ValidateRequest) -> ValidateResponse:
    instances, corpus = loads_dataset(
        request.dataset_jsonl,
        request.corpus_jsonl,
        request.dataset_name,
        request.corpus_name,
    )
    report = validate_dataset(instances, corpus)
    return ValidateResponse(
        n_instances=report.n_instances,
        n_counterfactuals=report.n_counterfactuals,
        counterfactuals_per_instance=list(report.counterfactuals_per_instance),
        n_with_adversarial=report.n_with_adversarial,
        corpus_sizes=dict(report.corpus_sizes),
        empty_foil_labels=list(report.empty_foil_labels),
        instances_without_adversarial=list(report.instances_without_adversarial),
        warnings=list(report.warnings),
    )


def handle_evaluate(request: EvaluateRequest) -> EvaluateResponse:
    outcome = evaluate_content(
        request.dataset_jsonl,
        request.corpus_jsonl,
        request.settings.to_metric_config(),
        metrics=tuple(request.settings.metrics),
        seed=request.settings.seed,
        dataset_name=request.dataset_name,
        corpus_name=request.corpus_name,
    )
    return EvaluateResponse(
        files=outcome.files,
        warnings=list(outcome.warnings),
        summary=outcome.summary,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="faithbench",
        version=__version__,
        description="Faithfulness evaluation for textual counterfactual explanations",
    )

    @app.get("/version", response_model=VersionResponse)
    def version() -> VersionResponse:
        return handle_version()

    @app.post("/validate", response_model=ValidateResponse)
    def validate(request: ValidateRequest) -> ValidateResponse:
        try:
            return handle_validate(request)
        except INPUT_ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate(request: EvaluateRequest) -> EvaluateResponse:
        try:
            return handle_evaluate(request)
        except INPUT_ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    return app


app = create_app()
