"""End-to-end evaluation: run the metric pipelines and assemble artifacts.

The engine consumes parsed inputs plus a :class:`MetricConfig` and produces
the full artifact set as in-memory bytes: ``report.json`` with every table,
and one plot-ready CSV per figure-equivalent table. Callers (CLI, service)
decide where the bytes go. Metric sections run independently, so a
subset run produces tables byte-identical to the same tables of a full run.
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .connectedness import connectedness_curve
from .corpus import (
    EvaluationInstance,
    GroundTruthCorpus,
    MetricConfig,
    ValidationReport,
    loads_dataset,
    validate_dataset,
)
from .proximity import ProximityResult, evaluate_counterfactual
from .report import emit_histogram, histogram_json, render_csv, render_json
from .robustness import adversarial_comparison
from .stability import neighbor_pairs, stability_summary
from .textmetrics import bleu, self_bert, self_bleu

ALL_METRICS = ("proximity", "connectedness", "stability", "textmetrics", "robustness")

CSV_FILES = {
    "proximity": ("proximity_hist.csv", "outlier_curve.csv"),
    "connectedness": ("connectedness_curve.csv",),
    "stability": ("stability_scatter.csv", "stability_bins.csv"),
    "textmetrics": ("textmetrics.csv",),
    "robustness": ("robustness_shift.csv",),
}


@dataclass(frozen=True)
class EvaluationOutcome:
    files: dict[str, str]      # artifact name -> exact content
    warnings: tuple[str, ...]
    summary: dict              # headline numbers for console display


def _digest(content: str) -> str:
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


def _summary_stats(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {
        "count": int(arr.size),
        "mean": float(arr.mean()),
        "median": float(np.percentile(arr, 50)),
        "q1": float(np.percentile(arr, 25)),
        "q3": float(np.percentile(arr, 75)),
        "min": float(arr.min()),
        "max": float(arr.max()),
    }


def _sorted_labels(groups: dict[str, list]) -> list[str]:
    return sorted(groups)


class _ProximitySection:
    def __init__(
        self,
        instances: tuple[EvaluationInstance, ...],
        corpus: GroundTruthCorpus,
        config: MetricConfig,
        warnings: list[str],
    ):
        self.results: list[ProximityResult] = []
        self.foil_of: dict[str, str] = {}
        for inst in instances:
            if corpus.partition_size(inst.foil_label) == 0:
                warnings.append(
                    f"proximity: instance {inst.id!r} skipped, "
                    f"empty foil class {inst.foil_label!r}"
                )
                continue
            partition = corpus.partition(inst.foil_label)
            self.foil_of[inst.id] = inst.foil_label
            for i, cf in enumerate(inst.counterfactuals):
                self.results.append(
                    evaluate_counterfactual(inst.original, cf, i, partition, config.k_grid)
                )
        self.config = config

    def _histograms(self) -> tuple[list[dict], list[tuple]]:
        edges = self.config.proximity_bin_edges
        section = []
        csv_rows = []
        for aggregation in ("all", "first"):
            if aggregation == "all":
                chosen = self.results
            else:
                chosen = [r for r in self.results if r.counterfactual_index == 0]
            by_label: dict[str, list[float]] = {}
            for r in chosen:
                by_label.setdefault(self.foil_of[r.instance_id], []).append(r.p_score)
            by_label["overall"] = [r.p_score for r in chosen]
            for label in _sorted_labels(by_label):
                rows = emit_histogram(by_label[label], edges)
                section.append(
                    {
                        "aggregation": aggregation,
                        "foil_label": label,
                        "bins": histogram_json(rows),
                        "n": len(by_label[label]),
                    }
                )
                csv_rows.extend(
                    (aggregation, label, r.low, r.high, r.count, r.fraction) for r in rows
                )
        return section, csv_rows

    def _outlier_curves(self) -> tuple[list[dict], list[tuple]]:
        section = []
        csv_rows = []
        for k in self.config.k_grid:
            by_label: dict[str, list[float]] = {}
            for r in self.results:
                factor = r.per_k[k][1]
                by_label.setdefault(self.foil_of[r.instance_id], []).append(factor)
            by_label["overall"] = [r.per_k[k][1] for r in self.results]
            for label in _sorted_labels(by_label):
                values = by_label[label]
                if not values:
                    continue
                stats = _summary_stats(values)
                stats["frac_gt_2"] = float(np.mean([v > 2.0 for v in values]))
                section.append({"k": k, "foil_label": label, **stats})
                csv_rows.append(
                    (
                        k, label, stats["count"], stats["mean"], stats["median"],
                        stats["q1"], stats["q3"], stats["min"], stats["max"],
                        stats["frac_gt_2"],
                    )
                )
        return section, csv_rows

    def render(self) -> tuple[dict, dict[str, str]]:
        hist_section, hist_rows = self._histograms()
        curve_section, curve_rows = self._outlier_curves()
        per_cf = [
            {
                "instance_id": r.instance_id,
                "counterfactual_index": r.counterfactual_index,
                "p_score": r.p_score,
                "nearest_foil_id": r.nearest_foil_id,
                "per_k": [
                    {"k": k, "lrd": v[0], "outlier_factor": v[1]}
                    for k, v in sorted(r.per_k.items())
                ],
            }
            for r in self.results
        ]
        json_section = {
            "histograms": hist_section,
            "outlier_curves": curve_section,
            "per_counterfactual": per_cf,
            "bin_edges": list(self.config.proximity_bin_edges),
        }
        files = {
            "proximity_hist.csv": render_csv(
                ("aggregation", "foil_label", "bin_low", "bin_high", "count", "fraction"),
                hist_rows,
            ),
            "outlier_curve.csv": render_csv(
                ("k", "foil_label", "count", "mean", "median", "q1", "q3", "min", "max",
                 "frac_gt_2"),
                curve_rows,
            ),
        }
        return json_section, files


def _connectedness_section(instances, corpus, config, warnings):
    cells, cell_warnings = connectedness_curve(
        instances, corpus, config.k_grid, config.eps_rule, config.min_points
    )
    warnings.extend(f"connectedness: {w}" for w in cell_warnings)
    json_section = {
        "curve": [
            {
                "k": c.k,
                "foil_label": c.foil_label,
                "eps": c.eps,
                "connected": c.connected,
                "total": c.total,
                "fraction": c.fraction,
            }
            for c in cells
        ],
        "eps_rule": asdict(config.eps_rule),
    }
    csv_rows = [
        (c.k, c.foil_label, c.eps, c.connected, c.total, c.fraction) for c in cells
    ]
    files = {
        "connectedness_curve.csv": render_csv(
            ("k", "foil_label", "eps", "connected", "total", "fraction"), csv_rows
        )
    }
    return json_section, files


def _stability_section(instances, config, warnings):
    pairs, degenerate = neighbor_pairs(
        instances, config.stability_neighbor_radius, config.stability_all_pairs
    )
    if degenerate:
        warnings.append(
            f"stability: {degenerate} identical-original pair(s) excluded from pairing"
        )
    summary = stability_summary(pairs, config.stability_bins, degenerate)
    json_section = {
        "radius": config.stability_neighbor_radius,
        "all_pairs": config.stability_all_pairs,
        "pairs": summary.pairs,
        "degenerate_pairs": summary.degenerate_pairs,
        "max_ratio": summary.max_ratio,
        "slope": summary.slope,
        "intercept": summary.intercept,
        "slope_r2": summary.slope_r2,
        "slope_through_origin": summary.slope_through_origin,
        "epsilon2": config.epsilon2,
        "stable": (
            summary.max_ratio < config.epsilon2 if summary.max_ratio is not None else None
        ),
        "bins": [
            {
                "low": b.low, "high": b.high, "count": b.count, "mean": b.mean,
                "median": b.median, "q1": b.q1, "q3": b.q3,
            }
            for b in summary.per_bin
        ],
    }
    files = {
        "stability_scatter.csv": render_csv(
            ("input_distance", "cf_distance", "foil_label"),
            [(p.input_distance, p.cf_distance, p.foil_label) for p in pairs],
        ),
        "stability_bins.csv": render_csv(
            ("bin_low", "bin_high", "count", "mean", "median", "q1", "q3"),
            [(b.low, b.high, b.count, b.mean, b.median, b.q1, b.q3) for b in summary.per_bin],
        ),
    }
    return json_section, files


def _textmetrics_section(instances, config, warnings):
    rows: list[tuple] = []  # (instance_id, cf_index, metric, value)
    collected: dict[str, list[float]] = {
        "bleu": [], "self_bleu": [],
        "self_bert_precision": [], "self_bert_recall": [], "self_bert_f1": [],
    }
    for inst in instances:
        for i, cf in enumerate(inst.counterfactuals):
            score = bleu(
                cf.tokens, [inst.original.tokens],
                max_n=config.bleu_max_n, smoothing=config.bleu_smoothing,
            )
            rows.append((inst.id, i, "bleu", score))
            collected["bleu"].append(score)
            if cf.token_embeddings is None or inst.original.token_embeddings is None:
                warnings.append(
                    f"textmetrics: token embeddings missing for {inst.id!r} "
                    f"counterfactual {i}, embedding score skipped"
                )
            else:
                p, r, f1 = self_bert(cf.token_embeddings, inst.original.token_embeddings)
                for metric, value in (
                    ("self_bert_precision", p),
                    ("self_bert_recall", r),
                    ("self_bert_f1", f1),
                ):
                    rows.append((inst.id, i, metric, value))
                    collected[metric].append(value)
        if len(inst.counterfactuals) >= 2:
            score = self_bleu(
                [cf.tokens for cf in inst.counterfactuals],
                max_n=config.bleu_max_n, smoothing=config.bleu_smoothing,
            )
            rows.append((inst.id, None, "self_bleu", score))
            collected["self_bleu"].append(score)

    edges = config.score_bin_edges
    summaries = []
    for metric in sorted(collected):
        values = collected[metric]
        hist = emit_histogram(values, edges)
        summaries.append(
            {
                "metric": metric,
                "n": len(values),
                "mean": float(np.mean(values)) if values else None,
                "bins": histogram_json(hist),
            }
        )
    json_section = {
        "summaries": summaries,
        "bin_edges": list(edges),
        "scores": [
            {"instance_id": iid, "counterfactual_index": ci, "metric": m, "value": v}
            for iid, ci, m, v in rows
        ],
    }
    files = {
        "textmetrics.csv": render_csv(
            ("instance_id", "counterfactual_index", "metric", "value"), rows
        )
    }
    return json_section, files


def _robustness_section(instances, corpus, config, seed, warnings):
    report = adversarial_comparison(instances, corpus, config, seed=seed)
    if report is None:
        warnings.append("robustness: no adversarial data, report absent")
        return None, {}
    warnings.extend(f"robustness: {w}" for w in report.warnings)
    json_section = {
        "sample_size": report.sample_size,
        "shift_sample_cap": config.shift_sample_cap,
        "clean_vs_adv": [
            {
                "metric": s.metric,
                "k": s.k,
                "foil_label": s.foil_label,
                "clean": s.clean,
                "adversarial": s.adversarial,
                "delta": s.delta,
            }
            for s in report.clean_vs_adv
        ],
        "shift_points": [
            {
                "instance_id": p.instance_id,
                "input_similarity": p.input_similarity,
                "cf_similarity": p.cf_similarity,
            }
            for p in report.shift_points
        ],
    }
    if report.stability_clean is not None:
        json_section["stability_clean_max_ratio"] = report.stability_clean.max_ratio
        json_section["stability_adversarial_max_ratio"] = (
            report.stability_adversarial.max_ratio
        )
    files = {
        "robustness_shift.csv": render_csv(
            ("input_similarity", "cf_similarity", "instance_id"),
            [(p.input_similarity, p.cf_similarity, p.instance_id) for p in report.shift_points],
        )
    }
    return json_section, files


def _validation_json(report: ValidationReport) -> dict:
    return {
        "n_instances": report.n_instances,
        "n_counterfactuals": report.n_counterfactuals,
        "counterfactuals_per_instance": list(report.counterfactuals_per_instance),
        "n_with_adversarial": report.n_with_adversarial,
        "corpus_sizes": dict(report.corpus_sizes),
        "empty_foil_labels": list(report.empty_foil_labels),
        "instances_without_adversarial": list(report.instances_without_adversarial),
        "warnings": list(report.warnings),
    }


def _config_json(config: MetricConfig) -> dict:
    echo = asdict(config)
    echo["k_grid"] = list(config.k_grid)
    echo["stability_bins"] = [list(b) for b in config.stability_bins]
    echo["proximity_bin_edges"] = list(config.proximity_bin_edges)
    echo["score_bin_edges"] = list(config.score_bin_edges)
    return echo


def run_pipeline(
    instances: tuple[EvaluationInstance, ...],
    corpus: GroundTruthCorpus,
    config: MetricConfig,
    metrics: tuple[str, ...] = ALL_METRICS,
    seed: int = 0,
    dataset_digest: str = "",
    corpus_digest: str = "",
) -> EvaluationOutcome:
    """Run the selected metric sections and render all artifacts."""
    unknown = [m for m in metrics if m not in ALL_METRICS]
    if unknown:
        raise ValueError(f"unknown metrics: {', '.join(unknown)}")
    warnings: list[str] = []
    validation = validate_dataset(instances, corpus)
    warnings.extend(f"validation: {w}" for w in validation.warnings)

    bundle: dict = {
        "run": {
            "engine": "faithbench",
            "version": __version__,
            "seed": seed,
            "metrics": sorted(metrics),
            "config": _config_json(config),
            "inputs": {
                "dataset_sha256": dataset_digest,
                "corpus_sha256": corpus_digest,
            },
        },
        "validation": _validation_json(validation),
    }
    files: dict[str, str] = {}
    summary: dict = {
        "instances": validation.n_instances,
        "counterfactuals": validation.n_counterfactuals,
    }

    if "proximity" in metrics:
        section = _ProximitySection(instances, corpus, config, warnings)
        bundle["proximity"], prox_files = section.render()
        files.update(prox_files)
        if section.results:
            summary["p_score_mean"] = float(
                np.mean([r.p_score for r in section.results])
            )
    if "connectedness" in metrics:
        bundle["connectedness"], conn_files = _connectedness_section(
            instances, corpus, config, warnings
        )
        files.update(conn_files)
        overall = [
            c for c in bundle["connectedness"]["curve"] if c["foil_label"] == "overall"
        ]
        if overall:
            summary["connected_fraction_max_k"] = overall[-1]["fraction"]
    if "stability" in metrics:
        bundle["stability"], stab_files = _stability_section(instances, config, warnings)
        files.update(stab_files)
        summary["stability_slope"] = bundle["stability"]["slope"]
    if "textmetrics" in metrics:
        bundle["textmetrics"], text_files = _textmetrics_section(
            instances, config, warnings
        )
        files.update(text_files)
        for entry in bundle["textmetrics"]["summaries"]:
            if entry["metric"] == "bleu":
                summary["bleu_mean"] = entry["mean"]
    if "robustness" in metrics:
        section, robust_files = _robustness_section(
            instances, corpus, config, seed, warnings
        )
        bundle["robustness"] = section
        files.update(robust_files)

    bundle["warnings"] = list(warnings)
    files["report.json"] = render_json(bundle)
    return EvaluationOutcome(
        files=files, warnings=tuple(warnings), summary=summary
    )


def evaluate_content(
    dataset_content: str,
    corpus_content: str,
    config: MetricConfig,
    metrics: tuple[str, ...] = ALL_METRICS,
    seed: int = 0,
    dataset_name: str = "dataset",
    corpus_name: str = "corpus",
) -> EvaluationOutcome:
    """Parse interchange content and run the pipeline over it."""
    instances, corpus = loads_dataset(
        dataset_content, corpus_content, dataset_name, corpus_name
    )
    return run_pipeline(
        instances,
        corpus,
        config,
        metrics=metrics,
        seed=seed,
        dataset_digest=_digest(dataset_content),
        corpus_digest=_digest(corpus_content),
    )
