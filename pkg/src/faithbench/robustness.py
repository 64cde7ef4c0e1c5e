"""Adversarial robustness of the explanation pipeline.

Instances may carry an adversarial twin: a semantically close perturbation of
the original together with the counterfactuals generated for it. This module
recomputes proximity and connectedness on the twins and pairs the results
with the clean run over the *same* instance subset, so deltas isolate the
effect of the perturbation. It also reports the counterfactual shift
scatter: how similar the clean and adversarial counterfactuals remain as a
function of how similar the perturbed input is to the original.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connectedness import ConnectednessCell, connectedness_curve
from .corpus import EvaluationInstance, GroundTruthCorpus, MetricConfig
from .geometry import cosine_similarity
from .proximity import evaluate_counterfactual
from .stability import StabilitySummary, neighbor_pairs, stability_summary


@dataclass(frozen=True)
class ShiftPoint:
    instance_id: str
    input_similarity: float  # cos sim of original vs adversarial original
    cf_similarity: float     # cos sim of first clean vs first adversarial counterfactual


@dataclass(frozen=True)
class PairedStat:
    """One summary statistic computed on the clean and adversarial sides."""

    metric: str
    k: int | None
    foil_label: str
    clean: float
    adversarial: float

    @property
    def delta(self) -> float:
        return self.adversarial - self.clean


@dataclass(frozen=True)
class RobustnessReport:
    sample_size: int                   # instances with adversarial twins
    clean_vs_adv: tuple[PairedStat, ...]
    shift_points: tuple[ShiftPoint, ...]
    stability_clean: StabilitySummary | None = None
    stability_adversarial: StabilitySummary | None = None
    warnings: tuple[str, ...] = ()


def counterfactual_shift(instance: EvaluationInstance) -> tuple[float, float]:
    """(input similarity, counterfactual similarity) for one instance's twin."""
    if not instance.has_adversarial:
        raise ValueError(f"instance {instance.id!r} has no adversarial twin")
    input_sim = cosine_similarity(
        instance.original.sentence_embedding,
        instance.adversarial_original.sentence_embedding,
    )
    cf_sim = cosine_similarity(
        instance.counterfactuals[0].sentence_embedding,
        instance.adversarial_counterfactuals[0].sentence_embedding,
    )
    return input_sim, cf_sim


def _adversarial_view(inst: EvaluationInstance) -> EvaluationInstance:
    """The twin re-packaged as a plain instance so pipelines run unchanged."""
    return EvaluationInstance(
        original=inst.adversarial_original,
        foil_label=inst.foil_label,
        counterfactuals=inst.adversarial_counterfactuals,
    )


def _proximity_stats(
    instances: tuple[EvaluationInstance, ...],
    corpus: GroundTruthCorpus,
    k_grid: tuple[int, ...],
    warnings: list[str],
) -> dict[tuple[str, int | None, str], float]:
    """Mean p-score per class, and mean outlier factor per (k, class)."""
    p_scores: dict[str, list[float]] = {}
    lof: dict[tuple[int, str], list[float]] = {}
    for inst in instances:
        if corpus.partition_size(inst.foil_label) == 0:
            warnings.append(
                f"instance {inst.id!r}: empty foil class {inst.foil_label!r} skipped"
            )
            continue
        partition = corpus.partition(inst.foil_label)
        for i, cf in enumerate(inst.counterfactuals):
            result = evaluate_counterfactual(inst.original, cf, i, partition, k_grid)
            p_scores.setdefault(inst.foil_label, []).append(result.p_score)
            for k, (_, factor) in result.per_k.items():
                lof.setdefault((k, inst.foil_label), []).append(factor)
    stats: dict[tuple[str, int | None, str], float] = {}
    for label, values in p_scores.items():
        stats[("p_score_mean", None, label)] = float(np.mean(values))
    all_p = [v for values in p_scores.values() for v in values]
    if all_p:
        stats[("p_score_mean", None, "overall")] = float(np.mean(all_p))
    for (k, label), values in lof.items():
        stats[("outlier_factor_mean", k, label)] = float(np.mean(values))
    for k in k_grid:
        pooled = [v for (kk, _), vals in lof.items() if kk == k for v in vals]
        if pooled:
            stats[("outlier_factor_mean", k, "overall")] = float(np.mean(pooled))
    return stats


def _connectedness_stats(
    cells: list[ConnectednessCell],
) -> dict[tuple[str, int | None, str], float]:
    return {
        ("connected_fraction", cell.k, cell.foil_label): cell.fraction for cell in cells
    }


def adversarial_comparison(
    instances: tuple[EvaluationInstance, ...],
    corpus: GroundTruthCorpus,
    config: MetricConfig,
    seed: int = 0,
) -> RobustnessReport | None:
    """Paired clean/adversarial metrics plus the shift scatter.

    Returns None when no instance carries an adversarial twin. The scatter
    is capped at ``config.shift_sample_cap`` points via a seeded uniform
    draw without replacement; output order follows dataset order.
    """
    eligible = tuple(inst for inst in instances if inst.has_adversarial)
    if not eligible:
        return None
    warnings: list[str] = []
    adversarial = tuple(_adversarial_view(inst) for inst in eligible)

    stats: list[PairedStat] = []
    clean_prox = _proximity_stats(eligible, corpus, config.k_grid, warnings)
    adv_prox = _proximity_stats(adversarial, corpus, config.k_grid, warnings)
    for key in sorted(clean_prox, key=lambda t: (t[0], t[1] if t[1] is not None else -1, t[2])):
        if key in adv_prox:
            metric, k, label = key
            stats.append(
                PairedStat(
                    metric=metric, k=k, foil_label=label,
                    clean=clean_prox[key], adversarial=adv_prox[key],
                )
            )

    clean_cells, warn_c = connectedness_curve(
        eligible, corpus, config.k_grid, config.eps_rule, config.min_points
    )
    adv_cells, warn_a = connectedness_curve(
        adversarial, corpus, config.k_grid, config.eps_rule, config.min_points
    )
    warnings.extend(warn_c)
    warnings.extend(warn_a)
    clean_conn = _connectedness_stats(clean_cells)
    adv_conn = _connectedness_stats(adv_cells)
    for key in sorted(clean_conn, key=lambda t: (t[0], t[1] if t[1] is not None else -1, t[2])):
        if key in adv_conn:
            metric, k, label = key
            stats.append(
                PairedStat(
                    metric=metric, k=k, foil_label=label,
                    clean=clean_conn[key], adversarial=adv_conn[key],
                )
            )

    stability_clean = stability_adv = None
    if config.robustness_stability:
        clean_pairs, clean_deg = neighbor_pairs(
            eligible, config.stability_neighbor_radius, config.stability_all_pairs
        )
        adv_pairs, adv_deg = neighbor_pairs(
            adversarial, config.stability_neighbor_radius, config.stability_all_pairs
        )
        stability_clean = stability_summary(clean_pairs, config.stability_bins, clean_deg)
        stability_adv = stability_summary(adv_pairs, config.stability_bins, adv_deg)

    shift_all = [
        ShiftPoint(inst.id, *counterfactual_shift(inst)) for inst in eligible
    ]
    if len(shift_all) > config.shift_sample_cap:
        rng = np.random.default_rng(seed)
        chosen = sorted(
            rng.choice(len(shift_all), size=config.shift_sample_cap, replace=False)
        )
        shift_points = tuple(shift_all[i] for i in chosen)
    else:
        shift_points = tuple(shift_all)

    return RobustnessReport(
        sample_size=len(eligible),
        clean_vs_adv=tuple(stats),
        shift_points=shift_points,
        stability_clean=stability_clean,
        stability_adversarial=stability_adv,
        warnings=tuple(warnings),
    )
