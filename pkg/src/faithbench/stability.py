"""Local stability: close inputs should receive close counterfactuals.

For every pair of instances whose originals lie within a radius of each
other (cosine distance), we compare the distance between their
counterfactuals to the distance between the originals. A stable explainer
keeps the ratio bounded; the bound is checked strictly against a caller-
supplied threshold. The summary also fits cf_distance against
input_distance by ordinary least squares and bins the pairs into the
configured input-distance ranges.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .corpus import EvaluationInstance
from .geometry import cosine_distance

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StabilityPair:
    id_a: str
    id_b: str
    input_distance: float  # > 0: zero-distance pairs are excluded up front
    cf_distance: float
    foil_label: str        # shared foil label, or "mixed"

    @property
    def ratio(self) -> float:
        return self.cf_distance / self.input_distance


@dataclass(frozen=True)
class BinSummary:
    low: float
    high: float
    count: int
    mean: float | None
    median: float | None
    q1: float | None
    q3: float | None


@dataclass(frozen=True)
class StabilitySummary:
    pairs: int
    degenerate_pairs: int          # identical-original pairs, excluded
    max_ratio: float | None
    slope: float | None            # OLS with intercept
    intercept: float | None
    slope_r2: float | None
    slope_through_origin: float | None
    per_bin: tuple[BinSummary, ...]


def _cf_distance(a: EvaluationInstance, b: EvaluationInstance, all_pairs: bool) -> float:
    """Distance between the instances' counterfactuals: first-vs-first by
    default, or the mean over all cross-pairs when ``all_pairs`` is set."""
    if not all_pairs:
        return cosine_distance(
            a.counterfactuals[0].sentence_embedding,
            b.counterfactuals[0].sentence_embedding,
        )
    dists = [
        cosine_distance(ca.sentence_embedding, cb.sentence_embedding)
        for ca in a.counterfactuals
        for cb in b.counterfactuals
    ]
    return float(np.mean(dists))


def neighbor_pairs(
    instances: tuple[EvaluationInstance, ...],
    radius: float,
    all_pairs: bool = False,
) -> tuple[list[StabilityPair], int]:
    """All unordered instance pairs with 0 < d(x, x') < radius.

    Pairs are ordered by (id_a, id_b) with id_a < id_b, so the output is
    independent of input order. Identical-original pairs are skipped and
    counted; the count is returned alongside the pairs.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    ordered = sorted(instances, key=lambda inst: inst.id)
    pairs: list[StabilityPair] = []
    degenerate = 0
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            d_in = cosine_distance(
                a.original.sentence_embedding, b.original.sentence_embedding
            )
            if d_in == 0.0:
                degenerate += 1
                log.warning(
                    "skipping pair (%s, %s): identical original embeddings", a.id, b.id
                )
                continue
            if d_in >= radius:
                continue
            pairs.append(
                StabilityPair(
                    id_a=a.id,
                    id_b=b.id,
                    input_distance=d_in,
                    cf_distance=_cf_distance(a, b, all_pairs),
                    foil_label=a.foil_label if a.foil_label == b.foil_label else "mixed",
                )
            )
    return pairs, degenerate


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float] | None:
    """Least-squares fit y = slope * x + intercept, plus R^2.

    R^2 is 1.0 when the fit is exact and the target is constant (zero total
    sum of squares), 0.0 for a constant target with residual error. Returns
    None when all x coincide (slope undefined).
    """
    x_mean = float(x.mean())
    y_mean = float(y.mean())
    dx = x - x_mean
    dy = y - y_mean
    var = float((dx * dx).sum())
    if var == 0.0:
        return None
    slope = float((dx * dy).sum()) / var
    intercept = y_mean - slope * x_mean
    residuals = y - (slope * x + intercept)
    ss_res = float((residuals * residuals).sum())
    ss_tot = float((dy * dy).sum())
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def stability_summary(
    pairs: list[StabilityPair],
    bins: tuple[tuple[float, float], ...],
    degenerate_pairs: int = 0,
) -> StabilitySummary:
    """Regression, max ratio, and per-bin distribution summaries of cf_distance."""
    per_bin = []
    for low, high in bins:
        values = np.array(
            [p.cf_distance for p in pairs if low <= p.input_distance < high]
        )
        if values.size:
            per_bin.append(
                BinSummary(
                    low=low,
                    high=high,
                    count=int(values.size),
                    mean=float(values.mean()),
                    median=float(np.percentile(values, 50)),
                    q1=float(np.percentile(values, 25)),
                    q3=float(np.percentile(values, 75)),
                )
            )
        else:
            per_bin.append(
                BinSummary(low=low, high=high, count=0, mean=None, median=None, q1=None, q3=None)
            )

    if len(pairs) < 2:
        return StabilitySummary(
            pairs=len(pairs),
            degenerate_pairs=degenerate_pairs,
            max_ratio=max((p.ratio for p in pairs), default=None),
            slope=None,
            intercept=None,
            slope_r2=None,
            slope_through_origin=None,
            per_bin=tuple(per_bin),
        )

    x = np.array([p.input_distance for p in pairs])
    y = np.array([p.cf_distance for p in pairs])
    fit = _ols(x, y)
    slope, intercept, r2 = fit if fit is not None else (None, None, None)
    through_origin = float((x * y).sum()) / float((x * x).sum())
    return StabilitySummary(
        pairs=len(pairs),
        degenerate_pairs=degenerate_pairs,
        max_ratio=max(p.ratio for p in pairs),
        slope=slope,
        intercept=intercept,
        slope_r2=r2,
        slope_through_origin=through_origin,
        per_bin=tuple(per_bin),
    )


def is_stable(summary: StabilitySummary, epsilon2: float) -> bool:
    """Strict bound: the explainer is stable iff max_ratio < epsilon2."""
    if summary.max_ratio is None:
        raise ValueError("stability undefined: no pairs")
    return summary.max_ratio < epsilon2
