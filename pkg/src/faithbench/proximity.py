"""Proximity of counterfactuals to ground-truth data of the foil class.

Two complementary views:

* the proximity ratio — distance from the original to its counterfactual,
  divided by the distance from the original to the nearest foil-class
  ground-truth point (1 means "as close as the closest real foil example");
* local reachability density (LRD) and the local outlier factor (LOF) of the
  counterfactual within the foil partition, swept over a grid of neighborhood
  sizes k. LOF near 1 means in-distribution; values well above 1 flag the
  counterfactual as an outlier relative to real foil texts.

Neighbor search is restricted to the foil partition throughout, and the
reachability distance uses the neighbor's k-distance (the usual LOF
convention). All functions are pure over immutable inputs; the per-partition
density model is a derived cache keyed weakly by the index object.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .corpus import LabeledText
from .geometry import EmbeddingIndex, cosine_distance

# LRD returned when every reachability distance is zero (all-duplicate
# neighborhoods); keeps reports finite while preserving ordering.
LRD_CAP = 1e12


class DegenerateDenominatorError(ValueError):
    """The original coincides directionally with a foil ground-truth point."""

    def __init__(self, colliding_id: str):
        super().__init__(
            f"degenerate denominator: zero distance to foil ground-truth {colliding_id!r}"
        )
        self.colliding_id = colliding_id


@dataclass(frozen=True)
class ProximityResult:
    instance_id: str
    counterfactual_index: int
    p_score: float
    nearest_foil_id: str
    per_k: dict[int, tuple[float, float]]  # k -> (lrd, outlier_factor)


def proximity_score(
    x: LabeledText, x_cf: LabeledText, foil: EmbeddingIndex
) -> tuple[float, str]:
    """Ratio d(x, x_cf) / min over foil ground truth of d(x, x_gt).

    Returns the score and the id of the minimizing foil point (ties go to
    the smallest id). Raises :class:`DegenerateDenominatorError` when the
    minimum distance is zero.
    """
    nearest_id, nearest_dist = foil.knn(x.sentence_embedding, 1)[0]
    if nearest_dist == 0.0:
        raise DegenerateDenominatorError(nearest_id)
    numerator = cosine_distance(x.sentence_embedding, x_cf.sentence_embedding)
    return numerator / nearest_dist, nearest_id


@dataclass(frozen=True)
class _PartitionDensity:
    """Per-(partition, k) cache: member k-distances, neighbor rows, and LRDs."""

    k: int
    k_distance: np.ndarray                     # per member row
    neighbor_rows: tuple[tuple[int, ...], ...]
    lrd: np.ndarray                            # per member row


_DENSITY_CACHE: "weakref.WeakKeyDictionary[EmbeddingIndex, dict[int, _PartitionDensity]]" = (
    weakref.WeakKeyDictionary()
)


def _density(index: EmbeddingIndex, k: int) -> _PartitionDensity:
    """Build (or fetch) the density model of a partition for one k."""
    per_k = _DENSITY_CACHE.setdefault(index, {})
    if k in per_k:
        return per_k[k]
    n = len(index)
    if n < k + 1:
        raise ValueError(f"partition of size {n} cannot support k={k} (need k+1 members)")
    neighbor_rows = []
    k_dist = np.empty(n)
    all_dists = [index.distances_to(index.matrix[row]) for row in range(n)]
    for row in range(n):
        dists = all_dists[row]
        # Self excluded by row identity; ties broken by ascending id.
        order = sorted(
            (r for r in range(n) if r != row),
            key=lambda r: (dists[r], index.ids[r]),
        )
        rows = tuple(order[:k])
        neighbor_rows.append(rows)
        k_dist[row] = dists[rows[-1]]
    lrds = np.empty(n)
    for row in range(n):
        dists = all_dists[row]
        reach = [max(k_dist[o], dists[o]) for o in neighbor_rows[row]]
        mean_reach = float(np.mean(reach))
        lrds[row] = LRD_CAP if mean_reach == 0.0 else 1.0 / mean_reach
    model = _PartitionDensity(
        k=k, k_distance=k_dist, neighbor_rows=tuple(neighbor_rows), lrd=lrds
    )
    per_k[k] = model
    return model


def k_distance(point_id: str, partition: EmbeddingIndex, k: int) -> float:
    """Distance from a partition member to its k-th nearest other member."""
    return float(_density(partition, k).k_distance[partition.row_of(point_id)])


def member_k_distances(partition: EmbeddingIndex, k: int) -> np.ndarray:
    """k-distance of every partition member, in row order (self excluded)."""
    return _density(partition, k).k_distance.copy()


def reachability_distance(p, o_id: str, partition: EmbeddingIndex, k: int) -> float:
    """max(k-distance of the neighbor ``o``, direct distance from ``p`` to ``o``)."""
    direct = cosine_distance(np.asarray(p, float), partition.row(o_id))
    return max(k_distance(o_id, partition, k), direct)


def _as_embedding(x: LabeledText | np.ndarray) -> np.ndarray:
    if isinstance(x, LabeledText):
        return x.sentence_embedding
    return np.asarray(x, dtype=np.float64)


def _query_lrd(
    embedding: np.ndarray, partition: EmbeddingIndex, k: int
) -> tuple[float, list[tuple[str, float]], _PartitionDensity]:
    density = _density(partition, k)
    neighbors = partition.knn(embedding, k)
    reach = [
        max(float(density.k_distance[partition.row_of(o_id)]), dist)
        for o_id, dist in neighbors
    ]
    mean_reach = float(np.mean(reach))
    own = LRD_CAP if mean_reach == 0.0 else 1.0 / mean_reach
    return own, neighbors, density


def lrd(x_cf: LabeledText | np.ndarray, partition: EmbeddingIndex, k: int) -> float:
    """Local reachability density of a query point within the foil partition:
    the inverse mean reachability distance to its k nearest foil members."""
    own, _, _ = _query_lrd(_as_embedding(x_cf), partition, k)
    return own


def outlier_factor(
    x_cf: LabeledText | np.ndarray, partition: EmbeddingIndex, k: int
) -> float:
    """Local outlier factor of a query point: mean ratio of its neighbors'
    LRDs to its own. Approximately 1 for in-distribution points."""
    own, neighbors, density = _query_lrd(_as_embedding(x_cf), partition, k)
    ratios = [float(density.lrd[partition.row_of(o_id)]) / own for o_id, _ in neighbors]
    return float(np.mean(ratios))


def evaluate_counterfactual(
    x: LabeledText,
    x_cf: LabeledText,
    counterfactual_index: int,
    partition: EmbeddingIndex,
    k_grid: tuple[int, ...],
) -> ProximityResult:
    """Proximity ratio plus per-k LRD and outlier factor for one counterfactual."""
    p_score, nearest_id = proximity_score(x, x_cf, partition)
    per_k: dict[int, tuple[float, float]] = {}
    embedding = x_cf.sentence_embedding
    for k in k_grid:
        own, neighbors, density = _query_lrd(embedding, partition, k)
        ratios = [float(density.lrd[partition.row_of(o)]) / own for o, _ in neighbors]
        per_k[k] = (own, float(np.mean(ratios)))
    return ProximityResult(
        instance_id=x.id,
        counterfactual_index=counterfactual_index,
        p_score=p_score,
        nearest_foil_id=nearest_id,
        per_k=per_k,
    )
