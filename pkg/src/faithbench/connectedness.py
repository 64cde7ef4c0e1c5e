"""Chain connectivity of counterfactuals to foil-class ground truth.

A counterfactual counts as connected when a chain of foil-class points, each
within ``eps`` of the next, links it to the ground-truth data. This is
checked with density-based clustering at ``min_points = 2``, where clusters
are exactly the connected components (size >= 2) of the graph joining points
at distance <= eps; singletons are noise.

The connectedness curve sweeps the neighborhood size k: for each k the
radius eps(k) is either a fixed value or the mean k-th-nearest-neighbor
distance within the foil partition, and the fraction of connected
counterfactuals is reported per foil class and overall.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .corpus import EpsRule, EvaluationInstance, GroundTruthCorpus, LabeledText
from .geometry import EmbeddingIndex
from .proximity import member_k_distances

NOISE = -1


@dataclass(frozen=True)
class ClusterAssignment:
    """Point-id -> cluster-id map (NOISE = -1); cluster ids are canonical:
    numbered by each cluster's smallest member id, so equal point sets yield
    equal assignments regardless of input order."""

    labels: dict[str, int]
    eps: float
    min_points: int

    def cluster_of(self, id_: str) -> int:
        return self.labels[id_]

    def is_noise(self, id_: str) -> bool:
        return self.labels[id_] == NOISE


def dbscan(index: EmbeddingIndex, eps: float, min_points: int = 2) -> ClusterAssignment:
    """Density-based clustering over an embedding index (cosine distance).

    Core points have at least ``min_points`` neighbors within ``eps``
    (counting themselves); clusters grow from core points by the usual seed
    expansion. With ``min_points = 2`` the result is provably the connected
    components of the eps-graph, independent of input order.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if min_points < 2:
        raise ValueError(f"min_points must be >= 2, got {min_points}")
    n = len(index)
    if n == 0:
        raise ValueError("empty point set")

    neighbors: list[np.ndarray] = []
    for row in range(n):
        dists = index.distances_to(index.matrix[row])
        neighbors.append(np.flatnonzero(dists <= eps))  # includes the row itself
    core = [len(neighbors[row]) >= min_points for row in range(n)]

    labels = [NOISE] * n
    cluster = 0
    # Deterministic processing order: ascending id.
    for start in sorted(range(n), key=lambda r: index.ids[r]):
        if labels[start] != NOISE or not core[start]:
            continue
        labels[start] = cluster
        queue = deque(int(r) for r in neighbors[start])
        while queue:
            row = queue.popleft()
            if labels[row] == NOISE:
                labels[row] = cluster
                if core[row]:
                    queue.extend(int(r) for r in neighbors[row])
        cluster += 1

    # Canonical cluster numbering by smallest member id.
    smallest: dict[int, str] = {}
    for row in range(n):
        c = labels[row]
        if c != NOISE and (c not in smallest or index.ids[row] < smallest[c]):
            smallest[c] = index.ids[row]
    renumber = {
        c: rank for rank, (_, c) in enumerate(sorted((mid, c) for c, mid in smallest.items()))
    }
    return ClusterAssignment(
        labels={
            index.ids[row]: (NOISE if labels[row] == NOISE else renumber[labels[row]])
            for row in range(n)
        },
        eps=eps,
        min_points=min_points,
    )


def is_connected(
    x_cf: LabeledText | np.ndarray,
    partition: EmbeddingIndex,
    eps: float,
    min_points: int = 2,
) -> bool:
    """True iff the counterfactual shares a cluster with at least one
    foil-class ground-truth point when clustered together at ``eps``."""
    embedding = x_cf.sentence_embedding if isinstance(x_cf, LabeledText) else np.asarray(x_cf, float)
    query_id = "\x00query"  # sorts before real ids; never collides with data
    joint = EmbeddingIndex.build(
        (query_id, *partition.ids),
        np.vstack([embedding[None, :], partition.matrix]),
    )
    assignment = dbscan(joint, eps, min_points)
    if assignment.is_noise(query_id):
        return False
    mine = assignment.cluster_of(query_id)
    return any(
        assignment.cluster_of(pid) == mine for pid in partition.ids
    )


def resolve_eps(rule: EpsRule, partition: EmbeddingIndex, k: int | None = None) -> float:
    """Concrete eps for one partition: the fixed value, or the mean k-th-NN
    distance over partition members (k from the sweep, else the rule's own)."""
    if rule.kind == "fixed":
        return float(rule.value)
    k_eff = k if k is not None else (rule.k or 1)
    return float(np.mean(member_k_distances(partition, k_eff)))


@dataclass(frozen=True)
class ConnectednessCell:
    """One (k, foil class) cell of the curve."""

    k: int
    foil_label: str
    eps: float | None
    connected: int
    total: int

    @property
    def fraction(self) -> float:
        return self.connected / self.total if self.total else 0.0


def connectedness_curve(
    instances: tuple[EvaluationInstance, ...],
    corpus: GroundTruthCorpus,
    k_grid: tuple[int, ...],
    eps_rule: EpsRule,
    min_points: int = 2,
    counterfactual_of: Callable[[EvaluationInstance], Sequence[LabeledText]] | None = None,
) -> tuple[list[ConnectednessCell], list[str]]:
    """Fraction of counterfactuals connected to their foil partition, per k.

    Returns per-class cells plus an "overall" cell for each k, and a list of
    warnings for skipped (class, k) combinations. ``counterfactual_of`` maps
    an instance to the counterfactual sequence to score (defaults to the
    clean counterfactuals; the robustness pipeline passes the adversarial
    ones).
    """
    if counterfactual_of is None:
        counterfactual_of = lambda inst: inst.counterfactuals  # noqa: E731
    warnings: list[str] = []
    cells: list[ConnectednessCell] = []
    foil_labels = sorted({inst.foil_label for inst in instances})
    by_label: dict[str, list] = {label: [] for label in foil_labels}
    for inst in instances:
        by_label[inst.foil_label].extend(counterfactual_of(inst))

    for k in k_grid:
        overall_connected = 0
        overall_total = 0
        for label in foil_labels:
            cfs = by_label[label]
            if corpus.partition_size(label) == 0:
                warnings.append(f"k={k}: empty foil class {label!r} skipped")
                continue
            partition = corpus.partition(label)
            try:
                eps = resolve_eps(eps_rule, partition, k=k)
            except ValueError as exc:
                warnings.append(f"k={k}: foil class {label!r} skipped ({exc})")
                continue
            connected = sum(
                1 for cf in cfs if is_connected(cf, partition, eps, min_points)
            )
            cells.append(
                ConnectednessCell(
                    k=k, foil_label=label, eps=eps, connected=connected, total=len(cfs)
                )
            )
            overall_connected += connected
            overall_total += len(cfs)
        cells.append(
            ConnectednessCell(
                k=k,
                foil_label="overall",
                eps=None,
                connected=overall_connected,
                total=overall_total,
            )
        )
    return cells, warnings
