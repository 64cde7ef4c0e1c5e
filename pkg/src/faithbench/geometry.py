"""Distance primitives and exact neighbor search on sentence embeddings.

All embedding-space metrics in this package reduce to cosine distance
(1 - cosine similarity, range [0, 2]) over dense real vectors. Searches are
exact brute-force scans: corpora are desk-scale and the test oracles demand
bit-for-bit reproducible neighbor lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    """Invalid input to a distance or neighbor-search primitive."""


def _as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise GeometryError(f"expected a 1-D vector, got shape {arr.shape}")
    return arr


def _norms(x: np.ndarray) -> np.ndarray:
    # sqrt of sum of squares along the last axis; written out (rather than
    # np.linalg.norm) so 1-D and row-wise results are bitwise identical.
    return np.sqrt((x * x).sum(axis=-1))


def _unit(v: np.ndarray, what: str = "vector") -> np.ndarray:
    norm = float(_norms(v))
    if norm == 0.0:
        raise GeometryError(f"zero-norm {what}: cosine distance undefined")
    return v / norm


def cosine_distance(u, v) -> float:
    """Cosine distance 1 - (u.v)/(|u||v|) between two nonzero vectors.

    Computed as half the squared Euclidean distance of the normalized
    vectors, which is algebraically identical but returns exactly 0.0 for
    identical inputs and never goes negative. Result is clamped to [0, 2].
    """
    u = _as_vector(u)
    v = _as_vector(v)
    if u.shape != v.shape:
        raise GeometryError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    diff = _unit(u) - _unit(v)
    return min(0.5 * float((diff * diff).sum(axis=-1)), 2.0)


def cosine_similarity(u, v) -> float:
    """Cosine similarity in [-1, 1]; exactly 1.0 for identical inputs."""
    return 1.0 - cosine_distance(u, v)


def word_levenshtein(a: list[str], b: list[str]) -> int:
    """Minimum token insertions/deletions/substitutions turning ``a`` into ``b``.

    Standard two-row dynamic program over token sequences; empty sequences
    are allowed.
    """
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    # Keep the inner loop over the shorter sequence.
    if len(b) > len(a):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, tok_a in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, tok_b in enumerate(b, start=1):
            cost = 0 if tok_a == tok_b else 1
            current[j] = min(
                previous[j] + 1,        # deletion
                current[j - 1] + 1,     # insertion
                previous[j - 1] + cost, # substitution
            )
        previous = current
    return previous[len(b)]


@dataclass(frozen=True, eq=False)
class EmbeddingIndex:
    """Immutable brute-force cosine index over N row vectors with string ids.

    Rows are stored unit-normalized; zero-norm rows are rejected at build
    time. Queries are read-only and safe to run concurrently.
    """

    ids: tuple[str, ...]
    matrix: np.ndarray          # raw row vectors, N x D
    unit_matrix: np.ndarray     # unit-normalized rows, N x D
    norms: np.ndarray           # per-row Euclidean norms, all > 0
    _row_of: dict[str, int] = field(repr=False)

    @classmethod
    def build(cls, ids, vectors) -> "EmbeddingIndex":
        ids = tuple(str(i) for i in ids)
        matrix = np.asarray(vectors, dtype=np.float64)
        if matrix.ndim != 2:
            raise GeometryError(f"expected an N x D matrix, got shape {matrix.shape}")
        if len(ids) != matrix.shape[0]:
            raise GeometryError(f"{len(ids)} ids for {matrix.shape[0]} rows")
        if len(set(ids)) != len(ids):
            raise GeometryError("duplicate ids in index")
        norms = _norms(matrix)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise GeometryError(f"zero-norm embedding for id {ids[zero[0]]!r}")
        unit = matrix / norms[:, None]
        return cls(
            ids=ids,
            matrix=matrix,
            unit_matrix=unit,
            norms=norms,
            _row_of={i: r for r, i in enumerate(ids)},
        )

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    def row(self, id_: str) -> np.ndarray:
        return self.matrix[self._row_of[id_]]

    def row_of(self, id_: str) -> int:
        return self._row_of[id_]

    def has(self, id_: str) -> bool:
        return id_ in self._row_of

    def distances_to(self, query) -> np.ndarray:
        """Cosine distances from ``query`` to every row, in row order."""
        q = _unit(_as_vector(query), "query")
        if q.shape[0] != self.dimension:
            raise GeometryError(
                f"dimension mismatch: query {q.shape[0]} vs index {self.dimension}"
            )
        diff = self.unit_matrix - q
        return np.minimum(0.5 * (diff * diff).sum(axis=-1), 2.0)

    def knn(
        self,
        query,
        k: int,
        restrict: set[str] | None = None,
        exclude: set[str] | None = None,
    ) -> list[tuple[str, float]]:
        """The ``k`` nearest rows to ``query`` by cosine distance, ascending.

        Ties are broken by ascending id so results are identical across runs
        and platforms. ``restrict`` limits candidates to the given ids;
        ``exclude`` removes ids (used for self-exclusion).
        """
        if k <= 0:
            raise GeometryError(f"k must be positive, got {k}")
        dists = self.distances_to(query)
        candidates = []
        for row, id_ in enumerate(self.ids):
            if restrict is not None and id_ not in restrict:
                continue
            if exclude is not None and id_ in exclude:
                continue
            candidates.append((float(dists[row]), id_))
        if restrict is not None and not candidates:
            raise GeometryError("empty restriction set")
        if k > len(candidates):
            raise GeometryError(f"k={k} exceeds {len(candidates)} candidates")
        candidates.sort()
        return [(id_, dist) for dist, id_ in candidates[:k]]


def knn(
    index: EmbeddingIndex,
    query,
    k: int,
    restrict: set[str] | None = None,
) -> list[tuple[str, float]]:
    """Module-level alias for :meth:`EmbeddingIndex.knn`."""
    return index.knn(query, k, restrict=restrict)
