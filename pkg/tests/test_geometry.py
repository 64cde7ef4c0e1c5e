import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from faithbench.geometry import (
    EmbeddingIndex,
    GeometryError,
    cosine_distance,
    knn,
    word_levenshtein,
)

finite_floats = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
)


def vectors(dim: int):
    return st.lists(finite_floats, min_size=dim, max_size=dim).map(np.array).filter(
        lambda v: float(np.linalg.norm(v)) > 1e-6
    )


class TestCosineDistance:
    def test_identical_direction(self):
        assert cosine_distance([1.0, 0.0], [1.0, 0.0]) == 0.0

    def test_orthogonal(self):
        assert cosine_distance([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0, abs=1e-15)

    def test_hand_computed(self):
        # (1,1) vs (1,0): 1 - 1/sqrt(2)
        expected = 1.0 - 1.0 / math.sqrt(2.0)
        assert cosine_distance([1.0, 1.0], [1.0, 0.0]) == pytest.approx(expected, abs=1e-12)

    def test_antipodal_is_two(self):
        assert cosine_distance([1.0, 0.0], [-1.0, 0.0]) == pytest.approx(2.0, abs=1e-15)

    def test_zero_norm_rejected(self):
        with pytest.raises(GeometryError, match="zero-norm"):
            cosine_distance([0.0, 0.0], [1.0, 0.0])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(GeometryError, match="dimension mismatch"):
            cosine_distance([1.0, 0.0], [1.0, 0.0, 0.0])

    @given(u=vectors(4), v=vectors(4))
    def test_symmetric_nonnegative_bounded(self, u, v):
        d = cosine_distance(u, v)
        assert d == cosine_distance(v, u)
        assert 0.0 <= d <= 2.0

    @given(u=vectors(3), v=vectors(3), scale=st.floats(min_value=1e-3, max_value=1e3))
    def test_positive_scale_invariance(self, u, v, scale):
        base = cosine_distance(u, v)
        assert cosine_distance(scale * u, v) == pytest.approx(base, abs=1e-9)
        assert cosine_distance(u, scale * v) == pytest.approx(base, abs=1e-9)

    def test_matches_classic_formula(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            u, v = rng.normal(size=8), rng.normal(size=8)
            classic = 1.0 - float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
            assert cosine_distance(u, v) == pytest.approx(classic, abs=1e-12)


tokens = st.lists(st.sampled_from("abcde"), max_size=6).map(tuple)


class TestWordLevenshtein:
    def test_single_substitution(self):
        assert word_levenshtein(
            ["the", "food", "was", "slow"], ["the", "food", "was", "fast"]
        ) == 1

    def test_empty_to_n(self):
        assert word_levenshtein([], ["a", "b", "c"]) == 3
        assert word_levenshtein(["a", "b"], []) == 2

    @given(a=tokens, b=tokens)
    def test_matches_recursive_oracle(self, a, b):
        assert word_levenshtein(list(a), list(b)) == oracles.levenshtein_recursive(a, b)

    @given(a=tokens, b=tokens, c=tokens)
    def test_metric_axioms(self, a, b, c):
        dab = word_levenshtein(list(a), list(b))
        assert dab == word_levenshtein(list(b), list(a))
        assert (dab == 0) == (a == b)
        assert dab <= word_levenshtein(list(a), list(c)) + word_levenshtein(list(c), list(b))


class TestKnn:
    def _index(self, rng, n=50, d=8):
        matrix = rng.normal(size=(n, d))
        return EmbeddingIndex.build([f"p{i:03d}" for i in range(n)], matrix), matrix

    def test_stored_row_query(self):
        rng = np.random.default_rng(11)
        index, matrix = self._index(rng)
        result = index.knn(matrix[17], 1)
        assert result == [("p017", 0.0)]

    def test_full_sorted_list(self):
        rng = np.random.default_rng(12)
        index, matrix = self._index(rng, n=20)
        query = rng.normal(size=8)
        result = index.knn(query, 20)
        dists = [d for _, d in result]
        assert dists == sorted(dists)
        assert len(result) == 20

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            index, matrix = self._index(rng, n=50)
            query = rng.normal(size=8)
            expected = oracles.brute_force_knn(index.ids, matrix, query, 5)
            assert index.knn(query, 5) == expected

    def test_prefix_property_random_queries(self):
        rng = np.random.default_rng(14)
        index, matrix = self._index(rng, n=30)
        for _ in range(10):
            query = rng.normal(size=8)
            full = oracles.brute_force_knn(index.ids, matrix, query, 30)
            for k in (1, 3, 7, 30):
                assert index.knn(query, k) == full[:k]

    def test_tie_break_by_id(self):
        # Two identical rows: the smaller id must come first.
        index = EmbeddingIndex.build(
            ["b", "a", "c"], [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
        )
        assert index.knn([1.0, 0.0], 2) == [("a", 0.0), ("b", 0.0)]

    def test_restrict_and_errors(self):
        index = EmbeddingIndex.build(
            ["a", "b", "c"], [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
        )
        assert index.knn([1.0, 0.0], 1, restrict={"b", "c"})[0][0] == "c"
        with pytest.raises(GeometryError, match="empty restriction"):
            index.knn([1.0, 0.0], 1, restrict=set())
        with pytest.raises(GeometryError, match="exceeds"):
            index.knn([1.0, 0.0], 4)
        assert knn(index, [1.0, 0.0], 1)[0][0] == "a"

    def test_zero_row_rejected_at_build(self):
        with pytest.raises(GeometryError, match="zero-norm"):
            EmbeddingIndex.build(["a", "b"], [[1.0, 0.0], [0.0, 0.0]])

    def test_duplicate_ids_rejected(self):
        with pytest.raises(GeometryError, match="duplicate"):
            EmbeddingIndex.build(["a", "a"], [[1.0, 0.0], [0.0, 1.0]])
