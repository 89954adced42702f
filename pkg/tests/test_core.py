import numpy as np
import pytest

from conftest import unit_rows
from ransacnn.core import (
    EmbeddingSet,
    InlierScores,
    OutlierScores,
    SeededRng,
    cosine_similarity,
    normalize,
    sample_without_replacement,
)
from ransacnn.errors import InvalidEmbeddingError


class TestEmbeddingSet:
    def test_rejects_nan(self):
        data = np.array([[1.0, 0.0], [np.nan, 1.0]], dtype=np.float32)
        with pytest.raises(InvalidEmbeddingError, match="row 1"):
            EmbeddingSet(data)

    def test_rejects_inf(self):
        with pytest.raises(InvalidEmbeddingError):
            EmbeddingSet(np.array([[np.inf, 0.0]], dtype=np.float32))

    def test_rejects_zero_row(self):
        data = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]], dtype=np.float32)
        with pytest.raises(InvalidEmbeddingError, match="row 1"):
            EmbeddingSet(data)

    def test_rejects_empty_and_wrong_ndim(self):
        with pytest.raises(ValueError):
            EmbeddingSet(np.zeros((0, 3), dtype=np.float32))
        with pytest.raises(ValueError):
            EmbeddingSet(np.ones(4, dtype=np.float32))

    def test_normalized_claim_is_checked(self):
        with pytest.raises(InvalidEmbeddingError, match="norm"):
            EmbeddingSet(np.array([[3.0, 4.0]], dtype=np.float32), normalized=True)

    def test_data_is_immutable(self):
        emb = EmbeddingSet(np.array([[1.0, 0.0]], dtype=np.float32))
        with pytest.raises(ValueError):
            emb.data[0, 0] = 2.0

    def test_shape_properties(self):
        emb = EmbeddingSet(unit_rows(0, 7, 3))
        assert (emb.n, emb.d) == (7, 3)


class TestScoreTypes:
    def test_inlier_range_enforced(self):
        with pytest.raises(ValueError):
            InlierScores(np.array([0.0, 1.5]))
        with pytest.raises(ValueError):
            InlierScores(np.array([np.nan]))

    def test_outlier_range_enforced(self):
        with pytest.raises(ValueError):
            OutlierScores(np.array([-0.1]))
        assert len(OutlierScores(np.array([0.0, 1.0]))) == 2


class TestCosineSimilarity:
    def test_identical_unit_vectors(self):
        assert cosine_similarity([1.0, 0.0], [1.0, 0.0]) == 1.0

    def test_orthogonal(self):
        assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_antipodal(self):
        assert cosine_similarity([1.0, 0.0], [-1.0, 0.0]) == -1.0

    def test_symmetry_exact_and_scale_invariant(self):
        gen = np.random.default_rng(42)
        for _ in range(50):
            d = int(gen.integers(2, 40))
            a = gen.standard_normal(d)
            b = gen.standard_normal(d)
            ab = cosine_similarity(a, b)
            assert ab == cosine_similarity(b, a)
            assert abs(cosine_similarity(4.0 * a, b) - ab) <= 1e-12
            assert abs(cosine_similarity(a, 0.25 * b) - ab) <= 1e-12
            assert -1.0 <= ab <= 1.0

    def test_zero_norm_rejected(self):
        with pytest.raises(InvalidEmbeddingError):
            cosine_similarity([0.0, 0.0], [1.0, 0.0])

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            cosine_similarity([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_clamped_for_duplicate_rows(self):
        row = unit_rows(3, 1, 17)[0]
        assert cosine_similarity(row, row) <= 1.0


class TestNormalize:
    def test_three_four_five(self):
        emb = normalize(EmbeddingSet(np.array([[3.0, 4.0]], dtype=np.float32)))
        assert emb.normalized
        np.testing.assert_array_equal(emb.data, np.array([[0.6, 0.8]], dtype=np.float32))

    def test_already_unit_passes_through(self):
        emb = normalize(EmbeddingSet(np.array([[1.0, 0.0]], dtype=np.float32)))
        np.testing.assert_array_equal(emb.data, np.array([[1.0, 0.0]], dtype=np.float32))

    def test_zero_row_rejected_with_index(self):
        # zero rows are rejected at construction, before normalize can run
        data = np.array([[1.0, 1.0], [0.0, 0.0]], dtype=np.float32)
        with pytest.raises(InvalidEmbeddingError, match="row 1"):
            EmbeddingSet(data)

    def test_idempotent_bit_for_bit(self):
        gen = np.random.default_rng(9)
        raw = (gen.standard_normal((40, 12)) * gen.uniform(0.01, 50, size=(40, 1))).astype(np.float32)
        once = normalize(EmbeddingSet(raw))
        twice = normalize(once)
        np.testing.assert_array_equal(once.data, twice.data)


class TestSeededRng:
    def test_validation(self):
        with pytest.raises(ValueError):
            SeededRng(-1)
        with pytest.raises(ValueError):
            SeededRng(1 << 64)

    def test_same_stream_reproducible(self):
        a = SeededRng(7, 3).generator().integers(0, 1 << 62, 32)
        b = SeededRng(7, 3).generator().integers(0, 1 << 62, 32)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = SeededRng(7, 3).generator().integers(0, 1 << 62, 32)
        b = SeededRng(7, 4).generator().integers(0, 1 << 62, 32)
        assert not np.array_equal(a, b)

    def test_stream_offset_wraps(self):
        assert SeededRng(1, (1 << 64) - 1).stream(2).stream_id == 1


class TestSampleWithoutReplacement:
    def test_exhaustive_draw_is_permutation(self):
        idx = sample_without_replacement(SeededRng(0), 5, 5)
        assert sorted(idx.tolist()) == [0, 1, 2, 3, 4]

    def test_single_draw_in_range(self):
        idx = sample_without_replacement(SeededRng(1), 5, 1)
        assert idx.shape == (1,) and 0 <= idx[0] < 5

    def test_distinct_indices(self):
        for seed in range(20):
            idx = sample_without_replacement(SeededRng(seed), 30, 12)
            assert len(set(idx.tolist())) == 12
            assert idx.min() >= 0 and idx.max() < 30

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            sample_without_replacement(SeededRng(0), 5, 6)
        with pytest.raises(ValueError):
            sample_without_replacement(SeededRng(0), 5, 0)

    def test_reproducible_bit_for_bit(self):
        for seed, stream in [(0, 0), (123, 17), (2**40, 2**33)]:
            a = sample_without_replacement(SeededRng(seed, stream), 100, 10)
            b = sample_without_replacement(SeededRng(seed, stream), 100, 10)
            np.testing.assert_array_equal(a, b)

    def test_marginal_frequencies_uniform(self):
        # n=10, k=3: every index should appear with frequency 0.3 +- 0.01
        # over 100000 seeded draws.
        rng = SeededRng(2024)
        counts = np.zeros(10, dtype=np.int64)
        draws = 100_000
        for t in range(draws):
            counts[sample_without_replacement(rng.stream(t), 10, 3)] += 1
        freq = counts / draws
        assert np.all(np.abs(freq - 0.3) < 0.01), freq
