import math

import numpy as np
import pytest

from docmap.dimension import JlQuery, intrinsic_dimension_pca, jl_min_dimension


class TestJlMinDimension:
    def test_single_point(self):
        assert jl_min_dimension(JlQuery(m=1, epsilon=0.5)) == 1

    def test_large_corpus_cell(self):
        # Oracle: 8*ln(20000)/0.01 = 7922.63..., floor + 1.
        assert jl_min_dimension(JlQuery(m=20000, epsilon=0.1)) == 7923

    def test_small_case(self):
        # floor(8*ln(8)/0.81) + 1 = floor(20.54) + 1
        assert jl_min_dimension(JlQuery(m=8, epsilon=0.9)) == 21

    @pytest.mark.parametrize("epsilon", [0.0, 1.0, 1.5, -0.1])
    def test_epsilon_range_enforced(self, epsilon):
        with pytest.raises(ValueError):
            jl_min_dimension(JlQuery(m=10, epsilon=epsilon))

    def test_m_range_enforced(self):
        with pytest.raises(ValueError):
            jl_min_dimension(JlQuery(m=0, epsilon=0.5))

    def test_monotone_in_m_and_epsilon(self):
        ms = [1, 2, 10, 100, 10_000, 1_000_000]
        eps = [0.05, 0.1, 0.3, 0.5, 0.9]
        for e in eps:
            values = [jl_min_dimension(JlQuery(m=m, epsilon=e)) for m in ms]
            assert values == sorted(values)
        for m in ms:
            values = [jl_min_dimension(JlQuery(m=m, epsilon=e)) for e in eps]
            assert values == sorted(values, reverse=True)

    def test_strict_bound_bracketing(self):
        for m in (2, 17, 4096, 10**6):
            for e in (0.05, 0.2, 0.7, 0.99):
                n = jl_min_dimension(JlQuery(m=m, epsilon=e))
                bound = 8.0 * math.log(m) / (e * e)
                assert n > bound
                assert n - 1 <= bound


class TestIntrinsicDimensionPca:
    def test_identical_points_degenerate(self):
        est = intrinsic_dimension_pca(np.ones((5, 4)), threshold=0.9)
        assert est.intrinsic_dim == 0
        assert est.explained_variance == []

    def test_planar_data_in_ten_dims(self):
        rng = np.random.default_rng(0)
        coeffs = rng.random((200, 2))
        data = np.zeros((200, 10))
        data[:, 0] = coeffs[:, 0]
        data[:, 1] = coeffs[:, 1]
        est = intrinsic_dimension_pca(data, threshold=0.99)
        assert est.intrinsic_dim == 2

    def test_hand_variances(self):
        # Per-axis sample variances (4, 1, 0, 0) with zero covariance:
        # cumulative fractions 0.8 then 1.0.
        data = np.zeros((4, 4))
        data[0, 0], data[1, 0] = math.sqrt(6), -math.sqrt(6)
        data[2, 1], data[3, 1] = math.sqrt(1.5), -math.sqrt(1.5)
        assert intrinsic_dimension_pca(data, threshold=0.75).intrinsic_dim == 1
        assert intrinsic_dimension_pca(data, threshold=0.9).intrinsic_dim == 2
        curve = intrinsic_dimension_pca(data, threshold=0.9).explained_variance
        assert curve[0] == pytest.approx(0.8, abs=1e-9)
        assert curve[-1] == pytest.approx(1.0, abs=1e-12)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(3)
        data = rng.standard_normal((80, 6)) * np.array([3, 2, 1, 0.5, 0.1, 0.01])
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
        a = intrinsic_dimension_pca(data, threshold=0.95)
        b = intrinsic_dimension_pca(data @ q, threshold=0.95)
        assert a.intrinsic_dim == b.intrinsic_dim
        assert np.allclose(a.explained_variance, b.explained_variance, atol=1e-6)

    def test_uniform_scaling_invariance(self):
        rng = np.random.default_rng(4)
        data = rng.standard_normal((50, 5))
        a = intrinsic_dimension_pca(data, threshold=0.9)
        b = intrinsic_dimension_pca(data * 37.5, threshold=0.9)
        assert a.intrinsic_dim == b.intrinsic_dim
        assert np.allclose(a.explained_variance, b.explained_variance, atol=1e-9)

    def test_duplicating_points_invariant(self):
        rng = np.random.default_rng(5)
        data = rng.standard_normal((40, 5))
        a = intrinsic_dimension_pca(data, threshold=0.9)
        b = intrinsic_dimension_pca(np.vstack([data, data]), threshold=0.9)
        assert a.intrinsic_dim == b.intrinsic_dim

    def test_curve_non_decreasing_ends_at_one(self):
        rng = np.random.default_rng(6)
        est = intrinsic_dimension_pca(rng.standard_normal((30, 8)), threshold=1.0)
        curve = np.array(est.explained_variance)
        assert np.all(np.diff(curve) >= -1e-12)
        assert curve[-1] == pytest.approx(1.0, abs=1e-9)
        assert est.intrinsic_dim == int(np.searchsorted(curve, 1.0) + 1)

    def test_gram_path_matches_dense(self):
        # Same spectrum whether the covariance or the Gram matrix is used.
        from docmap import dimension as dim_mod

        rng = np.random.default_rng(7)
        data = rng.standard_normal((20, 50))
        dense = intrinsic_dimension_pca(data, threshold=0.9)
        original = dim_mod._DENSE_LIMIT
        dim_mod._DENSE_LIMIT = 30
        try:
            gram = intrinsic_dimension_pca(data, threshold=0.9)
        finally:
            dim_mod._DENSE_LIMIT = original
        assert gram.intrinsic_dim == dense.intrinsic_dim
        k = min(len(dense.explained_variance), len(gram.explained_variance))
        assert np.allclose(
            dense.explained_variance[:k], gram.explained_variance[:k], atol=1e-8
        )

    def test_errors(self):
        with pytest.raises(ValueError):
            intrinsic_dimension_pca(np.ones((1, 3)), threshold=0.9)
        with pytest.raises(ValueError):
            intrinsic_dimension_pca([[1, 2], [1, 2, 3]], threshold=0.9)
        with pytest.raises(ValueError):
            intrinsic_dimension_pca(np.ones((5, 3)), threshold=0.0)
        with pytest.raises(ValueError):
            intrinsic_dimension_pca(np.ones((5, 3)), threshold=1.1)
