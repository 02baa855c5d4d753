import numpy as np
import pytest
import scipy.stats
from scipy.spatial.distance import pdist

from seqeval.diagnostics import (
    SpearmanAlignmentParams,
    knn_feature_alignment,
    pca_project,
    spearman_alignment,
    spearman_rho,
)
from seqeval.embed_metrics import DegenerateInputWarning


class TestKnnFeatureAlignment:
    def test_uniform_labels_score_one(self):
        rng = np.random.default_rng(40)
        x = rng.normal(size=(20, 3))
        assert knn_feature_alignment(x, ["same"] * 20, k=5) == 1.0

    def test_separated_clusters_score_one(self):
        rng = np.random.default_rng(41)
        a = rng.normal(scale=0.01, size=(15, 2))
        b = rng.normal(scale=0.01, size=(15, 2)) + 100.0
        x = np.vstack([a, b])
        labels = ["a"] * 15 + ["b"] * 15
        assert knn_feature_alignment(x, labels, k=5) == 1.0

    def test_balanced_random_labels_near_half(self):
        # labels carry no geometry: expected alignment is the class frequency
        vals = []
        for seed in range(5):
            rng = np.random.default_rng(seed)
            x = rng.normal(size=(2000, 4))
            labels = ["a", "b"] * 1000
            vals.append(knn_feature_alignment(x, labels, k=10))
        assert np.mean(vals) == pytest.approx(0.5, abs=0.05)

    def test_label_count_mismatch(self):
        with pytest.raises(ValueError):
            knn_feature_alignment(np.zeros((3, 2)), ["a", "b"], k=1)

    def test_k_bounds(self):
        with pytest.raises(ValueError):
            knn_feature_alignment(np.zeros((3, 2)), ["a"] * 3, k=3)

    def test_invariant_to_rigid_motion(self):
        rng = np.random.default_rng(42)
        x = rng.normal(size=(30, 3))
        labels = [str(i % 3) for i in range(30)]
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        moved = x @ q + np.array([5.0, -1.0, 2.0])
        assert knn_feature_alignment(x, labels, k=4) == pytest.approx(
            knn_feature_alignment(moved, labels, k=4)
        )


class TestSpearmanRho:
    def test_identical_orders(self):
        assert spearman_rho(np.array([1.0, 2.0, 3.0]), np.array([10.0, 20.0, 30.0])) == 1.0

    def test_reversed_orders(self):
        assert spearman_rho(np.array([1.0, 2.0, 3.0]), np.array([3.0, 2.0, 1.0])) == -1.0

    def test_hand_computed_partial_agreement(self):
        got = spearman_rho(np.array([1.0, 2.0, 3.0, 4.0]), np.array([1.0, 3.0, 2.0, 4.0]))
        assert got == pytest.approx(0.8)

    def test_matches_scipy_on_random_data(self):
        rng = np.random.default_rng(43)
        for _ in range(20):
            a = rng.normal(size=50)
            b = rng.normal(size=50)
            want = scipy.stats.spearmanr(a, b).statistic
            assert spearman_rho(a, b) == pytest.approx(want, abs=1e-12)

    def test_matches_scipy_with_ties(self):
        rng = np.random.default_rng(44)
        for _ in range(20):
            a = rng.integers(0, 5, size=40).astype(float)
            b = rng.integers(0, 5, size=40).astype(float)
            if len(set(a)) < 2 or len(set(b)) < 2:
                continue
            want = scipy.stats.spearmanr(a, b).statistic
            assert spearman_rho(a, b) == pytest.approx(want, abs=1e-12)

    def test_constant_input_errors(self):
        with pytest.raises(ValueError):
            spearman_rho(np.array([1.0, 1.0, 1.0]), np.array([1.0, 2.0, 3.0]))


class TestSpearmanAlignment:
    def test_distance_preserving_embedding_scores_one(self):
        vals = np.array([0.0, 1.0, 3.0, 6.0, 10.0])
        emb = vals[:, None]  # embedding distance equals property difference
        assert spearman_alignment(emb, vals) == pytest.approx(1.0)

    def test_sign_flip_of_property_still_aligns(self):
        # distances only see magnitudes, so a negated property aligns identically
        vals = np.array([0.0, 1.0, 3.0, 6.0, 10.0])
        emb = vals[:, None]
        assert spearman_alignment(emb, -vals) == pytest.approx(1.0)

    def test_independent_random_near_zero(self):
        rhos = []
        for seed in range(20):
            rng = np.random.default_rng(seed)
            emb = rng.normal(size=(200, 3))
            prop = rng.normal(size=200)
            rhos.append(spearman_alignment(emb, prop))
        assert abs(np.mean(rhos)) < 0.1

    def test_vector_property_uses_euclidean_differences(self):
        rng = np.random.default_rng(45)
        prop = rng.normal(size=(40, 2))
        emb = np.hstack([prop, np.zeros((40, 1))])  # same geometry, padded
        assert spearman_alignment(emb, prop) == pytest.approx(1.0)

    def test_constant_property_errors(self):
        with pytest.raises(ValueError, match="constant"):
            spearman_alignment(np.random.default_rng(0).normal(size=(5, 2)), np.ones(5))

    def test_subsampling_is_seeded_and_deterministic(self):
        rng = np.random.default_rng(46)
        emb = rng.normal(size=(60, 2))
        prop = rng.normal(size=60)
        p = SpearmanAlignmentParams(max_pairs=300, seed=9)
        assert spearman_alignment(emb, prop, p) == spearman_alignment(emb, prop, p)
        full = spearman_alignment(emb, prop)
        sub = spearman_alignment(emb, prop, p)
        assert sub != full  # 60 points give 1770 pairs, so the cap actually bites

    def test_row_mismatch(self):
        with pytest.raises(ValueError):
            spearman_alignment(np.zeros((4, 2)), np.zeros(5))


class TestPcaProject:
    def test_planar_cloud_explains_everything_with_two_axes(self):
        rng = np.random.default_rng(47)
        basis = np.linalg.qr(rng.normal(size=(10, 2)))[0]
        cloud = rng.normal(size=(200, 2)) @ basis.T + rng.normal(size=10)
        proj = pca_project(cloud, out_dim=2)
        assert proj.explained.sum() == pytest.approx(1.0, abs=1e-8)

    def test_isotropic_cloud_splits_variance_evenly(self):
        rng = np.random.default_rng(48)
        d = 10
        cloud = rng.normal(size=(5000, d))
        proj = pca_project(cloud, out_dim=2)
        assert proj.explained.sum() == pytest.approx(2.0 / d, abs=0.02)

    def test_full_dimensional_projection_preserves_distances(self):
        rng = np.random.default_rng(49)
        cloud = rng.normal(size=(25, 3))
        proj = pca_project(cloud, out_dim=3)
        assert np.allclose(pdist(proj.coordinates), pdist(cloud), atol=1e-9)

    def test_sign_convention_is_deterministic(self):
        rng = np.random.default_rng(50)
        cloud = rng.normal(size=(30, 5))
        a = pca_project(cloud)
        b = pca_project(cloud.copy())
        assert np.array_equal(a.coordinates, b.coordinates)

    def test_rank_deficient_warns_and_zero_pads(self):
        line = np.linspace(0.0, 1.0, 8)[:, None] * np.ones((1, 4))
        with pytest.warns(DegenerateInputWarning):
            proj = pca_project(line, out_dim=2)
        assert np.allclose(proj.coordinates[:, 1], 0.0)
        assert proj.explained[1] == 0.0

    def test_out_dim_restricted(self):
        with pytest.raises(ValueError):
            pca_project(np.zeros((5, 4)), out_dim=4)

    def test_explained_fractions_ordered(self):
        rng = np.random.default_rng(51)
        cloud = rng.normal(size=(100, 6)) * np.array([5.0, 2.0, 1.0, 0.5, 0.2, 0.1])
        proj = pca_project(cloud, out_dim=3)
        assert proj.explained[0] >= proj.explained[1] >= proj.explained[2] > 0
