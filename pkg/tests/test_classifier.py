import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rffsim.classifier import LabeledFeature, evaluate_split, knn_classify


def cluster(center, n, spread, label, seed):
    rng = np.random.default_rng(seed)
    pts = np.asarray(center) + spread * rng.standard_normal((n, 2))
    return [LabeledFeature(x, y, label) for x, y in pts]


class TestKnnClassify:
    def test_unanimous_neighbors(self):
        train = ([LabeledFeature(0, 0, "a")] * 3
                 + [LabeledFeature(1, 1, "b")] * 3)
        assert knn_classify(train, (0.1, 0.1), 3) == "a"

    def test_query_on_training_point(self):
        train = [LabeledFeature(0, 0, "a"), LabeledFeature(5, 5, "b")]
        assert knn_classify(train, (5, 5), 1) == "b"

    def test_three_votes_two_classes_majority(self):
        train = [LabeledFeature(0, 0, "a"), LabeledFeature(0.2, 0, "b"),
                 LabeledFeature(0.3, 0, "a"), LabeledFeature(9, 9, "b")]
        assert knn_classify(train, (0.0, 0.0), 3) == "a"

    def test_distance_tie_uses_insertion_order(self):
        train = [LabeledFeature(1, 0, "b"), LabeledFeature(-1, 0, "a")]
        assert knn_classify(train, (0, 0), 1) == "b"

    def test_empty_training_set(self):
        with pytest.raises(ValueError):
            knn_classify([], (0, 0), 1)

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            knn_classify([LabeledFeature(0, 0, "a")], (0, 0), 2)


class TestEvaluateSplit:
    def test_separated_clusters_perfect(self):
        feats = {
            "a": np.array([[f.x, f.y] for f in cluster((0, 0), 66, 0.05, "a", 1)]),
            "b": np.array([[f.x, f.y] for f in cluster((10, 10), 66, 0.05, "b", 2)]),
        }
        assert evaluate_split(feats, 3, 0) == 1.0

    def test_identical_features_chance_level(self):
        pts = np.tile([1.0, -2.0], (66, 1))
        feats = {"a": pts, "b": pts.copy()}
        accs = [evaluate_split(feats, 3, seed) for seed in range(40)]
        assert abs(np.mean(accs) - 0.5) < 0.1

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(3)
        feats = {"a": rng.standard_normal((66, 2)),
                 "b": 0.3 + rng.standard_normal((66, 2))}
        assert evaluate_split(feats, 3, 7) == evaluate_split(feats, 3, 7)

    def test_label_permutation_symmetry(self):
        rng = np.random.default_rng(4)
        fa = rng.standard_normal((66, 2))
        fb = 0.5 + rng.standard_normal((66, 2))
        acc_ab = evaluate_split({"a": fa, "b": fb}, 3, 11)
        acc_ba = evaluate_split({"b": fb, "a": fa}, 3, 11)
        assert acc_ab == acc_ba

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0, 2 * np.pi), st.floats(-5, 5), st.floats(-5, 5))
    def test_rigid_motion_invariance(self, angle, dx, dy):
        rng = np.random.default_rng(5)
        fa = rng.standard_normal((20, 2))
        fb = 1.0 + rng.standard_normal((20, 2))
        rot = np.array([[np.cos(angle), -np.sin(angle)],
                        [np.sin(angle), np.cos(angle)]])
        moved = {lab: f @ rot.T + [dx, dy] for lab, f in
                 (("a", fa), ("b", fb))}
        assert (evaluate_split({"a": fa, "b": fb}, 3, 13)
                == evaluate_split(moved, 3, 13))

    def test_unequal_counts_rejected(self):
        with pytest.raises(ValueError):
            evaluate_split({"a": np.zeros((10, 2)), "b": np.zeros((9, 2))}, 3, 0)

    def test_odd_count_splits_floor_train(self):
        rng = np.random.default_rng(6)
        feats = {"a": rng.standard_normal((5, 2)),
                 "b": 8 + rng.standard_normal((5, 2))}
        assert evaluate_split(feats, 1, 0) == 1.0
