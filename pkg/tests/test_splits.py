"""Tests for impurity, information gain, split search and medoids."""

import numpy as np
import pytest

from structedge.structforest.splits import best_split, candidate_thresholds, impurity, info_gain, medoid_index

# pylint: disable=line-too-long


class TestImpurity:
    """Test cases for entropy and Gini impurity."""

    def test_pure_set(self):
        """A single class has zero impurity."""
        labels = np.zeros(10, dtype=int)
        assert impurity(labels, 2, "entropy") == 0.0
        assert impurity(labels, 2, "gini") == 0.0

    def test_balanced_pair(self):
        """A 50/50 split has one bit of entropy and Gini 0.5."""
        labels = np.array([0, 1] * 5)
        assert impurity(labels, 2, "entropy") == pytest.approx(1.0)
        assert impurity(labels, 2, "gini") == pytest.approx(0.5)

    def test_three_to_one(self):
        """A 75/25 split."""
        labels = np.array([0, 0, 0, 1] * 4)
        assert impurity(labels, 2, "entropy") == pytest.approx(0.8113, abs=1e-4)
        assert impurity(labels, 2, "gini") == pytest.approx(0.375)

    def test_unknown_gain_type(self):
        """Only entropy and gini exist."""
        with pytest.raises(ValueError):
            impurity(np.array([0, 1]), 2, "variance")


class TestInfoGain:
    """Test cases for information gain."""

    def test_perfect_split(self):
        """Separating two balanced classes gains one bit."""
        parent = np.array([0] * 4 + [1] * 4)
        assert info_gain(parent, parent[:4], parent[4:]) == pytest.approx(1.0)

    def test_uninformative_split(self):
        """Children with the parent distribution gain nothing."""
        parent = np.array([0, 1] * 4)
        assert info_gain(parent, parent[:4], parent[4:]) == pytest.approx(0.0, abs=1e-12)

    def test_partial_split(self):
        """8A8B into 6A2B and 2A6B."""
        parent = np.array([0] * 8 + [1] * 8)
        left = np.array([0] * 6 + [1] * 2)
        right = np.array([0] * 2 + [1] * 6)
        assert info_gain(parent, left, right) == pytest.approx(0.1887, abs=1e-4)

    def test_empty_child(self):
        """An empty child contributes nothing."""
        parent = np.array([0, 1, 1])
        assert info_gain(parent, parent, np.array([], dtype=int)) == pytest.approx(0.0, abs=1e-12)


class TestBestSplit:
    """Test cases for the threshold search."""

    def test_one_dimensional(self):
        """Two points of different class split perfectly between them."""
        x = np.array([[0.0], [1.0]], dtype=np.float32)
        result = best_split(x, np.array([0, 1]), np.array([0]), 8, "entropy", np.random.default_rng(0))
        assert result is not None
        split, gain = result
        assert gain == pytest.approx(1.0)
        assert split.feature_index == 0
        assert 0.0 < split.threshold <= 1.0

    def test_constant_features(self):
        """No split exists when every feature is constant."""
        x = np.full((6, 3), 0.5, dtype=np.float32)
        assert best_split(x, np.array([0, 1] * 3), np.arange(3), 8, "gini", np.random.default_rng(1)) is None

    def test_feature_index_is_global(self):
        """The split reports the global index of the chosen column."""
        x = np.zeros((8, 2), dtype=np.float32)
        x[4:, 1] = 1.0
        result = best_split(x, np.array([0] * 4 + [1] * 4), np.array([17, 40]), 4, "gini", np.random.default_rng(2))
        assert result is not None
        assert result[0].feature_index == 40
        assert result[1] == pytest.approx(0.5)

    def test_matches_exhaustive_scan(self):
        """The best gain equals an exhaustive scan over the same candidate set."""
        rng = np.random.default_rng(3)
        x = rng.uniform(size=(20, 3)).astype(np.float32)
        labels = rng.integers(0, 2, size=20)
        subset = np.array([0, 1, 2])
        result = best_split(x, labels, subset, 8, "entropy", np.random.default_rng(7))
        cols, taus = candidate_thresholds(x, subset, 8, np.random.default_rng(7))
        best = -np.inf
        for row, col in enumerate(cols):
            for tau in taus[row]:
                left = x[:, col] < tau
                if left.all() or not left.any():
                    continue
                best = max(best, info_gain(labels, labels[left], labels[~left], "entropy", 2))
        assert result is not None
        assert result[1] == pytest.approx(best, abs=1e-9)

    def test_min_child(self):
        """Splits leaving a child below min_child are skipped."""
        x = np.arange(10, dtype=np.float32)[:, None]
        labels = np.array([1] + [0] * 9)
        result = best_split(x, labels, np.array([0]), 32, "gini", np.random.default_rng(4), min_child=3)
        assert result is not None
        goes_left = x[:, 0] < result[0].threshold
        assert 3 <= goes_left.sum() <= 7

    def test_thresholds_inside_range(self):
        """Candidate thresholds lie strictly above the minimum and at most the maximum."""
        x = np.random.default_rng(5).uniform(size=(30, 4)).astype(np.float32)
        cols, taus = candidate_thresholds(x, np.arange(4), 8, np.random.default_rng(6))
        assert list(cols) == [0, 1, 2, 3]
        assert (taus > x.min(axis=0)[:, None]).all()
        assert (taus <= x.max(axis=0)[:, None]).all()
        assert (np.diff(taus, axis=1) >= 0).all()


class TestMedoid:
    """Test cases for leaf medoid selection."""

    def test_single_vector(self):
        """A single vector is its own medoid."""
        assert medoid_index(np.ones((1, 8), dtype=bool)) == 0

    def test_majority_wins(self):
        """Of {v, v, w} the medoid is the first v."""
        v = np.array([1, 0, 1, 0], dtype=bool)
        w = ~v
        assert medoid_index(np.stack([v, v, w])) == 0
        assert medoid_index(np.stack([w, v, v])) == 1

    def test_matches_brute_force(self):
        """The medoid minimizes the summed squared distance, lowest index on ties."""
        z = np.random.default_rng(8).integers(0, 2, size=(15, 32)).astype(bool)
        zi = z.astype(np.int64)
        costs = [int(((zi[k] - zi) ** 2).sum()) for k in range(len(z))]
        assert medoid_index(z) == int(np.argmin(costs))

    def test_empty_rejected(self):
        """An empty set has no medoid."""
        with pytest.raises(ValueError):
            medoid_index(np.zeros((0, 4), dtype=bool))
