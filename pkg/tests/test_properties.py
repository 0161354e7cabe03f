"""Randomized checks of core routines against brute-force references."""

import numpy as np

from structedge.detector import sharpen_batch, sharpen_objective
from structedge.evaluation.synth import voronoi_partition
from structedge.structforest.labels import PairSampling, SegPatch, apply_mapping, apply_mapping_batch
from structedge.structforest.splits import best_split, candidate_thresholds, info_gain, medoid_index

# pylint: disable=line-too-long


class TestMedoidOracle:
    """medoid_index against all-pairs search."""

    def test_random_instances(self):
        """1000 random binary sets."""
        rng = np.random.default_rng(100)
        for _ in range(1000):
            n = int(rng.integers(1, 51))
            m = int(rng.integers(1, 65))
            z = rng.integers(0, 2, size=(n, m)).astype(bool)
            zi = z.astype(np.int64)
            costs = [int(((zi[k] - zi) ** 2).sum()) for k in range(n)]
            assert medoid_index(z) == int(np.argmin(costs))


class TestMappingInvariance:
    """Pair vectors ignore how segments are numbered."""

    def test_random_permutations(self):
        """1000 random patches, id permutations and pair samplings."""
        rng = np.random.default_rng(101)
        for _ in range(1000):
            ids = rng.integers(0, int(rng.integers(1, 6)), size=(8, 8))
            perm = rng.permutation(int(ids.max()) + 1) + 7
            phi = PairSampling.sample(8, int(rng.integers(1, 200)), rng)
            np.testing.assert_array_equal(apply_mapping_batch(ids[None], phi)[0], apply_mapping_batch(perm[ids][None], phi)[0])
            np.testing.assert_array_equal(apply_mapping(SegPatch(ids), phi), apply_mapping(SegPatch(perm[ids]), phi))


class TestSplitOracle:
    """best_split against exhaustive scans."""

    def test_random_nodes(self):
        """200 random node datasets."""
        rng = np.random.default_rng(102)
        for trial in range(200):
            n = int(rng.integers(4, 30))
            n_features = int(rng.integers(1, 5))
            x = rng.uniform(size=(n, n_features)).astype(np.float32)
            labels = rng.integers(0, 2, size=n)
            subset = np.arange(n_features)
            result = best_split(x, labels, subset, 6, "entropy", np.random.default_rng(trial))
            cols, taus = candidate_thresholds(x, subset, 6, np.random.default_rng(trial))
            gains = []
            for row, col in enumerate(cols):
                for tau in taus[row]:
                    left = x[:, col] < tau
                    if left.all() or not left.any():
                        continue
                    gain = info_gain(labels, labels[left], labels[~left], "entropy", 2)
                    assert gain >= -1e-12
                    gains.append(gain)
            if result is None:
                assert not gains or max(gains) <= 1e-12
            else:
                assert abs(result[1] - max(gains)) <= 1e-9


class TestSharpenMonotonicity:
    """One sharpening pass never increases the squared color error."""

    def test_random_masks(self):
        """500 random patches and Voronoi masks, segment means held fixed."""
        rng = np.random.default_rng(103)
        for _ in range(500):
            x = rng.uniform(size=(16, 16, 3))
            ids = voronoi_partition(16, 16, int(rng.integers(1, 6)), rng).astype(np.int64)
            means = np.stack([x[ids == s].mean(axis=0) for s in range(int(ids.max()) + 1)])
            stepped = sharpen_batch(np.moveaxis(x, -1, 0)[None], ids[None], 1)[0]
            assert sharpen_objective(x, stepped, means) <= sharpen_objective(x, ids, means) + 1e-9
