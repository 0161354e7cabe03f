"""Common test fixtures for the structedge test suite."""

import os

import numpy as np
import pytest

from structedge.channels import ChannelParams, Image, feature_count
from structedge.evaluation.synth import synth_corpus
from structedge.structforest.forest import Forest, train_single_tree
from structedge.structforest.labels import canonicalize, edges_of
from structedge.structforest.params import ForestParams
from structedge.structforest.tree import StructTree

# pylint: disable=line-too-long, redefined-outer-name

DEFAULT_FEATURES = feature_count(13, ChannelParams())

# Small enough to train in a few seconds, large enough to produce edge leaves
TINY_FOREST_PARAMS = ForestParams(n_trees=2, n_trees_eval=1, m=64, n_patches=400, max_depth=16, min_samples=4, seed=3)


def pytest_collection_modifyitems(config, items):  # pylint: disable=unused-argument
    """Skip desk-scale runs unless STRUCTEDGE_RUN_SLOW=1."""
    if os.environ.get("STRUCTEDGE_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set STRUCTEDGE_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def make_leaf_tree(seg: np.ndarray, n_features: int = DEFAULT_FEATURES) -> StructTree:
    """Tree made of a single leaf holding seg."""
    ids = canonicalize(seg)[None]
    return StructTree(
        feature=np.zeros(1, dtype=np.int32),
        threshold=np.zeros(1, dtype=np.float32),
        left=np.full(1, -1, dtype=np.int32),
        right=np.full(1, -1, dtype=np.int32),
        leaf_index=np.zeros(1, dtype=np.int32),
        leaf_segs=ids,
        leaf_edges=edges_of(ids),
        leaf_counts=np.array([10], dtype=np.uint32),
        n_features=n_features,
    )


def make_stump(feature: int, threshold: float, n_features: int = 10) -> StructTree:
    """Depth-1 tree: left leaf is a vertical split, right leaf a horizontal one."""
    vertical = np.zeros((16, 16), dtype=np.uint8)
    vertical[:, 8:] = 1
    segs = np.stack([vertical, vertical.T.copy()])
    return StructTree(
        feature=np.array([feature, 0, 0], dtype=np.int32),
        threshold=np.array([threshold, 0.0, 0.0], dtype=np.float32),
        left=np.array([1, -1, -1], dtype=np.int32),
        right=np.array([2, -1, -1], dtype=np.int32),
        leaf_index=np.array([-1, 0, 1], dtype=np.int32),
        leaf_segs=segs,
        leaf_edges=edges_of(segs),
        leaf_counts=np.array([12, 9], dtype=np.uint32),
        n_features=n_features,
    )


@pytest.fixture
def vertical_split():
    """16x16 mask split into left and right halves at column 8."""
    seg = np.zeros((16, 16), dtype=np.int32)
    seg[:, 8:] = 1
    return seg


@pytest.fixture
def leaf_forest():
    """Factory for forests whose trees are all the same single leaf."""
    def factory(seg, n_trees=8, channel_params=None):
        tree = make_leaf_tree(seg)
        params = ForestParams(n_trees=n_trees, n_trees_eval=n_trees // 2)
        return Forest((tree,) * n_trees, channel_params or ChannelParams(), params)
    return factory


@pytest.fixture
def rgb_image():
    """Random 32x32 RGB image."""
    rng = np.random.default_rng(0)
    return Image(rng.uniform(0.0, 1.0, size=(32, 32, 3)).astype(np.float32))


@pytest.fixture
def two_region_image():
    """64x64 image, dark left half and bright right half, boundary at column 32."""
    data = np.empty((64, 64, 3), dtype=np.float32)
    data[:, :32] = (0.2, 0.3, 0.6)
    data[:, 32:] = (0.8, 0.7, 0.2)
    return Image(data)


@pytest.fixture(scope="session")
def small_corpus():
    """Six 64x64 synthetic images with ground truth."""
    return synth_corpus(11, 6, 64)


@pytest.fixture(scope="session")
def tiny_forest(small_corpus):
    """Two-tree forest trained on the small corpus."""
    images, gts = small_corpus
    samples = list(zip(images, gts))
    channel_params = ChannelParams()
    trees = tuple(train_single_tree(samples, TINY_FOREST_PARAMS, channel_params, t) for t in range(TINY_FOREST_PARAMS.n_trees))
    return Forest(trees, channel_params, TINY_FOREST_PARAMS)
