"""Structured decision trees: training and traversal."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from structedge.constants import MIN_SPLIT_GAIN
from structedge.structforest.discretize import discretize
from structedge.structforest.labels import PairSampling, SegPatch, apply_mapping_batch, canonicalize, edges_of
from structedge.structforest.params import ForestParams
from structedge.structforest.splits import best_split, medoid_index

# pylint: disable=too-many-instance-attributes,too-many-locals

_LOGGER = logging.getLogger(__name__)

FeatureFetch = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class StructTree:
    """
    Binary tree in flat array form, nodes in depth-first preorder with the root at 0.

    A sample goes to the left child when x[feature] < threshold.

    Attributes:
        feature (np.ndarray): Split feature per node (0 for leaves), int32.
        threshold (np.ndarray): Split threshold per node, float32.
        left (np.ndarray): Left child per node (-1 for leaves), int32.
        right (np.ndarray): Right child per node (-1 for leaves), int32.
        leaf_index (np.ndarray): Leaf ordinal per node (-1 for internal nodes), int32.
        leaf_segs (np.ndarray): (n_leaves, d_out, d_out) canonical segment ids, uint8.
        leaf_edges (np.ndarray): (n_leaves, d_out, d_out) edge bits, bool.
        leaf_counts (np.ndarray): Training samples per leaf, uint32.
        n_features (int): Length of the feature vectors the tree was trained on.
    """
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_index: np.ndarray
    leaf_segs: np.ndarray
    leaf_edges: np.ndarray
    leaf_counts: np.ndarray
    n_features: int

    @property
    def n_nodes(self) -> int:
        """Total node count."""
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        """Leaf count."""
        return len(self.leaf_segs)

    @property
    def is_leaf(self) -> np.ndarray:
        """Leaf flag per node."""
        return self.leaf_index >= 0

    @property
    def d_out(self) -> int:
        """Label patch side."""
        return int(self.leaf_segs.shape[1])

    def node_depths(self) -> np.ndarray:
        """Depth of every node (root at 0)."""
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.leaf_index[node] < 0:
                depth[self.left[node]] = depth[node] + 1
                depth[self.right[node]] = depth[node] + 1
        return depth

    def depth(self) -> int:
        """Maximum root-to-leaf depth."""
        return int(self.node_depths().max(initial=0))

    def apply(self, fetch: FeatureFetch, n_samples: int) -> np.ndarray:
        """
        Route samples to leaves level by level.

        Args:
            fetch (FeatureFetch): fetch(sample_ids, feature_ids) returns the value of
                feature feature_ids[i] for sample sample_ids[i].
            n_samples (int): Number of samples.

        Returns:
            np.ndarray: Leaf ordinal per sample.
        """
        node = np.zeros(n_samples, dtype=np.int64)
        active = np.arange(n_samples)
        while active.size:
            current = node[active]
            inner = self.leaf_index[current] < 0
            active = active[inner]
            current = current[inner]
            if not active.size:
                break
            values = fetch(active, self.feature[current])
            go_left = values < self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
        return self.leaf_index[node].astype(np.int64)

    def apply_matrix(self, x: np.ndarray) -> np.ndarray:
        """Leaf ordinal for each row of a dense (n, n_features) feature matrix."""
        x = np.asarray(x, dtype=np.float32)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise ValueError(f"feature vectors must have length {self.n_features}")
        return self.apply(lambda rows, feats: x[rows, feats], len(x))


def tree_predict(tree: StructTree, x: np.ndarray) -> tuple[SegPatch, np.ndarray]:
    """
    Leaf label reached by a single feature vector.

    Raises:
        ValueError: If x does not match the training feature length.
    """
    x = np.asarray(x, dtype=np.float32)
    if x.ndim != 1 or len(x) != tree.n_features:
        raise ValueError(f"feature vector must have length {tree.n_features}")
    leaf = int(tree.apply_matrix(x[None])[0])
    return SegPatch(tree.leaf_segs[leaf]), tree.leaf_edges[leaf].copy()


@dataclass
class _NodeTask:
    samples: np.ndarray
    depth: int
    path: int
    parent: int
    is_left: bool


class _TreeBuilder:
    """Collects nodes in preorder while a tree is grown."""

    def __init__(self) -> None:
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.leaf_index: list[int] = []
        self.segs: list[np.ndarray] = []
        self.counts: list[int] = []

    def add_node(self, parent: int, is_left: bool) -> int:
        node = len(self.feature)
        self.feature.append(0)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_index.append(-1)
        if parent >= 0:
            (self.left if is_left else self.right)[parent] = node
        return node

    def make_leaf(self, node: int, seg: np.ndarray, count: int) -> None:
        self.leaf_index[node] = len(self.segs)
        self.segs.append(canonicalize(seg))
        self.counts.append(count)

    def build(self, n_features: int, d_out: int) -> StructTree:
        segs = np.stack(self.segs) if self.segs else np.zeros((0, d_out, d_out), dtype=np.uint8)
        return StructTree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold, dtype=np.float32),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            leaf_index=np.asarray(self.leaf_index, dtype=np.int32),
            leaf_segs=segs.astype(np.uint8),
            leaf_edges=edges_of(segs),
            leaf_counts=np.asarray(self.counts, dtype=np.uint32),
            n_features=n_features,
        )


def train_tree(
    x: np.ndarray,
    segs: np.ndarray,
    params: ForestParams,
    tree_seed: int,
    *,
    feature_ids: Optional[np.ndarray] = None,
    n_features: Optional[int] = None,
) -> StructTree:
    """
    Grow one structured tree.

    At each node a fresh pair sampling, seeded by (tree_seed, node path), maps
    the node's labels to pair vectors, which are discretized before the best
    split over the tree's features is searched. A node becomes a leaf at
    max_depth, below 2 * min_samples samples, with identical pair vectors, a
    single discrete class, or no positive-gain split. Leaves store the medoid
    label and its edge map.

    Args:
        x (np.ndarray): (n, F) feature values.
        segs (np.ndarray): (n, d_out, d_out) segment ids of the label patches.
        params (ForestParams): Training parameters.
        tree_seed (int): Seed of this tree.
        feature_ids (np.ndarray | None): Global feature index of every column of x
            (ascending). If None, the columns of x are all features and the tree
            draws its own frac_features subset.
        n_features (int | None): Full feature vector length, required with feature_ids.

    Returns:
        StructTree: The trained tree.
    """
    x = np.asarray(x, dtype=np.float32)
    segs = np.asarray(segs)
    n = len(segs)
    if n == 0 or len(x) != n:
        raise ValueError("training data must be non-empty with one feature row per label")
    d_out = segs.shape[1]

    if feature_ids is None:
        n_features = x.shape[1]
        n_sub = max(1, int(round(params.frac_features * n_features)))
        feature_ids = np.sort(np.random.default_rng([tree_seed]).choice(n_features, size=n_sub, replace=False))
        x = x[:, feature_ids]
    else:
        feature_ids = np.asarray(feature_ids, dtype=np.int64)
        if n_features is None:
            raise ValueError("n_features is required with feature_ids")
        if np.any(np.diff(feature_ids) <= 0):
            raise ValueError("feature_ids must be strictly ascending")

    builder = _TreeBuilder()
    stack = [_NodeTask(np.arange(n), 0, 1, -1, True)]
    n_splits = 0
    while stack:
        task = stack.pop()
        node = builder.add_node(task.parent, task.is_left)
        rng = np.random.default_rng([tree_seed, task.path])
        idx = task.samples
        split = _choose_split(x, segs, idx, task.depth, feature_ids, params, rng)
        if split is None:
            phi = PairSampling.sample(d_out, params.m, rng)
            z = apply_mapping_batch(segs[idx], phi)
            builder.make_leaf(node, segs[idx[medoid_index(z)]], len(idx))
            continue
        column, threshold = split
        goes_left = x[idx, column] < threshold
        builder.feature[node] = int(feature_ids[column])
        builder.threshold[node] = threshold
        n_splits += 1
        # right pushed first so the left subtree is numbered first
        stack.append(_NodeTask(idx[~goes_left], task.depth + 1, 2 * task.path + 1, node, False))
        stack.append(_NodeTask(idx[goes_left], task.depth + 1, 2 * task.path, node, True))

    tree = builder.build(int(n_features), d_out)
    _LOGGER.debug("Tree seed %d: %d samples, %d splits, %d leaves, depth %d", tree_seed, n, n_splits, tree.n_leaves, tree.depth())
    return tree


def _choose_split(
    x: np.ndarray,
    segs: np.ndarray,
    idx: np.ndarray,
    depth: int,
    feature_ids: np.ndarray,
    params: ForestParams,
    rng: np.random.Generator,
) -> Optional[tuple[int, float]]:
    """Return (column, threshold) of the node split, or None to make a leaf."""
    if depth >= params.max_depth or len(idx) < 2 * params.min_samples:
        return None
    phi = PairSampling.sample(segs.shape[1], params.m, rng)
    z = apply_mapping_batch(segs[idx], phi)
    if np.all(z == z[0]):
        return None
    labels = discretize(z, params.k_classes, params.discretizer, seed=int(rng.integers(2**31 - 1)), pca_dims=params.pca_dims)
    if np.all(labels == labels[0]):
        return None
    found = best_split(
        x[idx],
        labels,
        feature_ids,
        params.n_thresholds,
        params.gain,
        rng,
        k_classes=params.k_classes,
        min_child=params.min_samples,
    )
    if found is None or found[1] <= MIN_SPLIT_GAIN:
        return None
    split, _ = found
    return int(np.searchsorted(feature_ids, split.feature_index)), split.threshold
