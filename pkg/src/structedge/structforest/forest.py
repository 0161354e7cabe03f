"""Training patch sampling and concurrent forest training."""

from __future__ import annotations

import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from structedge.channels import ChannelParams, Image, compute_channels, feature_count, gather_features
from structedge.ground_truth import GroundTruth
from structedge.structforest.params import ForestParams
from structedge.structforest.tree import StructTree, train_tree

_LOGGER = logging.getLogger(__name__)

TrainingSample = tuple[Image, GroundTruth]


@dataclass(frozen=True)
class Forest:
    """
    Trained structured forest.

    Attributes:
        trees (tuple[StructTree, ...]): The 2T trained trees.
        channel_params (ChannelParams): Channel parameters used for training.
        forest_params (ForestParams): Training parameters.
    """
    trees: tuple[StructTree, ...]
    channel_params: ChannelParams
    forest_params: ForestParams

    @property
    def n_trees(self) -> int:
        """Number of trained trees."""
        return len(self.trees)

    @property
    def n_features(self) -> int:
        """Feature vector length the trees expect."""
        return self.trees[0].n_features if self.trees else 0


@dataclass(frozen=True)
class _Candidate:
    image: int
    rows: np.ndarray
    cols: np.ndarray
    annotators: np.ndarray
    positive: np.ndarray


def _image_candidates(index: int, gt: GroundTruth, params: ForestParams, rng: np.random.Generator) -> Optional[_Candidate]:
    half = params.d_out // 2
    rows = np.arange(half, gt.height - half + 1, params.stride)
    cols = np.arange(half, gt.width - half + 1, params.stride)
    if not len(rows) or not len(cols):
        return None
    rr, cc = (a.reshape(-1) for a in np.meshgrid(rows, cols, indexing="ij"))
    annotators = rng.integers(gt.n_annotators, size=len(rr))
    positive = np.zeros(len(rr), dtype=bool)
    for a, seg in enumerate(gt.segmentations):
        windows = sliding_window_view(seg, (params.d_out, params.d_out))[rr - half, cc - half]
        mixed = windows.max(axis=(1, 2)) != windows.min(axis=(1, 2))
        positive = np.where(annotators == a, mixed, positive)
    return _Candidate(index, rr, cc, annotators, positive)


def _pick(pool: np.ndarray, count: int, rng: np.random.Generator, kind: str) -> np.ndarray:
    if count > len(pool):
        _LOGGER.warning("Only %d %s patches available, %d requested", len(pool), kind, count)
        count = len(pool)
    return np.sort(rng.choice(pool, size=count, replace=False)) if count else pool[:0]


def sample_training_patches(
    samples: Sequence[TrainingSample],
    params: ForestParams,
    channel_params: ChannelParams,
    tree_index: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """
    Draw the training patches of one tree.

    Candidate centres lie on the stride grid with the label window inside the
    image. Each candidate gets a uniformly drawn annotator; a candidate is
    positive when that annotator's label window holds more than one segment.
    Positives and negatives are drawn in the positive_fraction ratio.

    Returns:
        tuple: (features, segs, feature_ids, n_features) with features restricted
        to the tree's ascending feature subset.
    """
    rng = np.random.default_rng([params.seed, tree_index])
    used = samples[: params.n_images] if params.n_images else samples
    if not used:
        raise ValueError("no training images")

    first_stack = compute_channels(used[0][0], channel_params, patch_size=params.d_in, label_size=params.d_out)
    n_features = feature_count(first_stack.n_channels, channel_params, params.d_in)
    n_sub = max(1, int(round(params.frac_features * n_features)))
    feature_ids = np.sort(rng.choice(n_features, size=n_sub, replace=False))

    candidates = [c for i, (_, gt) in enumerate(used) if (c := _image_candidates(i, gt, params, rng)) is not None]
    if not candidates:
        raise ValueError("training images are smaller than the label patch")
    owner = np.concatenate([np.full(len(c.rows), k) for k, c in enumerate(candidates)])
    offset = np.concatenate([np.arange(len(c.rows)) for c in candidates])
    positive = np.concatenate([c.positive for c in candidates])

    n_pos = int(round(params.n_patches * params.positive_fraction))
    chosen = np.concatenate([
        _pick(np.flatnonzero(positive), n_pos, rng, "positive"),
        _pick(np.flatnonzero(~positive), params.n_patches - n_pos, rng, "negative"),
    ])
    chosen = chosen[np.lexsort((offset[chosen], owner[chosen]))]

    half = params.d_out // 2
    features = np.empty((len(chosen), n_sub), dtype=np.float32)
    segs = np.empty((len(chosen), params.d_out, params.d_out), dtype=np.int32)
    for k in np.unique(owner[chosen]):
        sel = np.flatnonzero(owner[chosen] == k)
        cand = candidates[k]
        picks = offset[chosen[sel]]
        rows, cols = cand.rows[picks], cand.cols[picks]
        image, gt = used[cand.image]
        if cand.image == 0:
            cs = first_stack
        else:
            cs = compute_channels(image, channel_params, patch_size=params.d_in, label_size=params.d_out)
        features[sel] = gather_features(cs, np.stack([rows, cols], axis=1), feature_ids)
        for j, (r, c, a) in enumerate(zip(rows, cols, cand.annotators[picks])):
            segs[sel[j]] = gt.segmentations[a][r - half:r + half, c - half:c + half]
    _LOGGER.debug("Tree %d: sampled %d patches from %d images", tree_index, len(chosen), len(candidates))
    return features, segs, feature_ids, n_features


def train_single_tree(samples: Sequence[TrainingSample], params: ForestParams, channel_params: ChannelParams, tree_index: int) -> StructTree:
    """Sample patches for one tree and grow it. Runs inside worker processes."""
    features, segs, feature_ids, n_features = sample_training_patches(samples, params, channel_params, tree_index)
    tree_seed = int(np.random.SeedSequence([params.seed, tree_index]).generate_state(1)[0])
    return train_tree(features, segs, params, tree_seed, feature_ids=feature_ids, n_features=n_features)


async def train_forest(
    samples: Sequence[TrainingSample],
    params: ForestParams,
    channel_params: ChannelParams,
    threads: int = 1,
) -> Forest:
    """
    Train params.n_trees trees, each from its own seed.

    With threads > 1 trees are trained concurrently in a process pool; the
    result does not depend on the thread count.
    """
    params.validate()
    channel_params.validate()
    if threads <= 1:
        trees = [train_single_tree(samples, params, channel_params, t) for t in range(params.n_trees)]
    else:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=threads) as pool:
            jobs = [loop.run_in_executor(pool, train_single_tree, samples, params, channel_params, t) for t in range(params.n_trees)]
            trees = list(await asyncio.gather(*jobs))
    for t, tree in enumerate(trees):
        _LOGGER.info("Tree %d: %d nodes, %d leaves, depth %d", t, tree.n_nodes, tree.n_leaves, tree.depth())
    return Forest(tuple(trees), channel_params, params)
