"""Split scoring and leaf medoid selection."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from structedge.type_definitions import GAIN_ENTROPY, GAIN_GINI

_LOGGER = logging.getLogger(__name__)

# Upper bound on samples x features x thresholds scored at once
_SCORE_BUDGET = 4_000_000


@dataclass(frozen=True)
class SplitParams:
    """
    Axis-aligned split: a sample goes left when x[feature_index] < threshold.

    Attributes:
        feature_index (int): Candidate feature index.
        threshold (float): Split threshold (float32 precision).
    """
    feature_index: int
    threshold: float


def _impurity_from_counts(counts: np.ndarray, gain_type: str) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum(axis=-1, keepdims=True)
    p = np.divide(counts, total, out=np.zeros_like(counts), where=total > 0)
    if gain_type == GAIN_ENTROPY:
        logs = np.log2(p, out=np.zeros_like(p), where=p > 0)
        return -(p * logs).sum(axis=-1)
    if gain_type == GAIN_GINI:
        return (p * (1.0 - p)).sum(axis=-1)
    raise ValueError(f"unknown gain type: {gain_type}")


def impurity(labels: np.ndarray, k_classes: int, gain_type: str = GAIN_ENTROPY) -> float:
    """Shannon entropy (bits) or Gini impurity of the empirical label distribution."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("impurity of an empty label set")
    return float(_impurity_from_counts(np.bincount(labels, minlength=k_classes), gain_type))


def info_gain(parent: np.ndarray, left: np.ndarray, right: np.ndarray, gain_type: str = GAIN_ENTROPY, k_classes: int | None = None) -> float:
    """
    H(parent) minus the size-weighted impurities of the children.

    An empty child contributes zero weight.
    """
    parent = np.asarray(parent, dtype=np.int64)
    left = np.asarray(left, dtype=np.int64)
    right = np.asarray(right, dtype=np.int64)
    k = k_classes or int(max(parent.max(initial=0), left.max(initial=0), right.max(initial=0))) + 1
    n = len(parent)
    gain = impurity(parent, k, gain_type)
    for child in (left, right):
        if len(child):
            gain -= len(child) / n * impurity(child, k, gain_type)
    return gain


def candidate_thresholds(x: np.ndarray, feature_subset: np.ndarray, n_thresholds: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """
    Draw candidate thresholds uniformly in (min, max) of every non-constant feature.

    Args:
        x (np.ndarray): (n, n_subset) feature values, columns aligned with feature_subset.
        feature_subset (np.ndarray): Feature indices of the columns of x.
        n_thresholds (int): Draws per feature.
        rng (np.random.Generator): Node random generator.

    Returns:
        tuple: (columns, thresholds) where thresholds has shape (len(columns), n_thresholds),
        sorted ascending per row, float32. Constant features are skipped.
    """
    x = np.asarray(x, dtype=np.float32)
    lo = x.min(axis=0).astype(np.float64)
    hi = x.max(axis=0).astype(np.float64)
    draws = rng.uniform(size=(len(feature_subset), n_thresholds))
    keep = np.flatnonzero(hi > lo)
    taus = (lo[keep, None] + draws[keep] * (hi - lo)[keep, None]).astype(np.float32)
    # float32 rounding may hit the minimum, which separates nothing
    taus = np.maximum(taus, np.nextafter(lo[keep, None].astype(np.float32), np.float32(np.inf)))
    return keep, np.sort(taus, axis=1)


def best_split(
    x: np.ndarray,
    labels: np.ndarray,
    feature_subset: np.ndarray,
    n_thresholds: int,
    gain_type: str,
    rng: np.random.Generator,
    *,
    k_classes: int | None = None,
    min_child: int = 1,
) -> tuple[SplitParams, float] | None:
    """
    Highest-gain split over sampled thresholds of the given features.

    Ties go to the lowest feature position in feature_subset, then the lowest
    threshold. Candidates leaving a child with fewer than min_child samples are
    not considered.

    Args:
        x (np.ndarray): (n, len(feature_subset)) feature values.
        labels (np.ndarray): (n,) discrete labels.
        feature_subset (np.ndarray): Feature indices of the columns of x.
        n_thresholds (int): Candidate thresholds per feature.
        gain_type (str): "entropy" or "gini".
        rng (np.random.Generator): Node random generator.

    Returns:
        tuple | None: (SplitParams, gain), or None if no candidate is valid.
    """
    x = np.asarray(x, dtype=np.float32)
    labels = np.asarray(labels, dtype=np.int64)
    feature_subset = np.asarray(feature_subset, dtype=np.int64)
    n = len(labels)
    if n < 2 or x.shape[1] == 0:
        return None
    k = k_classes or int(labels.max()) + 1
    cols, taus = candidate_thresholds(x, feature_subset, n_thresholds, rng)
    if len(cols) == 0:
        return None

    onehot = np.eye(k, dtype=np.float32)[labels]
    parent_counts = onehot.sum(axis=0)
    parent_h = float(_impurity_from_counts(parent_counts, gain_type))
    gains = np.full(taus.shape, -np.inf)
    step = max(1, _SCORE_BUDGET // (n * taus.shape[1]))
    for start in range(0, len(cols), step):
        block = cols[start:start + step]
        # (n, B, T) left mask
        goes_left = x[:, block, None] < taus[None, start:start + step, :]
        left_counts = np.einsum("nbt,nk->btk", goes_left.astype(np.float32), onehot)
        right_counts = parent_counts - left_counts
        n_left = left_counts.sum(axis=-1)
        n_right = n - n_left
        child_h = (n_left * _impurity_from_counts(left_counts, gain_type) + n_right * _impurity_from_counts(right_counts, gain_type)) / n
        block_gain = parent_h - child_h
        block_gain[(n_left < min_child) | (n_right < min_child)] = -np.inf
        gains[start:start + step] = block_gain

    flat = int(np.argmax(gains))
    row, t = divmod(flat, taus.shape[1])
    if not np.isfinite(gains[row, t]):
        return None
    return SplitParams(int(feature_subset[cols[row]]), float(taus[row, t])), float(gains[row, t])


def medoid_index(z: np.ndarray) -> int:
    """
    Index of the pair vector closest to the mean, lowest index on ties.

    Uses exact integer arithmetic: argmin_k sum_j (n * z_kj - S_j)^2, with S the
    column sums, which ranks identically to sum_ij (z_kj - z_ij)^2.
    """
    z = np.asarray(z, dtype=np.int64)
    if z.ndim != 2 or len(z) == 0:
        raise ValueError("medoid of an empty set")
    n = len(z)
    scores = ((n * z - z.sum(axis=0)) ** 2).sum(axis=1)
    return int(np.argmin(scores))
