"""Correspondence of thinned boundary predictions to ground truth boundaries."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import chain
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchResult:
    """
    Outcome of matching one binary prediction against all annotators.

    Attributes:
        matched_pred (np.ndarray): Predicted pixels matched in at least one annotator map.
        matched_gt (tuple[np.ndarray, ...]): Matched pixels of every annotator map.
        n_pred (int): Predicted pixel count.
        n_gt (int): Boundary pixel count summed over annotators.
    """
    matched_pred: np.ndarray
    matched_gt: tuple[np.ndarray, ...]
    n_pred: int
    n_gt: int

    @property
    def tp_pred(self) -> int:
        """Predicted pixels matched in at least one annotator map."""
        return int(self.matched_pred.sum())

    @property
    def tp_gt(self) -> int:
        """Annotator boundary pixels matched, summed over annotators."""
        return int(sum(m.sum() for m in self.matched_gt))


def _candidate_pairs(pred_pts: np.ndarray, gt_pts: np.ndarray, max_dist: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    neighbours = cKDTree(pred_pts).query_ball_tree(cKDTree(gt_pts), r=max_dist)
    counts = np.fromiter((len(n) for n in neighbours), dtype=np.int64, count=len(neighbours))
    pi = np.repeat(np.arange(len(pred_pts)), counts)
    gi = np.fromiter(chain.from_iterable(neighbours), dtype=np.int64, count=int(counts.sum()))
    dist = np.hypot(*(pred_pts[pi] - gt_pts[gi]).T.astype(np.float64)) if len(pi) else np.zeros(0)
    return pi, gi, dist


def greedy_assignment(pi: np.ndarray, gi: np.ndarray, dist: np.ndarray, n_pred: int, n_gt: int) -> tuple[np.ndarray, np.ndarray]:
    """
    One-to-one assignment taking candidate pairs in order of increasing distance.

    Distance ties are taken in (prediction, ground truth) index order.

    Returns:
        tuple: (matched prediction flags, matched ground truth flags).
    """
    used_p = np.zeros(n_pred, dtype=bool)
    used_g = np.zeros(n_gt, dtype=bool)
    for k in np.lexsort((gi, pi, dist)):
        p, g = pi[k], gi[k]
        if not used_p[p] and not used_g[g]:
            used_p[p] = True
            used_g[g] = True
    return used_p, used_g


def match_boundaries(pred_thin: np.ndarray, gt_boundaries: Sequence[np.ndarray], tol: float) -> MatchResult:
    """
    Match a thinned binary prediction to every annotator's boundary map.

    Within each annotator map, predicted and boundary pixels closer than
    tol * image diagonal are paired one-to-one. A predicted pixel counts as
    matched if it is paired in any map.

    Raises:
        ValueError: On a size mismatch or a non-positive tolerance.
    """
    pred = np.asarray(pred_thin, dtype=bool)
    if tol <= 0:
        raise ValueError("tolerance must be > 0")
    if any(np.shape(g) != pred.shape for g in gt_boundaries):
        raise ValueError("prediction and ground truth sizes differ")
    max_dist = tol * float(np.hypot(*pred.shape))
    pred_pts = np.argwhere(pred)
    matched_pred = np.zeros(len(pred_pts), dtype=bool)
    matched_gt = []
    n_gt = 0
    for gt in gt_boundaries:
        gt_mask = np.asarray(gt, dtype=bool)
        gt_pts = np.argwhere(gt_mask)
        n_gt += len(gt_pts)
        gt_matched = np.zeros(gt_mask.shape, dtype=bool)
        if len(pred_pts) and len(gt_pts):
            pi, gi, dist = _candidate_pairs(pred_pts, gt_pts, max_dist)
            used_p, used_g = greedy_assignment(pi, gi, dist, len(pred_pts), len(gt_pts))
            matched_pred |= used_p
            gt_matched[tuple(gt_pts[used_g].T)] = True
        matched_gt.append(gt_matched)
    pred_matched = np.zeros(pred.shape, dtype=bool)
    if len(pred_pts):
        pred_matched[tuple(pred_pts[matched_pred].T)] = True
    return MatchResult(pred_matched, tuple(matched_gt), len(pred_pts), n_gt)
