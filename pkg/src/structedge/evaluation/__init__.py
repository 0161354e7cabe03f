"""Boundary benchmark: matching, PR curves, summary metrics and synthetic data."""

from structedge.ground_truth import GroundTruth, derive_boundaries

from .matching import MatchResult, greedy_assignment, match_boundaries
from .metrics import (
    EvalOptions,
    EvalReport,
    EvalSummary,
    PRPoint,
    curve_from_counts,
    evaluate_dataset,
    f_measure,
    image_counts,
    pr_curve,
    summarize,
    thresholds,
)
from .synth import synth_corpus, synth_image, voronoi_partition

__all__ = [
    "EvalOptions",
    "EvalReport",
    "EvalSummary",
    "GroundTruth",
    "MatchResult",
    "PRPoint",
    "curve_from_counts",
    "derive_boundaries",
    "evaluate_dataset",
    "f_measure",
    "greedy_assignment",
    "image_counts",
    "match_boundaries",
    "pr_curve",
    "summarize",
    "synth_corpus",
    "synth_image",
    "thresholds",
    "voronoi_partition",
]
