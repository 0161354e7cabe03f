"""Precision/recall curves and ODS, OIS, AP and R50 summaries."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from structedge.detector import EdgeProbMap, nms
from structedge.evaluation.matching import match_boundaries
from structedge.ground_truth import GroundTruth
from structedge.type_definitions import EvalReportDict, EvalSummaryDict, PRPointDict

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalOptions:
    """
    Benchmark options.

    Attributes:
        n_thresholds (int): Thresholds i / (n + 1), i = 1..n.
        tolerance (float): Matching distance as a fraction of the image diagonal.
        nms_radius (int): Suppression radius along the edge normal.
        nms_multiplier (float): Multiplier applied to the centre value before comparison.
        boundary_radius (int): Border attenuation width (0 disables it).
    """
    n_thresholds: int = 99
    tolerance: float = 0.0075
    nms_radius: int = 1
    nms_multiplier: float = 1.0
    boundary_radius: int = 0

    def validate(self) -> None:
        """Raise ValueError if an option is out of range."""
        if self.n_thresholds < 1:
            raise ValueError("n_thresholds must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.nms_radius < 1 or self.boundary_radius < 0 or self.nms_multiplier <= 0:
            raise ValueError("nms_radius must be >= 1, boundary_radius >= 0 and nms_multiplier > 0")


@dataclass(frozen=True)
class PRPoint:
    """Pooled counts and precision/recall at one threshold."""
    threshold: float
    tp_pred: int
    fp_pred: int
    tp_gt: int
    fn_gt: int
    precision: float
    recall: float

    @property
    def f_measure(self) -> float:
        """Harmonic mean of precision and recall (0 if both are 0)."""
        return f_measure(self.precision, self.recall)

    def to_dict(self) -> PRPointDict:
        """Plain dict form."""
        return PRPointDict(**asdict(self))  # type: ignore[typeddict-item]


@dataclass(frozen=True)
class EvalSummary:
    """Benchmark summary metrics."""
    ods: float
    ods_threshold: float
    ois: float
    ap: float
    r50: float
    n_thresholds: int
    n_images: int

    def to_dict(self) -> EvalSummaryDict:
        """Plain dict form."""
        return EvalSummaryDict(**asdict(self))  # type: ignore[typeddict-item]


@dataclass(frozen=True)
class EvalReport:
    """Summary plus the pooled curve."""
    summary: EvalSummary
    curve: tuple[PRPoint, ...]

    def to_dict(self) -> EvalReportDict:
        """Plain dict form."""
        return EvalReportDict(summary=self.summary.to_dict(), curve=[p.to_dict() for p in self.curve])

    def to_json(self) -> str:
        """JSON document of the report."""
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        """PR curve as CSV rows."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["threshold", "tp_pred", "fp_pred", "tp_gt", "fn_gt", "precision", "recall", "f"])
        for p in self.curve:
            writer.writerow([f"{p.threshold:.6f}", p.tp_pred, p.fp_pred, p.tp_gt, p.fn_gt, f"{p.precision:.6f}", f"{p.recall:.6f}", f"{p.f_measure:.6f}"])
        return buffer.getvalue()

    def to_table(self) -> str:
        """Plain-text PR table followed by the summary line."""
        lines = [f"{'threshold':>9}  {'precision':>9}  {'recall':>9}  {'F':>9}"]
        lines += [f"{p.threshold:9.4f}  {p.precision:9.4f}  {p.recall:9.4f}  {p.f_measure:9.4f}" for p in self.curve]
        s = self.summary
        lines.append(f"ODS {s.ods:.4f} (t={s.ods_threshold:.4f})  OIS {s.ois:.4f}  AP {s.ap:.4f}  R50 {s.r50:.4f}  images {s.n_images}")
        return "\n".join(lines)


def f_measure(precision: float, recall: float) -> float:
    """2PR / (P + R), 0 when both are 0."""
    return 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def thresholds(n_thresholds: int) -> np.ndarray:
    """Uniform thresholds i / (n + 1), i = 1..n."""
    return np.arange(1, n_thresholds + 1) / (n_thresholds + 1)


def image_counts(pred: EdgeProbMap | np.ndarray, gt: GroundTruth, opts: EvalOptions) -> np.ndarray:
    """
    Per-threshold counts of one image.

    The map is thinned once, then binarized with e >= t at every threshold.

    Returns:
        np.ndarray: (n_thresholds, 4) int64 rows (tp_pred, n_pred, tp_gt, n_gt).
    """
    values = pred.values if isinstance(pred, EdgeProbMap) else np.asarray(pred, dtype=np.float32)
    if values.shape != (gt.height, gt.width):
        raise ValueError("prediction and ground truth sizes differ")
    thin = nms(values, opts.nms_radius, opts.nms_multiplier, opts.boundary_radius).values
    n_gt = int(sum(b.sum() for b in gt.boundaries))
    counts = np.zeros((opts.n_thresholds, 4), dtype=np.int64)
    counts[:, 3] = n_gt
    for i, t in enumerate(thresholds(opts.n_thresholds)):
        binary = thin >= t
        if not binary.any():
            continue
        result = match_boundaries(binary, gt.boundaries, opts.tolerance)
        counts[i, :3] = (result.tp_pred, result.n_pred, result.tp_gt)
    return counts


def curve_from_counts(counts: np.ndarray) -> tuple[PRPoint, ...]:
    """Build PR points from (n_thresholds, 4) pooled counts."""
    ts = thresholds(len(counts))
    points = []
    for t, (tp_pred, n_pred, tp_gt, n_gt) in zip(ts, np.asarray(counts, dtype=np.int64)):
        precision = tp_pred / n_pred if n_pred else 0.0
        recall = tp_gt / n_gt if n_gt else 0.0
        points.append(PRPoint(float(t), int(tp_pred), int(n_pred - tp_pred), int(tp_gt), int(n_gt - tp_gt), float(precision), float(recall)))
    return tuple(points)


def pr_curve(pred_maps: Sequence[EdgeProbMap | np.ndarray], gts: Sequence[GroundTruth], n_thresholds: int = 99, opts: Optional[EvalOptions] = None) -> tuple[PRPoint, ...]:
    """Dataset PR curve with counts pooled over images."""
    opts = opts or EvalOptions(n_thresholds=n_thresholds)
    return curve_from_counts(sum(_all_counts(pred_maps, gts, opts)))


def _all_counts(pred_maps: Sequence[EdgeProbMap | np.ndarray], gts: Sequence[GroundTruth], opts: EvalOptions) -> list[np.ndarray]:
    if len(pred_maps) != len(gts):
        raise ValueError("one prediction per image is required")
    if not gts:
        raise ValueError("no images to evaluate")
    return [image_counts(p, g, opts) for p, g in zip(pred_maps, gts)]


def _average_precision(curve: Sequence[PRPoint]) -> float:
    recall = np.array([p.recall for p in curve])
    precision = np.array([p.precision for p in curve])
    order = np.argsort(recall, kind="stable")
    recall, precision = recall[order], precision[order]
    interp = np.maximum.accumulate(precision[::-1])[::-1]
    steps = np.diff(np.concatenate([[0.0], recall]))
    return float(np.clip((steps * interp).sum(), 0.0, 1.0))


def _recall_at_half_precision(curve: Sequence[PRPoint]) -> float:
    best = 0.0
    for p in curve:
        if p.precision >= 0.5:
            best = max(best, p.recall)
    for a, b in zip(curve, curve[1:]):
        if (a.precision - 0.5) * (b.precision - 0.5) < 0:
            frac = (0.5 - a.precision) / (b.precision - a.precision)
            best = max(best, a.recall + frac * (b.recall - a.recall))
    return float(best)


def summarize(curve: Sequence[PRPoint], per_image_counts: Sequence[np.ndarray]) -> EvalSummary:
    """
    ODS, OIS, AP and R50 of a pooled curve and its per-image counts.

    OIS pools every image's counts at that image's best-F threshold. AP is the
    area under the precision envelope (running maximum from the high recall
    side) over recall steps from 0. R50 is the largest recall reached with
    precision >= 0.5, including linear crossings between adjacent points.

    Raises:
        ValueError: If the curve is empty.
    """
    if not curve:
        raise ValueError("empty precision/recall curve")
    f = np.array([p.f_measure for p in curve])
    best = int(np.argmax(f))

    ois_counts = np.zeros(4, dtype=np.int64)
    for counts in per_image_counts:
        image_curve = curve_from_counts(counts)
        pick = int(np.argmax([p.f_measure for p in image_curve]))
        ois_counts += np.asarray(counts)[pick]
    tp_pred, n_pred, tp_gt, n_gt = ois_counts
    ois = f_measure(tp_pred / n_pred if n_pred else 0.0, tp_gt / n_gt if n_gt else 0.0)

    return EvalSummary(
        ods=float(f[best]),
        ods_threshold=curve[best].threshold,
        ois=float(ois),
        ap=_average_precision(curve),
        r50=_recall_at_half_precision(curve),
        n_thresholds=len(curve),
        n_images=len(per_image_counts),
    )


def evaluate_dataset(
    pred_maps: Sequence[EdgeProbMap | np.ndarray],
    gts: Sequence[GroundTruth],
    opts: Optional[EvalOptions] = None,
) -> tuple[EvalReport, list[np.ndarray]]:
    """
    Benchmark a set of predictions.

    Returns:
        tuple: (report, per-image (n_thresholds, 4) counts).
    """
    opts = opts or EvalOptions()
    opts.validate()
    per_image = _all_counts(pred_maps, gts, opts)
    curve = curve_from_counts(sum(per_image))
    summary = summarize(curve, per_image)
    _LOGGER.debug("Evaluated %d images: ODS %.4f OIS %.4f AP %.4f", len(gts), summary.ods, summary.ois, summary.ap)
    return EvalReport(summary, curve), per_image
