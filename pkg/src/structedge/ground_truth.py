"""Multi-annotator ground truth segmentations."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from structedge.structforest.labels import edges_of


def derive_boundaries(seg_map: np.ndarray) -> np.ndarray:
    """Boundary map of a full segmentation, same rule as for label patches."""
    seg_map = np.asarray(seg_map)
    if seg_map.ndim != 2:
        raise ValueError("segmentation must be a 2-D id map")
    return edges_of(seg_map)


@dataclass(frozen=True)
class GroundTruth:
    """
    Annotator segmentations of one image.

    Attributes:
        segmentations (tuple[np.ndarray, ...]): (H, W) integer id maps, one per annotator.
    """
    segmentations: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        segs = tuple(np.asarray(s, dtype=np.int32) for s in self.segmentations)
        if not segs:
            raise ValueError("ground truth needs at least one annotator")
        if any(s.ndim != 2 or s.shape != segs[0].shape for s in segs):
            raise ValueError("annotator segmentations must be 2-D and of equal size")
        object.__setattr__(self, "segmentations", segs)

    @property
    def height(self) -> int:
        """Image height."""
        return int(self.segmentations[0].shape[0])

    @property
    def width(self) -> int:
        """Image width."""
        return int(self.segmentations[0].shape[1])

    @property
    def n_annotators(self) -> int:
        """Number of annotators."""
        return len(self.segmentations)

    @cached_property
    def boundaries(self) -> tuple[np.ndarray, ...]:
        """Boundary map per annotator."""
        return tuple(derive_boundaries(s) for s in self.segmentations)
