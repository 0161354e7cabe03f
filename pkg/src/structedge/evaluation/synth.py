"""Synthetic piecewise-constant corpus with known segmentations."""

from __future__ import annotations

import logging

import numpy as np
from scipy.spatial import cKDTree

from structedge.channels import Image
from structedge.constants import (
    SYNTH_ILLUMINATION,
    SYNTH_MAX_SEGMENTS,
    SYNTH_MIN_COLOR_GAP,
    SYNTH_MIN_SEGMENTS,
    SYNTH_NOISE_SIGMA,
)
from structedge.ground_truth import GroundTruth
from structedge.structforest.labels import canonicalize

# pylint: disable=too-many-arguments

_LOGGER = logging.getLogger(__name__)

# Rejection draws per color before the gap requirement is dropped
_COLOR_ATTEMPTS = 200


def _distinct_colors(n: int, rng: np.random.Generator) -> np.ndarray:
    colors: list[np.ndarray] = []
    while len(colors) < n:
        for _ in range(_COLOR_ATTEMPTS):
            candidate = rng.uniform(0.1, 0.9, size=3)
            if all(np.linalg.norm(candidate - c) >= SYNTH_MIN_COLOR_GAP for c in colors):
                break
        colors.append(candidate)
    return np.asarray(colors)


def voronoi_partition(height: int, width: int, n_segments: int, rng: np.random.Generator) -> np.ndarray:
    """Canonical (height, width) id map of a random Voronoi partition."""
    sites = rng.uniform((0.0, 0.0), (height, width), size=(n_segments, 2))
    pixels = np.indices((height, width)).reshape(2, -1).T + 0.5
    _, owner = cKDTree(sites).query(pixels)
    return canonicalize(owner.reshape(height, width)).astype(np.int32)


def synth_image(
    rng: np.random.Generator,
    height: int,
    width: int,
    *,
    min_segments: int = SYNTH_MIN_SEGMENTS,
    max_segments: int = SYNTH_MAX_SEGMENTS,
    noise: float = SYNTH_NOISE_SIGMA,
    illumination: float = SYNTH_ILLUMINATION,
) -> tuple[Image, GroundTruth]:
    """One synthetic image and its single-annotator ground truth."""
    n_segments = int(rng.integers(min_segments, max_segments + 1))
    seg = voronoi_partition(height, width, n_segments, rng)
    colors = _distinct_colors(int(seg.max()) + 1, rng)
    data = colors[seg]

    angle = rng.uniform(0.0, 2.0 * np.pi)
    ys, xs = np.indices((height, width), dtype=np.float64)
    ramp = (xs - (width - 1) / 2.0) * np.cos(angle) + (ys - (height - 1) / 2.0) * np.sin(angle)
    ramp /= max(0.5 * np.hypot(height, width), 1.0)
    data = data * (1.0 + illumination * ramp)[:, :, None]
    if noise > 0:
        data = data + rng.normal(0.0, noise, size=data.shape)
    return Image(np.clip(data, 0.0, 1.0).astype(np.float32)), GroundTruth((seg,))


def synth_corpus(
    seed: int,
    n_images: int,
    size: int | tuple[int, int] = 128,
    *,
    min_segments: int = SYNTH_MIN_SEGMENTS,
    max_segments: int = SYNTH_MAX_SEGMENTS,
    noise: float = SYNTH_NOISE_SIGMA,
    illumination: float = SYNTH_ILLUMINATION,
) -> tuple[list[Image], list[GroundTruth]]:
    """
    Deterministic corpus of Voronoi images with a multiplicative illumination
    ramp and Gaussian noise; ground truth is the generating partition.

    Raises:
        ValueError: If n_images < 1 or the segment range is invalid.
    """
    if n_images < 1:
        raise ValueError("n_images must be >= 1")
    if not 1 <= min_segments <= max_segments:
        raise ValueError("segment range must satisfy 1 <= min_segments <= max_segments")
    height, width = (size, size) if isinstance(size, int) else size
    rng = np.random.default_rng(seed)
    images, gts = [], []
    for _ in range(n_images):
        image, gt = synth_image(
            rng, height, width, min_segments=min_segments, max_segments=max_segments, noise=noise, illumination=illumination
        )
        images.append(image)
        gts.append(gt)
    _LOGGER.debug("Generated %d synthetic images of %dx%d (seed %d)", n_images, height, width, seed)
    return images, gts
