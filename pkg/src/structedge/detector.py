"""Dense structured edge detection, sharpening and non-maximal suppression."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from structedge.channels import ChannelParams, ChannelStack, Image, compute_channels, resize_plane, triangle_blur
from structedge.constants import NMS_ORIENT_BLUR_RADIUS, NMS_ORIENT_EPS
from structedge.structforest.labels import SegPatch, canonicalize, edges_of
from structedge.type_definitions import PATTERN_CHECKERBOARD, PATTERN_FIXED, PATTERN_ROTATING

if TYPE_CHECKING:
    from structedge.structforest.forest import Forest

# pylint: disable=too-many-locals,too-many-arguments

_LOGGER = logging.getLogger(__name__)

# Patches sharpened per block
_SHARPEN_BLOCK = 1024

MULTISCALE_FACTORS: tuple[float, ...] = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class DetectOptions:
    """
    Detection options.

    Attributes:
        sharpen_steps (int): Sharpening steps applied to every predicted mask.
        multiscale (bool): Average detections at half, original and double size.
        stride (int): Patch grid stride in pixels.
        n_trees_eval (int): Trees evaluated per patch location.
        tree_pattern (str): Tree assignment over the patch grid: checkerboard, fixed or rotating.
        channel_params (ChannelParams | None): Channel parameters the model must have been trained with.
    """
    sharpen_steps: int = 2
    multiscale: bool = False
    stride: int = 2
    n_trees_eval: int = 4
    tree_pattern: str = PATTERN_CHECKERBOARD
    channel_params: Optional[ChannelParams] = None

    def validate(self) -> None:
        """Raise ValueError if an option is out of range."""
        if self.sharpen_steps < 0:
            raise ValueError("sharpen_steps must be >= 0")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.n_trees_eval < 1:
            raise ValueError("n_trees_eval must be >= 1")
        if self.tree_pattern not in (PATTERN_CHECKERBOARD, PATTERN_FIXED, PATTERN_ROTATING):
            raise ValueError(f"unknown tree pattern: {self.tree_pattern}")


@dataclass(frozen=True)
class EdgeProbMap:
    """
    Soft edge response at input resolution.

    Attributes:
        values (np.ndarray): (height, width) float32 values in [0, 1].
        votes (np.ndarray | None): Per-pixel vote count of the detection that produced the map.
    """
    values: np.ndarray
    votes: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 2:
            raise ValueError("edge map must be 2-D")
        object.__setattr__(self, "values", values)

    @property
    def height(self) -> int:
        """Map height."""
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        """Map width."""
        return int(self.values.shape[1])


def tree_assignment(gy: np.ndarray, gx: np.ndarray, t: int, n_trees_eval: int, n_trees: int, pattern: str = PATTERN_CHECKERBOARD) -> np.ndarray:
    """
    Tree evaluated as the t-th tree at patch grid cell (gy, gx).

    checkerboard: cells of equal (gy + gx) parity share a block of n_trees_eval trees.
    fixed: every cell uses trees 0..n_trees_eval-1.
    rotating: the block rotates with (gy mod 2) * 2 + gx mod 2.
    """
    gy = np.asarray(gy, dtype=np.int64)
    gx = np.asarray(gx, dtype=np.int64)
    if pattern == PATTERN_CHECKERBOARD:
        phase = (gy + gx) % 2
    elif pattern == PATTERN_FIXED:
        phase = np.zeros(np.broadcast(gy, gx).shape, dtype=np.int64)
    elif pattern == PATTERN_ROTATING:
        phase = (gy % 2) * 2 + gx % 2
    else:
        raise ValueError(f"unknown tree pattern: {pattern}")
    return (phase * n_trees_eval + t) % n_trees


def _label_windows(color: np.ndarray, rows: np.ndarray, cols: np.ndarray, d_out: int) -> np.ndarray:
    """(n, C, d, d) copies of the color planes under label windows with the given top-left corners."""
    windows = sliding_window_view(color, (d_out, d_out), axis=(1, 2))
    return np.moveaxis(windows[:, rows, cols], 0, 1)


def sharpen_batch(colors: np.ndarray, segs: np.ndarray, steps: int) -> np.ndarray:
    """
    Sharpen a batch of masks.

    Each step computes the mean color of every segment, then synchronously moves
    every pixel to whichever of its own and its 4-connected neighbours' segments
    has the closest mean. Ties keep the pixel's own segment.

    Args:
        colors (np.ndarray): (n, C, d, d) color values.
        segs (np.ndarray): (n, d, d) segment ids, each patch in 0..S-1.
        steps (int): Number of steps (0 returns a copy).

    Returns:
        np.ndarray: (n, d, d) sharpened ids (not canonicalized).
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    segs = np.asarray(segs, dtype=np.int64).copy()
    if steps == 0 or segs.size == 0:
        return segs
    colors = np.asarray(colors, dtype=np.float64)
    n, n_colors = colors.shape[:2]
    n_ids = int(segs.max()) + 1
    flat_colors = colors.reshape(n, n_colors, -1)
    base = (np.arange(n) * n_ids)[:, None, None]
    for _ in range(steps):
        keys = (segs + base).reshape(-1)
        counts = np.maximum(np.bincount(keys, minlength=n * n_ids), 1)
        means = np.stack(
            [np.bincount(keys, weights=flat_colors[:, c].reshape(-1), minlength=n * n_ids) / counts for c in range(n_colors)],
            axis=-1,
        )
        padded = np.pad(segs, ((0, 0), (1, 1), (1, 1)), mode="edge")
        candidates = np.stack([
            segs,
            padded[:, :-2, 1:-1],
            padded[:, 2:, 1:-1],
            padded[:, 1:-1, :-2],
            padded[:, 1:-1, 2:],
        ])
        cand_means = means[candidates + base[None]]
        pixels = np.moveaxis(colors, 1, -1)[None]
        dist = ((cand_means - pixels) ** 2).sum(axis=-1)
        best = np.argmin(dist, axis=0)
        segs = np.take_along_axis(candidates, best[None], axis=0)[0]
    return segs


def sharpen(x_patch: np.ndarray, y: SegPatch, steps: int) -> SegPatch:
    """
    Sharpen one mask against the colors under its label window.

    Args:
        x_patch (np.ndarray): (d, d, C) or (d, d) color values.
        y (SegPatch): Mask to sharpen.
        steps (int): Number of steps.

    Returns:
        SegPatch: Canonicalized sharpened mask.
    """
    x = np.asarray(x_patch, dtype=np.float64)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.shape[:2] != y.ids.shape:
        raise ValueError("color patch and mask must have the same size")
    out = sharpen_batch(np.moveaxis(x, -1, 0)[None], y.ids[None], steps)[0]
    return SegPatch(canonicalize(out))


def sharpen_objective(x_patch: np.ndarray, ids: np.ndarray, means: np.ndarray) -> float:
    """Sum of squared distances of pixel colors to the mean of their segment."""
    x = np.asarray(x_patch, dtype=np.float64)
    if x.ndim == 2:
        x = x[:, :, None]
    return float(((x - np.asarray(means)[np.asarray(ids)]) ** 2).sum())


def _leaf_edges(
    forest: Forest,
    cs: ChannelStack,
    ty: np.ndarray,
    tx: np.ndarray,
    tree_ids: np.ndarray,
    origins: tuple[np.ndarray, np.ndarray],
    sharpen_steps: int,
) -> np.ndarray:
    """(n, d, d) edge patches predicted for one tree slot at every grid cell."""
    d_out = forest.forest_params.d_out
    out = np.zeros((len(ty), d_out, d_out), dtype=np.float32)
    for tree_id in np.unique(tree_ids):
        sel = np.flatnonzero(tree_ids == tree_id)
        tree = forest.trees[tree_id]
        sy, sx = ty[sel], tx[sel]
        leaves = tree.apply(lambda rows, feats, sy=sy, sx=sx: cs.feature_values(sy[rows], sx[rows], feats), len(sel))
        if sharpen_steps == 0:
            out[sel] = tree.leaf_edges[leaves]
            continue
        # single-segment leaves have no edges to move
        multi = np.flatnonzero(tree.leaf_segs[leaves].reshape(len(sel), -1).max(axis=1) > 0)
        for start in range(0, len(multi), _SHARPEN_BLOCK):
            block = multi[start:start + _SHARPEN_BLOCK]
            rows = origins[0][sel[block]] + cs.border
            cols = origins[1][sel[block]] + cs.border
            colors = _label_windows(cs.color, rows, cols, d_out)
            sharpened = sharpen_batch(colors, tree.leaf_segs[leaves[block]], sharpen_steps)
            out[sel[block]] = edges_of(sharpened)
    return out


def detect(img: Image, forest: Forest, opts: Optional[DetectOptions] = None) -> EdgeProbMap:
    """
    Single-scale structured edge detection.

    Label windows are placed on a stride grid covering every pixel by
    (d_out / stride)^2 windows. Each window takes the edge patch of the leaf
    reached in n_trees_eval trees chosen by the tree pattern; votes are summed
    and divided by the per-pixel vote count.

    Raises:
        ValueError: If the options do not fit the model or the image.
    """
    opts = opts or DetectOptions()
    opts.validate()
    params = forest.forest_params
    if opts.channel_params is not None and opts.channel_params != forest.channel_params:
        raise ValueError("channel parameters do not match the model")
    if opts.n_trees_eval > forest.n_trees:
        raise ValueError("n_trees_eval exceeds the number of trees in the model")

    cs = compute_channels(img, forest.channel_params, patch_size=params.d_in, label_size=params.d_out)
    if cs.n_features != forest.n_features:
        raise ValueError(f"image yields {cs.n_features} features, model expects {forest.n_features}")

    d_out, stride = params.d_out, opts.stride
    oy = np.arange(stride - d_out, img.height, stride)
    ox = np.arange(stride - d_out, img.width, stride)
    gy, gx = (a.reshape(-1) for a in np.meshgrid(np.arange(len(oy)), np.arange(len(ox)), indexing="ij"))
    origins = (oy[gy], ox[gx])
    centers = np.stack([origins[0] + d_out // 2, origins[1] + d_out // 2], axis=1)
    ty, tx = cs.patch_origins(centers)

    patches = np.zeros((len(gy), d_out, d_out), dtype=np.float32)
    for t in range(opts.n_trees_eval):
        tree_ids = tree_assignment(gy, gx, t, opts.n_trees_eval, forest.n_trees, opts.tree_pattern)
        patches += _leaf_edges(forest, cs, ty, tx, tree_ids, origins, opts.sharpen_steps)
    patches = patches.reshape(len(oy), len(ox), d_out, d_out)

    # accumulator offset by d_out so windows starting left/above the image fit
    acc_h = d_out + int(oy[-1]) + d_out
    acc_w = d_out + int(ox[-1]) + d_out
    acc = np.zeros((acc_h, acc_w), dtype=np.float32)
    votes = np.zeros((acc_h, acc_w), dtype=np.int32)
    y0 = d_out + int(oy[0])
    x0 = d_out + int(ox[0])
    for dy in range(d_out):
        for dx in range(d_out):
            rows = slice(y0 + dy, y0 + dy + stride * len(oy), stride)
            cols = slice(x0 + dx, x0 + dx + stride * len(ox), stride)
            acc[rows, cols] += patches[:, :, dy, dx]
            votes[rows, cols] += opts.n_trees_eval
    acc = acc[d_out:d_out + img.height, d_out:d_out + img.width]
    votes = votes[d_out:d_out + img.height, d_out:d_out + img.width]
    values = np.clip(acc / np.maximum(votes, 1), 0.0, 1.0).astype(np.float32)
    _LOGGER.debug("Detected %dx%d image over %d patch locations", img.height, img.width, len(gy))
    return EdgeProbMap(values, votes)


def resize_image(img: Image, height: int, width: int) -> Image:
    """Bilinear resize of every image plane."""
    planes = resize_plane(np.moveaxis(img.data, -1, 0), height, width)
    return Image(np.clip(np.moveaxis(planes, 0, -1), 0.0, 1.0))


def multiscale_detect(img: Image, forest: Forest, opts: Optional[DetectOptions] = None) -> EdgeProbMap:
    """
    Average of detections at half, original and double resolution, resized back.

    Raises:
        ValueError: If the image is smaller than 16x16.
    """
    opts = opts or DetectOptions()
    if img.height < 16 or img.width < 16:
        raise ValueError("multiscale detection requires an image of at least 16x16")
    total = np.zeros((img.height, img.width), dtype=np.float64)
    for factor in MULTISCALE_FACTORS:
        if factor == 1.0:
            scaled = img
        else:
            scaled = resize_image(img, max(1, int(round(img.height * factor))), max(1, int(round(img.width * factor))))
        response = detect(scaled, forest, opts).values
        total += resize_plane(response, img.height, img.width)
    return EdgeProbMap(np.clip(total / len(MULTISCALE_FACTORS), 0.0, 1.0))


def detect_edges(img: Image, forest: Forest, opts: Optional[DetectOptions] = None) -> EdgeProbMap:
    """Dispatch to single or multiscale detection according to the options."""
    opts = opts or DetectOptions()
    return multiscale_detect(img, forest, opts) if opts.multiscale else detect(img, forest, opts)


def edge_orientation(e: np.ndarray) -> np.ndarray:
    """Edge normal orientation in [0, pi) from second derivatives of the blurred map."""
    blurred = triangle_blur(np.asarray(e, dtype=np.float64), NMS_ORIENT_BLUR_RADIUS).astype(np.float64)
    oy, ox = np.gradient(blurred)
    oxy, oxx = np.gradient(ox)
    oyy, _ = np.gradient(oy)
    sign = np.where(oxy > 0, -1.0, 1.0)
    return np.mod(np.arctan(oyy * sign / (oxx + NMS_ORIENT_EPS)), np.pi)


def nms(e: EdgeProbMap | np.ndarray, radius: int = 1, multiplier: float = 1.0, boundary_radius: int = 0) -> EdgeProbMap:
    """
    Thin an edge map by non-maximal suppression along the edge normal.

    A pixel is suppressed when e * multiplier is below the bilinearly
    interpolated value at +d along the normal, or not above the value at -d,
    for d = 1..radius. Survivors keep their value. With boundary_radius > 0 the
    responses within that many pixels of the border are linearly attenuated.
    """
    values = np.asarray(e.values if isinstance(e, EdgeProbMap) else e, dtype=np.float32)
    out = values.copy()
    if not values.any():
        return EdgeProbMap(out)
    orient = edge_orientation(values)
    rows, cols = np.indices(values.shape, dtype=np.float64)
    dy, dx = np.sin(orient), np.cos(orient)
    scaled = values * multiplier
    suppressed = np.zeros(values.shape, dtype=bool)
    for d in range(1, radius + 1):
        ahead = ndimage.map_coordinates(values, [rows + d * dy, cols + d * dx], order=1, mode="nearest")
        behind = ndimage.map_coordinates(values, [rows - d * dy, cols - d * dx], order=1, mode="nearest")
        suppressed |= (scaled < ahead) | (scaled <= behind)
    out[suppressed] = 0.0
    if boundary_radius > 0:
        h, w = out.shape
        for i in range(min(boundary_radius, (max(h, w) + 1) // 2)):
            factor = np.float32(i / boundary_radius)
            out[i, :] *= factor
            out[h - 1 - i, :] *= factor
            out[:, i] *= factor
            out[:, w - 1 - i] *= factor
    return EdgeProbMap(out)
