"""Image channels and candidate split features for structured edge detection.

An input image is converted into color, normalized gradient magnitude and
oriented gradient channels. Split features are either pixel lookups in the
shrunk channels of a patch window or pairwise differences between the means of
a coarse grid of cells laid over a heavily blurred copy of each channel.

Half-resolution gradients are binned by orientation at their native scale and
the resulting magnitude and orientation planes are then upsampled.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np
from scipy import ndimage

from structedge.constants import (
    GRADIENT_NORM_EPS,
    LUV_SCALE,
    LUV_U_OFFSET,
    LUV_V_OFFSET,
    LUV_WHITE_U,
    LUV_WHITE_V,
    RGB_TO_XYZ,
)

# pylint: disable=line-too-long,too-many-instance-attributes,too-many-locals

_LOGGER = logging.getLogger(__name__)

# Rows processed per block when gathering feature matrices
_GATHER_BLOCK = 1024


@dataclass(frozen=True)
class ChannelParams:
    """
    Parameters of the channel pipeline.

    Attributes:
        shrink (int): Downsampling factor applied to every channel.
        n_orients (int): Number of orientation bins per gradient scale.
        norm_radius (int): Triangle radius of the gradient magnitude normalization (0 disables it).
        chn_smooth_radius (int): Triangle blur radius applied before shrinking the lookup channels.
        sim_smooth_radius (int): Triangle blur radius of the self-similarity source channels.
        grid_cells (int): Cells per side of the self-similarity grid.
    """
    shrink: int = 2
    n_orients: int = 4
    norm_radius: int = 4
    chn_smooth_radius: int = 2
    sim_smooth_radius: int = 8
    grid_cells: int = 5

    def validate(self) -> None:
        """Raise ValueError if any parameter is out of range."""
        if self.shrink < 1:
            raise ValueError("shrink must be >= 1")
        if self.n_orients < 1:
            raise ValueError("n_orients must be >= 1")
        if min(self.norm_radius, self.chn_smooth_radius, self.sim_smooth_radius) < 0:
            raise ValueError("blur radii must be >= 0")
        if self.grid_cells < 1:
            raise ValueError("grid_cells must be >= 1")


@dataclass(frozen=True)
class Image:
    """
    Input image as a stack of float planes with values in [0, 1].

    Attributes:
        data (np.ndarray): Array of shape (height, width, planes), float32.
    """
    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3:
            raise ValueError("image data must have shape (height, width[, planes])")
        if data.size:
            if not np.all(np.isfinite(data)):
                raise ValueError("image values must be finite")
            if data.min() < 0.0 or data.max() > 1.0:
                raise ValueError("image values must lie in [0, 1]")
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        """Image height in pixels."""
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        """Image width in pixels."""
        return int(self.data.shape[1])

    @property
    def n_planes(self) -> int:
        """Number of planes (3 for RGB)."""
        return int(self.data.shape[2])


@dataclass(frozen=True)
class FeatureLayout:
    """
    Fixed ordering of the candidate feature vector.

    Pixel lookups come first, indexed channel * p * p + row * p + col over the
    p x p shrunk patch window. Pairwise differences follow, indexed
    n_lookup + channel * n_pairs + pair, with pairs (a, b), a < b, enumerated
    lexicographically over row-major grid cells.
    """
    n_channels: int
    window: int
    grid_cells: int
    cell_edges: np.ndarray
    pair_a: np.ndarray
    pair_b: np.ndarray

    @property
    def n_lookup(self) -> int:
        """Number of pixel lookup features."""
        return self.window * self.window * self.n_channels

    @property
    def n_pairs(self) -> int:
        """Number of pairwise difference features per channel."""
        return len(self.pair_a)

    @property
    def n_features(self) -> int:
        """Total candidate feature count."""
        return self.n_lookup + self.n_pairs * self.n_channels


@lru_cache(maxsize=32)
def _grid_geometry(window: int, grid_cells: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    edges = np.array([(i * window) // grid_cells for i in range(grid_cells + 1)], dtype=np.int64)
    pairs = np.array(list(combinations(range(grid_cells * grid_cells), 2)), dtype=np.int64).reshape(-1, 2)
    return edges, pairs[:, 0].copy(), pairs[:, 1].copy()


def feature_layout(n_channels: int, params: ChannelParams, patch_size: int = 32) -> FeatureLayout:
    """Return the feature layout for the given channel count and geometry."""
    window = patch_size // params.shrink
    if window < params.grid_cells:
        raise ValueError("grid_cells exceeds the shrunk patch window")
    edges, pair_a, pair_b = _grid_geometry(window, params.grid_cells)
    return FeatureLayout(n_channels, window, params.grid_cells, edges, pair_a, pair_b)


def feature_count(n_channels: int, params: ChannelParams, patch_size: int = 32) -> int:
    """(patch_size / shrink)^2 * K + C(grid_cells^2, 2) * K."""
    window = patch_size // params.shrink
    return window * window * n_channels + comb(params.grid_cells ** 2, 2) * n_channels


@dataclass(frozen=True)
class ChannelStack:
    """
    Per-image feature planes, computed over the reflect-padded image.

    Attributes:
        channels (np.ndarray): (K, Hs, Ws) shrunk lookup channels.
        sim (np.ndarray): (K, Hs, Ws) shrunk self-similarity source channels.
        color (np.ndarray): (C, Hp, Wp) full-resolution color planes used for sharpening.
        channel_names (tuple[str, ...]): Label per channel.
        height (int): Height of the unpadded image.
        width (int): Width of the unpadded image.
        border (int): Padding added on the top/left side, in input pixels.
        shrink (int): Downsampling factor between input and channel resolution.
        patch_size (int): Side of a feature patch in input pixels.
        label_size (int): Side of a label patch in input pixels.
        layout (FeatureLayout): Candidate feature ordering.
    """
    channels: np.ndarray
    sim: np.ndarray
    color: np.ndarray
    channel_names: tuple[str, ...]
    height: int
    width: int
    border: int
    shrink: int
    patch_size: int
    label_size: int
    layout: FeatureLayout
    _sat: np.ndarray = field(repr=False, compare=False, default_factory=lambda: np.zeros((0, 1, 1)))

    def __post_init__(self) -> None:
        # Offset-free summed-area tables: pairwise differences cancel the offset,
        # and constant channels yield exact zeros.
        centred = self.sim.astype(np.float64) - self.sim[:, :1, :1].astype(np.float64)
        sat = np.zeros((self.sim.shape[0], self.sim.shape[1] + 1, self.sim.shape[2] + 1), dtype=np.float64)
        sat[:, 1:, 1:] = centred.cumsum(axis=1).cumsum(axis=2)
        object.__setattr__(self, "_sat", sat)

    @property
    def n_channels(self) -> int:
        """Number of channels K."""
        return int(self.channels.shape[0])

    @property
    def height_ds(self) -> int:
        """Height of the unpadded image at channel resolution."""
        return -(-self.height // self.shrink)

    @property
    def width_ds(self) -> int:
        """Width of the unpadded image at channel resolution."""
        return -(-self.width // self.shrink)

    @property
    def n_features(self) -> int:
        """Length of a full candidate feature vector."""
        return self.layout.n_features

    def interior(self) -> np.ndarray:
        """Lookup channels cropped to the unpadded image region."""
        off = self.border // self.shrink
        return self.channels[:, off:off + self.height_ds, off:off + self.width_ds]

    def patch_origins(self, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        Map patch centres (row, col) in input coordinates to the top-left corner
        of their feature window at channel resolution.

        Raises:
            ValueError: If any patch is not fully inside the padded image.
        """
        centers = np.asarray(centers, dtype=np.int64).reshape(-1, 2)
        offset = self.border - self.patch_size // 2
        ty = (centers[:, 0] + offset) // self.shrink
        tx = (centers[:, 1] + offset) // self.shrink
        win = self.layout.window
        hs, ws = self.channels.shape[1:]
        if centers.size and (ty.min() < 0 or tx.min() < 0 or ty.max() + win > hs or tx.max() + win > ws):
            raise ValueError("patch centre out of bounds")
        return ty, tx

    def feature_values(self, ty: np.ndarray, tx: np.ndarray, feature_ids: np.ndarray) -> np.ndarray:
        """
        Evaluate features elementwise for broadcastable window origins and feature ids.

        Args:
            ty (np.ndarray): Window origin rows at channel resolution.
            tx (np.ndarray): Window origin columns at channel resolution.
            feature_ids (np.ndarray): Candidate feature indices.

        Returns:
            np.ndarray: float32 values with the broadcast shape of the inputs.
        """
        lay = self.layout
        fid = np.asarray(feature_ids, dtype=np.int64)
        ty = np.asarray(ty, dtype=np.int64)
        tx = np.asarray(tx, dtype=np.int64)
        area = lay.window * lay.window

        is_lookup = fid < lay.n_lookup
        f_px = np.where(is_lookup, fid, 0)
        ch = f_px // area
        rem = f_px % area
        lookup = self.channels[ch, ty + rem // lay.window, tx + rem % lay.window]

        q = np.where(is_lookup, 0, fid - lay.n_lookup)
        ch_q = q // lay.n_pairs
        pair = q % lay.n_pairs
        diff = self._cell_mean(ch_q, ty, tx, lay.pair_a[pair]) - self._cell_mean(ch_q, ty, tx, lay.pair_b[pair])
        return np.where(is_lookup, lookup, diff).astype(np.float32)

    def _cell_mean(self, ch: np.ndarray, ty: np.ndarray, tx: np.ndarray, cell: np.ndarray) -> np.ndarray:
        edges = self.layout.cell_edges
        cy, cx = np.divmod(cell, self.layout.grid_cells)
        y0 = ty + edges[cy]
        y1 = ty + edges[cy + 1]
        x0 = tx + edges[cx]
        x1 = tx + edges[cx + 1]
        sat = self._sat
        total = sat[ch, y1, x1] - sat[ch, y0, x1] - sat[ch, y1, x0] + sat[ch, y0, x0]
        return total / ((edges[cy + 1] - edges[cy]) * (edges[cx + 1] - edges[cx]))


def _luv(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    xyz = rgb @ np.asarray(RGB_TO_XYZ, dtype=np.float64).T
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    y0 = (6.0 / 29.0) ** 3
    lum = np.where(y > y0, 116.0 * np.cbrt(y) - 16.0, y * (29.0 / 3.0) ** 3)
    denom = x + 15.0 * y + 3.0 * z + 1e-35
    u = 13.0 * lum * (4.0 * x / denom - LUV_WHITE_U)
    v = 13.0 * lum * (9.0 * y / denom - LUV_WHITE_V)
    out = np.stack([lum * LUV_SCALE, (u + LUV_U_OFFSET) * LUV_SCALE, (v + LUV_V_OFFSET) * LUV_SCALE], axis=-1)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def rgb_to_luv(img: Image) -> Image:
    """
    Convert an RGB image to CIE-LUV, rescaled into [0, 1].

    L is divided by 270, u and v are offset by 88 and 134 and divided by 270.

    Raises:
        ValueError: If the image does not have exactly 3 planes.
    """
    if img.n_planes != 3:
        raise ValueError("luv requires rgb")
    return Image(_luv(img.data))


def triangle_kernel(radius: int) -> np.ndarray:
    """Normalized 1-D triangle kernel [1, 2, .., r+1, .., 2, 1] / (r+1)^2."""
    ramp = np.arange(1, radius + 2, dtype=np.float64)
    kernel = np.concatenate([ramp, ramp[-2::-1]])
    return kernel / kernel.sum()


def triangle_blur(plane: np.ndarray, radius: int) -> np.ndarray:
    """
    Separable triangle blur over the last two axes with reflect padding.

    Raises:
        ValueError: If radius is negative.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    arr = np.asarray(plane, dtype=np.float32)
    if radius == 0:
        return arr.copy()
    kernel = triangle_kernel(radius)
    out = ndimage.convolve1d(arr, kernel, axis=-1, mode="reflect")
    return ndimage.convolve1d(out, kernel, axis=-2, mode="reflect")


def resize_plane(plane: np.ndarray, height: int, width: int) -> np.ndarray:
    """Bilinear, pixel-centre aligned resampling of a plane or (N, H, W) stack."""
    arr = np.asarray(plane, dtype=np.float32)
    if arr.shape[-2:] == (height, width):
        return arr.copy()
    in_h, in_w = arr.shape[-2:]
    ys = (np.arange(height) + 0.5) * (in_h / height) - 0.5
    xs = (np.arange(width) + 0.5) * (in_w / width) - 0.5
    coords = np.meshgrid(ys, xs, indexing="ij")
    if arr.ndim == 2:
        return ndimage.map_coordinates(arr, coords, order=1, mode="nearest").astype(np.float32)
    flat = arr.reshape((-1, in_h, in_w))
    out = np.stack([ndimage.map_coordinates(p, coords, order=1, mode="nearest") for p in flat])
    return out.reshape(arr.shape[:-2] + (height, width)).astype(np.float32)


def _planes_first(plane_set: Image | np.ndarray) -> np.ndarray:
    if isinstance(plane_set, Image):
        return np.moveaxis(plane_set.data, -1, 0)
    arr = np.asarray(plane_set, dtype=np.float32)
    return arr[None] if arr.ndim == 2 else arr


def _gradient_stack(planes: np.ndarray, norm_radius: int) -> tuple[np.ndarray, np.ndarray]:
    padded = np.pad(planes, ((0, 0), (1, 1), (1, 1)), mode="edge")
    gx = (padded[:, 1:-1, 2:] - padded[:, 1:-1, :-2]) * 0.5
    gy = (padded[:, 2:, 1:-1] - padded[:, :-2, 1:-1]) * 0.5
    mags = np.hypot(gx, gy)
    best = np.argmax(mags, axis=0)[None]
    mag = np.take_along_axis(mags, best, axis=0)[0]
    orient = np.mod(np.arctan2(np.take_along_axis(gy, best, axis=0)[0], np.take_along_axis(gx, best, axis=0)[0]), np.pi)
    orient = orient.astype(np.float32)
    # float32 rounding can land on pi itself
    orient[orient >= np.float32(np.pi)] = 0.0
    if norm_radius > 0:
        mag = mag / (triangle_blur(mag, norm_radius) + GRADIENT_NORM_EPS)
    return mag.astype(np.float32), orient


def gradient_mag_orient(plane_set: Image | np.ndarray, norm_radius: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Central-difference gradient magnitude and orientation over a set of planes.

    The magnitude is the per-pixel maximum over planes and the orientation, in
    [0, pi), comes from the maximizing plane. Borders are replicated. With
    norm_radius > 0 the magnitude is divided by its triangle-blurred copy plus 0.01.

    Args:
        plane_set (Image | np.ndarray): Image, or (H, W) / (C, H, W) array.
        norm_radius (int): Normalization radius.

    Returns:
        tuple: (magnitude, orientation) float32 planes.
    """
    planes = _planes_first(plane_set)
    if planes.shape[0] < 1:
        raise ValueError("gradient requires at least one plane")
    return _gradient_stack(planes.astype(np.float32), norm_radius)


def orient_split(mag: np.ndarray, orient: np.ndarray, n_orients: int) -> np.ndarray:
    """
    Hard-assign each magnitude value to the orientation bin containing its angle.

    Returns:
        np.ndarray: (n_orients, H, W) planes whose elementwise sum equals mag.
    """
    if n_orients < 1:
        raise ValueError("n_orients must be >= 1")
    mag = np.asarray(mag, dtype=np.float32)
    bins = np.minimum((np.asarray(orient) * (n_orients / np.pi)).astype(np.int64), n_orients - 1)
    bins = np.maximum(bins, 0)
    out = np.zeros((n_orients,) + mag.shape, dtype=np.float32)
    for b in range(n_orients):
        out[b] = np.where(bins == b, mag, 0.0)
    return out


def _block_mean(stack: np.ndarray, factor: int) -> np.ndarray:
    if factor == 1:
        return stack.astype(np.float32)
    n, h, w = stack.shape
    return stack.reshape(n, h // factor, factor, w // factor, factor).mean(axis=(2, 4)).astype(np.float32)


def _color_groups(padded: np.ndarray) -> list[tuple[list[str], str, np.ndarray]]:
    """Split input planes into (color names, channel prefix, color planes) groups."""
    n_planes = padded.shape[2]
    planes = np.moveaxis(padded, -1, 0)
    if n_planes >= 3:
        groups = [(["luv_l", "luv_u", "luv_v"], "", np.moveaxis(_luv(padded[:, :, :3]), -1, 0))]
        groups += [([f"extra{i}"], f"extra{i}_", planes[3 + i:4 + i]) for i in range(n_planes - 3)]
        return groups
    if n_planes == 1:
        return [(["gray"], "", planes)]
    return [([f"plane{i}"], f"plane{i}_", planes[i:i + 1]) for i in range(n_planes)]


def _gradient_channels(color: np.ndarray, prefix: str, params: ChannelParams) -> tuple[list[np.ndarray], list[str]]:
    _, height, width = color.shape
    mag_full, orient_full = _gradient_stack(color, params.norm_radius)
    hist_full = orient_split(mag_full, orient_full, params.n_orients)

    mag_half, orient_half = _gradient_stack(_block_mean(color, 2), params.norm_radius)
    hist_half = orient_split(mag_half, orient_half, params.n_orients)
    mag_half = resize_plane(mag_half, height, width)
    hist_half = resize_plane(hist_half, height, width)

    planes = [mag_full, mag_half] + list(hist_full) + list(hist_half)
    names = [f"{prefix}mag_full", f"{prefix}mag_half"]
    names += [f"{prefix}orient_full_{i}" for i in range(params.n_orients)]
    names += [f"{prefix}orient_half_{i}" for i in range(params.n_orients)]
    return planes, names


def compute_channels(img: Image, params: ChannelParams | None = None, *, patch_size: int = 32, label_size: int = 16) -> ChannelStack:
    """
    Compute the channel stack of an image.

    The image is reflect-padded by patch_size/2 + label_size/2 pixels (plus a
    few bottom/right pixels so padded sides are multiples of 2 * shrink).
    Channels are 3 LUV planes (or the raw planes of grayscale input), full and
    half resolution normalized gradient magnitude, and their orientation
    splits. Every extra input plane beyond RGB adds 1 + 2 + 2 * n_orients
    channels of its own.

    Raises:
        ValueError: If the image is empty or parameters are invalid.
    """
    params = params or ChannelParams()
    params.validate()
    if img.height == 0 or img.width == 0 or img.n_planes == 0:
        raise ValueError("image is empty")
    if patch_size % params.shrink or patch_size < label_size:
        raise ValueError("patch_size must be a multiple of shrink and >= label_size")

    border = patch_size // 2 + label_size // 2
    multiple = 2 * params.shrink
    extra_h = (-(img.height + 2 * border)) % multiple
    extra_w = (-(img.width + 2 * border)) % multiple
    padded = np.pad(img.data, ((border, border + extra_h), (border, border + extra_w), (0, 0)), mode="symmetric")

    planes: list[np.ndarray] = []
    names: list[str] = []
    groups = _color_groups(padded)
    for color_names, prefix, color in groups:
        grad_planes, grad_names = _gradient_channels(color, prefix, params)
        planes += list(color) + grad_planes
        names += color_names + grad_names

    full = np.stack(planes).astype(np.float32)
    channels = _block_mean(triangle_blur(full, params.chn_smooth_radius), params.shrink)
    sim = _block_mean(triangle_blur(full, params.sim_smooth_radius), params.shrink)
    layout = feature_layout(len(names), params, patch_size)
    _LOGGER.debug("Computed %d channels of %dx%d for a %dx%d image", len(names), channels.shape[1], channels.shape[2], img.height, img.width)
    return ChannelStack(
        channels=channels,
        sim=sim,
        color=groups[0][2].astype(np.float32),
        channel_names=tuple(names),
        height=img.height,
        width=img.width,
        border=border,
        shrink=params.shrink,
        patch_size=patch_size,
        label_size=label_size,
        layout=layout,
    )


def gather_features(cs: ChannelStack, centers: np.ndarray, feature_ids: np.ndarray | None = None) -> np.ndarray:
    """
    Gather a (n_centers, n_ids) float32 feature matrix.

    Args:
        cs (ChannelStack): Channel stack of the image.
        centers (np.ndarray): (n, 2) patch centres (row, col) in input coordinates.
        feature_ids (np.ndarray | None): Feature indices; all features if None.

    Raises:
        ValueError: If any patch centre is out of bounds.
    """
    ty, tx = cs.patch_origins(centers)
    fids = np.arange(cs.n_features) if feature_ids is None else np.asarray(feature_ids, dtype=np.int64)
    out = np.empty((len(ty), len(fids)), dtype=np.float32)
    for start in range(0, len(ty), _GATHER_BLOCK):
        stop = start + _GATHER_BLOCK
        out[start:stop] = cs.feature_values(ty[start:stop, None], tx[start:stop, None], fids[None, :])
    return out


def extract_features(cs: ChannelStack, patch_center: tuple[int, int]) -> np.ndarray:
    """
    Full candidate feature vector of the patch centred at (row, col).

    Raises:
        ValueError: If the patch is not fully inside the padded image.
    """
    return gather_features(cs, np.asarray([patch_center]))[0]
