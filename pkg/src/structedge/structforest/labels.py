"""Segmentation mask labels, derived edge maps and the pair-equality mapping."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import comb

import numpy as np

_LOGGER = logging.getLogger(__name__)


def canonicalize(ids: np.ndarray) -> np.ndarray:
    """Relabel segment ids in first-use raster order starting at 0 (uint8)."""
    arr = np.asarray(ids)
    flat = arr.reshape(-1)
    _, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    # rank of each unique value by its first occurrence
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    if len(order) > 256:
        raise ValueError("a label patch holds at most 256 segments")
    return rank[inverse.reshape(-1)].reshape(arr.shape).astype(np.uint8)


@dataclass(frozen=True)
class SegPatch:
    """
    Square segmentation mask label.

    Attributes:
        ids (np.ndarray): (side, side) canonical segment ids, uint8.
    """
    ids: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.ids)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.size == 0:
            raise ValueError("segmentation patch must be a non-empty square array")
        object.__setattr__(self, "ids", canonicalize(arr))

    @property
    def side(self) -> int:
        """Patch side length."""
        return int(self.ids.shape[0])

    @property
    def n_segments(self) -> int:
        """Number of distinct segments."""
        return int(self.ids.max()) + 1

    def tobytes(self) -> bytes:
        """Canonical byte string of the ids."""
        return self.ids.tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegPatch):
            return NotImplemented
        return self.ids.shape == other.ids.shape and bool(np.array_equal(self.ids, other.ids))

    def __hash__(self) -> int:
        return hash((self.ids.shape, self.tobytes()))


def edges_of(ids: np.ndarray) -> np.ndarray:
    """Boundary bits of one or more (..., side, side) id arrays."""
    ids = np.asarray(ids)
    out = np.zeros(ids.shape, dtype=bool)
    out[..., :, 1:] |= ids[..., :, 1:] != ids[..., :, :-1]
    out[..., 1:, :] |= ids[..., 1:, :] != ids[..., :-1, :]
    return out


def derive_edges(y: SegPatch) -> np.ndarray:
    """
    Edge map of a segmentation patch.

    A pixel is set when its id differs from the left or the upper neighbour
    inside the patch, giving 1 pixel wide boundaries.

    Returns:
        np.ndarray: (side, side) boolean edge patch.
    """
    return edges_of(y.ids)


@dataclass(frozen=True)
class PairSampling:
    """
    Sampled pixel pairs of a label patch.

    Attributes:
        first (np.ndarray): First flat pixel index of every pair.
        second (np.ndarray): Second flat pixel index of every pair, never equal to first.
        seed (int | None): Seed the pairs were drawn with, if any.
    """
    first: np.ndarray
    second: np.ndarray
    seed: int | None = None

    @property
    def m(self) -> int:
        """Number of pairs."""
        return len(self.first)

    @classmethod
    def sample(cls, side: int, m: int, rng: np.random.Generator, seed: int | None = None) -> PairSampling:
        """
        Draw m distinct pairs without replacement from all C(side^2, 2) pairs.

        m is capped at the number of available pairs.
        """
        n_pix = side * side
        total = comb(n_pix, 2)
        if m < 1:
            raise ValueError("m must be >= 1")
        m = min(m, total)
        picks = np.sort(rng.choice(total, size=m, replace=False))
        rows, cols = np.triu_indices(n_pix, k=1)
        return cls(rows[picks].astype(np.int64), cols[picks].astype(np.int64), seed)

    @classmethod
    def full(cls, side: int) -> PairSampling:
        """Every unique pixel pair of a side x side patch."""
        rows, cols = np.triu_indices(side * side, k=1)
        return cls(rows.astype(np.int64), cols.astype(np.int64))


def apply_mapping(y: SegPatch, phi: PairSampling) -> np.ndarray:
    """
    Pair-equality vector of a segmentation patch.

    Bit t is set when both pixels of pair t carry the same segment id.

    Returns:
        np.ndarray: (m,) boolean pair vector.
    """
    flat = y.ids.reshape(-1)
    return flat[phi.first] == flat[phi.second]


def apply_mapping_batch(segs: np.ndarray, phi: PairSampling) -> np.ndarray:
    """Pair-equality matrix (n, m) of an (n, side, side) stack of id arrays."""
    flat = np.asarray(segs).reshape(len(segs), -1)
    return flat[:, phi.first] == flat[:, phi.second]
