"""Forest training parameters."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from structedge.type_definitions import DISCRETIZER_KMEANS, DISCRETIZER_PCA, GAIN_ENTROPY, GAIN_GINI

# pylint: disable=too-many-instance-attributes


@dataclass(frozen=True)
class ForestParams:
    """
    Structured forest training parameters.

    Attributes:
        n_trees (int): Trees trained, twice the trees evaluated per location.
        n_trees_eval (int): Trees evaluated at every patch location.
        m (int): Pixel pairs sampled per node for the pair-equality mapping.
        k_classes (int): Discrete classes per node; a power of 2 for the pca discretizer.
        pca_dims (int): Projection dimensions used by the k-means discretizer.
        max_depth (int): Maximum tree depth.
        min_samples (int): Minimum training samples per leaf.
        frac_features (float): Fraction of candidate features assigned to each tree.
        n_patches (int): Training patches per tree.
        n_images (Optional[int]): Use at most this many training images (all if None).
        positive_fraction (float): Fraction of sampled patches that contain a boundary.
        gain (str): "gini" or "entropy".
        discretizer (str): "pca" or "kmeans".
        n_thresholds (int): Candidate thresholds drawn per feature at each node.
        stride (int): Patch sampling grid stride.
        d_in (int): Feature patch side.
        d_out (int): Label patch side.
        seed (int): Forest seed.
    """
    n_trees: int = 8
    n_trees_eval: int = 4
    m: int = 256
    k_classes: int = 2
    pca_dims: int = 5
    max_depth: int = 64
    min_samples: int = 8
    frac_features: float = 0.25
    n_patches: int = 1_000_000
    n_images: Optional[int] = None
    positive_fraction: float = 0.5
    gain: str = GAIN_GINI
    discretizer: str = DISCRETIZER_PCA
    n_thresholds: int = 8
    stride: int = 2
    d_in: int = 32
    d_out: int = 16
    seed: int = 1

    def validate(self) -> None:
        """Raise ValueError if the parameters are inconsistent or out of range."""
        if self.n_trees_eval < 1 or self.n_trees != 2 * self.n_trees_eval:
            raise ValueError("n_trees must equal 2 * n_trees_eval")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 2 <= self.k_classes <= 8:
            raise ValueError("k_classes must lie in [2, 8]")
        if not 1 <= self.pca_dims <= 5:
            raise ValueError("pca_dims must lie in [1, 5]")
        if self.max_depth < 0 or self.min_samples < 1:
            raise ValueError("max_depth must be >= 0 and min_samples >= 1")
        if not 0.0 < self.frac_features <= 1.0:
            raise ValueError("frac_features must lie in (0, 1]")
        if not 0.0 <= self.positive_fraction <= 1.0:
            raise ValueError("positive_fraction must lie in [0, 1]")
        if self.n_patches < 1 or (self.n_images is not None and self.n_images < 1):
            raise ValueError("n_patches and n_images must be >= 1")
        if self.gain not in (GAIN_GINI, GAIN_ENTROPY):
            raise ValueError(f"gain must be '{GAIN_GINI}' or '{GAIN_ENTROPY}'")
        if self.discretizer not in (DISCRETIZER_PCA, DISCRETIZER_KMEANS):
            raise ValueError(f"discretizer must be '{DISCRETIZER_PCA}' or '{DISCRETIZER_KMEANS}'")
        if self.discretizer == DISCRETIZER_PCA and self.k_classes & (self.k_classes - 1):
            raise ValueError("the pca discretizer needs k_classes to be a power of 2")
        if self.n_thresholds < 1 or self.stride < 1:
            raise ValueError("n_thresholds and stride must be >= 1")
        if self.d_out < 1 or self.d_in < self.d_out or self.d_out > 16 or self.d_in % 2 or self.d_out % 2:
            raise ValueError("patch sizes must be even with d_out <= min(d_in, 16)")
