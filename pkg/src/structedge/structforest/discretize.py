"""Reduction of structured labels to discrete classes."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans

from structedge.constants import KMEANS_MAX_ITER, PCA_MAX_ITER, PCA_TOL, PCA_VARIANCE_EPS
from structedge.type_definitions import DISCRETIZER_KMEANS, DISCRETIZER_PCA

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class PcaResult:
    """
    Principal directions of a set of pair vectors.

    Attributes:
        mean (np.ndarray): (m,) sample mean.
        directions (np.ndarray): (dims, m) orthonormal directions, by descending eigenvalue.
        eigenvalues (np.ndarray): (dims,) variances along the directions.
        degenerate (bool): True if the samples have (numerically) zero variance.
    """
    mean: np.ndarray
    directions: np.ndarray
    eigenvalues: np.ndarray
    degenerate: bool

    def project(self, z: np.ndarray) -> np.ndarray:
        """Centred projections of z (n, m) onto the directions."""
        return (np.asarray(z, dtype=np.float64) - self.mean) @ self.directions.T


def _orient_sign(v: np.ndarray) -> np.ndarray:
    nonzero = np.flatnonzero(np.abs(v) > 1e-12)
    if len(nonzero) and v[nonzero[0]] < 0:
        return -v
    return v


def pca_top_dirs(z: np.ndarray, dims: int, *, max_iter: int = PCA_MAX_ITER, tol: float = PCA_TOL) -> PcaResult:
    """
    Top principal directions by power iteration with deflation.

    Iteration starts from a fixed vector so results are deterministic. Each
    direction is sign-normalized so its first nonzero component is positive.

    Args:
        z (np.ndarray): (n, m) samples, n >= 2.
        dims (int): Number of directions, at most min(m, n).
        max_iter (int): Iteration cap per direction.
        tol (float): Iteration ends once 1 - |cos| between successive iterates is at most tol.

    Returns:
        PcaResult: Mean, directions and eigenvalues. Zero variance gives zero
        directions and the degenerate flag.
    """
    z = np.asarray(z, dtype=np.float64)
    n, m = z.shape
    if n < 2:
        raise ValueError("pca requires at least two samples")
    dims = max(0, min(dims, m, n))
    mean = z.mean(axis=0)
    centred = z - mean
    cov = centred.T @ centred / n
    if np.trace(cov) < PCA_VARIANCE_EPS:
        return PcaResult(mean, np.zeros((dims, m)), np.zeros(dims), True)

    directions = np.zeros((dims, m))
    eigenvalues = np.zeros(dims)
    residual = cov.copy()
    start = np.full(m, 1.0 / np.sqrt(m)) + np.linspace(0.0, 1e-3, m)
    for d in range(dims):
        found = directions[:d]
        v = start - found.T @ (found @ start)
        if np.linalg.norm(v) < 1e-12:
            v = np.eye(m)[d % m] - found.T @ found[:, d % m]
        v /= np.linalg.norm(v)
        for _ in range(max_iter):
            w = residual @ v
            # iterates stay orthogonal to earlier directions
            w -= found.T @ (found @ w)
            norm = np.linalg.norm(w)
            if norm < PCA_VARIANCE_EPS:
                break
            w /= norm
            converged = 1.0 - abs(float(w @ v)) <= tol
            v = w
            if converged:
                break
        value = float(v @ cov @ v)
        if value < PCA_VARIANCE_EPS:
            break
        v = _orient_sign(v)
        directions[d] = v
        eigenvalues[d] = value
        residual -= value * np.outer(v, v)
    return PcaResult(mean, directions, eigenvalues, False)


def discretize(z: np.ndarray, k_classes: int, method: str = DISCRETIZER_PCA, seed: int = 0, *, pca_dims: int = 5) -> np.ndarray:
    """
    Map pair vectors to discrete labels in 0..k_classes-1.

    The pca method takes the sign pattern of the top floor(log2 k) centred
    projections. The kmeans method clusters the projections onto pca_dims
    directions with seeded k-means++ and at most 20 Lloyd iterations.
    Degenerate input yields all-zero labels.

    Raises:
        ValueError: On an unknown method or k_classes < 2.
    """
    if k_classes < 2:
        raise ValueError("k_classes must be >= 2")
    z = np.asarray(z)
    n = len(z)
    labels = np.zeros(n, dtype=np.int64)
    if n < 2:
        return labels

    if method == DISCRETIZER_PCA:
        n_bits = int(np.floor(np.log2(k_classes)))
        pca = pca_top_dirs(z, n_bits)
        if pca.degenerate:
            return labels
        proj = pca.project(z)
        for b in range(proj.shape[1]):
            labels += (proj[:, b] > 0).astype(np.int64) << b
        return labels

    if method == DISCRETIZER_KMEANS:
        pca = pca_top_dirs(z, pca_dims)
        if pca.degenerate:
            return labels
        proj = pca.project(z)
        n_clusters = min(k_classes, len(np.unique(proj, axis=0)))
        if n_clusters < 2:
            return labels
        model = kmeans_fit(proj, n_clusters, seed)
        dist = ((proj[:, None, :] - model.cluster_centers_[None]) ** 2).sum(axis=2)
        return np.argmin(dist, axis=1).astype(np.int64)

    raise ValueError(f"unknown discretizer: {method}")


def kmeans_fit(points: np.ndarray, n_clusters: int, seed: int, max_iter: int = KMEANS_MAX_ITER) -> KMeans:
    """Fixed-budget Lloyd k-means with seeded k-means++ initialization."""
    model = KMeans(
        n_clusters=n_clusters,
        init="k-means++",
        n_init=1,
        max_iter=max_iter,
        tol=0.0,
        random_state=seed,
        algorithm="lloyd",
    )
    return model.fit(points)
