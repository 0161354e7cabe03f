"""Structured random forests with segmentation-mask leaves."""

from .discretize import PcaResult, discretize, pca_top_dirs
from .forest import Forest, sample_training_patches, train_forest, train_single_tree
from .labels import PairSampling, SegPatch, apply_mapping, apply_mapping_batch, canonicalize, derive_edges, edges_of
from .params import ForestParams
from .splits import SplitParams, best_split, candidate_thresholds, impurity, info_gain, medoid_index
from .tree import StructTree, train_tree, tree_predict

__all__ = [
    "Forest",
    "ForestParams",
    "PairSampling",
    "PcaResult",
    "SegPatch",
    "SplitParams",
    "StructTree",
    "apply_mapping",
    "apply_mapping_batch",
    "best_split",
    "candidate_thresholds",
    "canonicalize",
    "derive_edges",
    "discretize",
    "edges_of",
    "impurity",
    "info_gain",
    "medoid_index",
    "pca_top_dirs",
    "sample_training_patches",
    "train_forest",
    "train_single_tree",
    "train_tree",
    "tree_predict",
]
