"""Type definitions for the structedge package."""

from typing import Dict, Final, List, Optional, TypedDict


# Configuration sections as stored in JSON
class ChannelParamsDict(TypedDict, total=False):
    """Type definition for the channel parameter block."""
    shrink: int
    n_orients: int
    norm_radius: int
    chn_smooth_radius: int
    sim_smooth_radius: int
    grid_cells: int


class ForestParamsDict(TypedDict, total=False):
    """Type definition for the forest parameter block."""
    n_trees: int
    n_trees_eval: int
    m: int
    k_classes: int
    pca_dims: int
    max_depth: int
    min_samples: int
    frac_features: float
    n_patches: int
    n_images: Optional[int]
    positive_fraction: float
    gain: str
    discretizer: str
    n_thresholds: int
    stride: int
    d_in: int
    d_out: int
    seed: int


class DetectOptionsDict(TypedDict, total=False):
    """Type definition for the detection option block."""
    sharpen_steps: int
    multiscale: bool
    stride: int
    n_trees_eval: int
    tree_pattern: str


class EvalOptionsDict(TypedDict, total=False):
    """Type definition for the evaluation option block."""
    n_thresholds: int
    tolerance: float
    nms_radius: int
    nms_multiplier: float
    boundary_radius: int


class PathsConfigDict(TypedDict, total=False):
    """Type definition for the dataset and output paths block."""
    train_dir: Optional[str]
    test_dir: Optional[str]
    model_path: Optional[str]
    output_dir: Optional[str]


class RunConfigDict(TypedDict, total=False):
    """Type definition for a full run configuration document."""
    channels: ChannelParamsDict
    forest: ForestParamsDict
    detect: DetectOptionsDict
    eval: EvalOptionsDict
    paths: PathsConfigDict
    threads: int
    deterministic: bool


# Evaluation report types
class PRPointDict(TypedDict):
    """Type definition for one point of a precision/recall curve."""
    threshold: float
    tp_pred: int
    fp_pred: int
    tp_gt: int
    fn_gt: int
    precision: float
    recall: float


class EvalSummaryDict(TypedDict):
    """Type definition for the benchmark summary metrics."""
    ods: float
    ods_threshold: float
    ois: float
    ap: float
    r50: float
    n_thresholds: int
    n_images: int


class EvalReportDict(TypedDict):
    """Type definition for a serialized evaluation report."""
    summary: EvalSummaryDict
    curve: List[PRPointDict]


# Model inspection types
class TreeStatsDict(TypedDict):
    """Type definition for per-tree statistics."""
    index: int
    n_nodes: int
    n_leaves: int
    depth: int
    min_leaf_count: int
    mean_leaf_count: float
    n_edge_leaves: int


class ForestStatsDict(TypedDict, total=False):
    """Type definition for whole-model statistics."""
    n_trees: int
    n_features: int
    trees: List[TreeStatsDict]
    leaf_count_histogram: Dict[str, int]


# Enumerated option values
GAIN_GINI: Final[str] = "gini"
GAIN_ENTROPY: Final[str] = "entropy"
DISCRETIZER_PCA: Final[str] = "pca"
DISCRETIZER_KMEANS: Final[str] = "kmeans"
PATTERN_CHECKERBOARD: Final[str] = "checkerboard"
PATTERN_FIXED: Final[str] = "fixed"
PATTERN_ROTATING: Final[str] = "rotating"
