"""Structured forest edge detection."""
from .channels import ChannelParams, Image, compute_channels
from .detector import DetectOptions, EdgeProbMap, detect_edges, nms
from .ground_truth import GroundTruth
from .pipeline import EdgePipeline
from .run_status import RunStatus
from .structforest import Forest, ForestParams, train_forest

__version__ = "0.1.0"
__all__ = [
    "ChannelParams",
    "DetectOptions",
    "EdgePipeline",
    "EdgeProbMap",
    "Forest",
    "ForestParams",
    "GroundTruth",
    "Image",
    "RunStatus",
    "compute_channels",
    "detect_edges",
    "nms",
    "train_forest",
]
