"""Model inspection: per-tree statistics and a printed report."""

from __future__ import annotations

import logging
from dataclasses import asdict
from typing import Dict, List

import numpy as np

from structedge.constants import DETAIL_SEPARATOR_LENGTH, SEPARATOR_LENGTH
from structedge.structforest.forest import Forest
from structedge.structforest.tree import StructTree
from structedge.type_definitions import ForestStatsDict, TreeStatsDict

_LOGGER = logging.getLogger(__name__)

# Upper bounds of the leaf-count histogram bins; the last bin is open-ended.
LEAF_COUNT_BINS = (8, 16, 32, 64, 128, 256)


def tree_stats(tree: StructTree, index: int) -> TreeStatsDict:
    """Size, depth and leaf occupancy of one tree."""
    counts = tree.leaf_counts.astype(np.int64)
    # canonical masks: any nonzero id means a second segment
    multi_segment = tree.leaf_segs.reshape(tree.n_leaves, -1).max(axis=1, initial=0) > 0
    return TreeStatsDict(
        index=index,
        n_nodes=tree.n_nodes,
        n_leaves=tree.n_leaves,
        depth=tree.depth(),
        min_leaf_count=int(counts.min()) if counts.size else 0,
        mean_leaf_count=float(counts.mean()) if counts.size else 0.0,
        n_edge_leaves=int(multi_segment.sum()),
    )


def leaf_count_histogram(forest: Forest) -> Dict[str, int]:
    """Number of leaves by training-sample count, over all trees."""
    counts = np.concatenate([t.leaf_counts.astype(np.int64) for t in forest.trees]) if forest.trees else np.zeros(0, np.int64)
    labels = [f"<={b}" for b in LEAF_COUNT_BINS] + [f">{LEAF_COUNT_BINS[-1]}"]
    bins = np.searchsorted(np.asarray(LEAF_COUNT_BINS), counts, side="left")
    totals = np.bincount(bins, minlength=len(labels))
    return {label: int(n) for label, n in zip(labels, totals)}


class ModelInspector:
    """Collects and prints statistics of a trained forest."""

    def __init__(self, forest: Forest) -> None:
        self._forest = forest

    def inspect(self) -> ForestStatsDict:
        """Statistics of every tree plus the leaf-count histogram."""
        stats = ForestStatsDict(
            n_trees=self._forest.n_trees,
            n_features=self._forest.n_features,
            trees=[tree_stats(tree, i) for i, tree in enumerate(self._forest.trees)],
            leaf_count_histogram=leaf_count_histogram(self._forest),
        )
        _LOGGER.debug("Inspected model with %d trees", stats["n_trees"])
        return stats

    def display(self, stats: ForestStatsDict) -> None:
        """Print the inspection report."""
        self._print_header(stats)
        self._print_trees(stats["trees"])
        self._print_histogram(stats["leaf_count_histogram"])
        self._print_footer()

    def _print_header(self, stats: ForestStatsDict) -> None:
        print("\n" + "=" * SEPARATOR_LENGTH)
        print("MODEL INSPECTION RESULTS")
        print("=" * SEPARATOR_LENGTH)
        print(f"Trees: {stats['n_trees']}")
        print(f"Features: {stats['n_features']}")
        print("Channel parameters:")
        for key, value in asdict(self._forest.channel_params).items():
            print(f"  {key}: {value}")
        print("Forest parameters:")
        for key, value in asdict(self._forest.forest_params).items():
            print(f"  {key}: {value}")

    @staticmethod
    def _print_trees(trees: List[TreeStatsDict]) -> None:
        print(f"\n{'=' * SEPARATOR_LENGTH}")
        print("TREE DETAILS")
        print(f"{'=' * SEPARATOR_LENGTH}")
        for tree in trees:
            print(f"\n[{tree['index']:2}] Nodes: {tree['n_nodes']}")
            print(f"     Leaves: {tree['n_leaves']} ({tree['n_edge_leaves']} with edges)")
            print(f"     Depth: {tree['depth']}")
            print(f"     Samples per leaf: min {tree['min_leaf_count']}, mean {tree['mean_leaf_count']:.1f}")
            print(f"     {'-' * DETAIL_SEPARATOR_LENGTH}")

    @staticmethod
    def _print_histogram(histogram: Dict[str, int]) -> None:
        print(f"\n{'=' * SEPARATOR_LENGTH}")
        print("LEAF SAMPLE COUNTS")
        print(f"{'=' * SEPARATOR_LENGTH}")
        total = max(1, sum(histogram.values()))
        for label, n in histogram.items():
            print(f"  {label:>6}: {n:7d}  {'#' * round(40 * n / total)}")

    @staticmethod
    def _print_footer() -> None:
        print(f"\n{'=' * SEPARATOR_LENGTH}")
        print("INSPECTION COMPLETE")
        print(f"{'=' * SEPARATOR_LENGTH}")
        print("\nLegend:")
        print("  - with edges: leaf mask has more than one segment")
        print("  - Samples per leaf: training patches that reached the leaf")
