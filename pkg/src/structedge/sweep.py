"""Single-parameter sweeps: train and benchmark per value, averaged over trials."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

from structedge.channels import Image
from structedge.config import ConfigError, RunConfig
from structedge.ground_truth import GroundTruth
from structedge.pipeline import score_forest
from structedge.run_status import RunStatus
from structedge.structforest.forest import TrainingSample, train_forest

# pylint: disable=line-too-long

_LOGGER = logging.getLogger(__name__)

DEFAULT_TRIALS = 5

# Sweep name -> (section, field) pairs it sets. "n_trees" is the number of trees
# evaluated per location; twice as many are trained.
SWEEP_PARAMETERS: Dict[str, Tuple[Tuple[str, str], ...]] = {
    "m": (("forest", "m"),),
    "k_classes": (("forest", "k_classes"),),
    "discretizer": (("forest", "discretizer"),),
    "gain": (("forest", "gain"),),
    "d_in": (("forest", "d_in"),),
    "d_out": (("forest", "d_out"),),
    "n_patches": (("forest", "n_patches"),),
    "n_images": (("forest", "n_images"),),
    "positive_fraction": (("forest", "positive_fraction"),),
    "frac_features": (("forest", "frac_features"),),
    "n_trees": (("forest", "n_trees_eval"), ("forest", "n_trees"), ("detect", "n_trees_eval")),
    "max_depth": (("forest", "max_depth"),),
    "min_samples": (("forest", "min_samples"),),
    "sharpen_steps": (("detect", "sharpen_steps"),),
    "norm_radius": (("channels", "norm_radius"),),
    "grid_cells": (("channels", "grid_cells"),),
    "n_orients": (("channels", "n_orients"),),
    "chn_smooth_radius": (("channels", "chn_smooth_radius"),),
    "sim_smooth_radius": (("channels", "sim_smooth_radius"),),
}

# Parameters that only change detection; the trained forest is reused across values.
DETECT_ONLY = {"sharpen_steps"}

_INT_PARAMS = {"m", "k_classes", "d_in", "d_out", "n_patches", "n_images", "n_trees", "max_depth", "min_samples", "sharpen_steps", "norm_radius", "grid_cells", "n_orients", "chn_smooth_radius", "sim_smooth_radius"}
_FLOAT_PARAMS = {"positive_fraction", "frac_features"}


@dataclass(frozen=True)
class SweepRow:
    """Mean ODS of one swept value over all trials."""
    value: Any
    ods: float
    trial_ods: Tuple[float, ...]


def parse_value(name: str, text: str) -> Any:
    """
    Convert a command-line value for a sweep parameter.

    Raises:
        ValueError: If the parameter is unknown or the value does not parse.
    """
    if name not in SWEEP_PARAMETERS:
        raise ValueError(f"unknown sweep parameter '{name}'; valid: {', '.join(sorted(SWEEP_PARAMETERS))}")
    if name in _INT_PARAMS:
        return int(text)
    if name in _FLOAT_PARAMS:
        return float(text)
    return text


def apply_value(config: RunConfig, name: str, value: Any) -> RunConfig:
    """
    Configuration with one sweep parameter set.

    Raises:
        ConfigError: If the parameter is unknown or the result is invalid.
    """
    if name not in SWEEP_PARAMETERS:
        raise ConfigError(f"unknown sweep parameter '{name}'; valid: {', '.join(sorted(SWEEP_PARAMETERS))}")
    document: Dict[str, Dict[str, Any]] = {}
    for section, key in SWEEP_PARAMETERS[name]:
        document.setdefault(section, {})[key] = 2 * value if (name, key) == ("n_trees", "n_trees") else value
    return RunConfig.from_dict(document, config)


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    """CSV with one (value, ods) row per swept value."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["value", "ods"])
    for row in rows:
        writer.writerow([row.value, f"{row.ods:.6f}"])
    return buffer.getvalue()


async def run_sweep(
    config: RunConfig,
    name: str,
    values: Sequence[Any],
    train_samples: Sequence[TrainingSample],
    test_images: Sequence[Image],
    test_gts: Sequence[GroundTruth],
    *,
    trials: int = DEFAULT_TRIALS,
    threads: int = 1,
) -> Tuple[RunStatus, List[SweepRow]]:
    """
    Train and benchmark once per value and trial, keeping every other parameter fixed.

    Trial r trains with seed forest.seed + r for every value, so values are
    compared on identical randomness.

    Returns:
        Tuple[RunStatus, List[SweepRow]]: CONFIG_ERROR for an unknown parameter or
        an invalid value.
    """
    if trials < 1:
        _LOGGER.error("trials must be >= 1")
        return RunStatus.CONFIG_ERROR, []
    try:
        configs = [apply_value(config, name, value) for value in values]
    except ConfigError as err:
        _LOGGER.error("Invalid sweep: %s", err)
        return RunStatus.CONFIG_ERROR, []

    rows: List[SweepRow] = []
    shared: Dict[int, Any] = {}
    for value, value_config in zip(values, configs):
        scores = []
        for trial in range(trials):
            forest_params = replace(value_config.forest, seed=config.forest.seed + trial)
            forest = shared.get(trial) if name in DETECT_ONLY else None
            try:
                if forest is None:
                    forest = await train_forest(train_samples, forest_params, value_config.channels, threads)
                    if name in DETECT_ONLY:
                        shared[trial] = forest
                report = score_forest(forest, test_images, test_gts, value_config.detect_options(), value_config.eval)
            except ValueError as err:
                _LOGGER.error("Sweep %s=%s failed: %s", name, value, err)
                return RunStatus.DATA_MISMATCH, rows
            scores.append(report.summary.ods)
            _LOGGER.debug("Sweep %s=%s trial %d: ODS %.4f", name, value, trial, report.summary.ods)
        rows.append(SweepRow(value, sum(scores) / len(scores), tuple(scores)))
        _LOGGER.info("Sweep %s=%s: mean ODS %.4f over %d trials", name, value, rows[-1].ods, trials)
    return RunStatus.SUCCESS, rows


def valid_parameters() -> List[str]:
    """Sorted sweepable parameter names."""
    return sorted(SWEEP_PARAMETERS)


def describe(name: str) -> Optional[str]:
    """Configuration fields a sweep parameter sets, as 'section.field' text."""
    targets = SWEEP_PARAMETERS.get(name)
    return None if targets is None else ", ".join(f"{s}.{k}" for s, k in targets)
