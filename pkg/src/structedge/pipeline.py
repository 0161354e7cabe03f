"""End-to-end pipeline: training, detection, benchmarking and synthetic data."""

from __future__ import annotations

import asyncio
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from structedge.channels import Image
from structedge.config import RunConfig
from structedge.constants import VARIANT_LABELS
from structedge.dataset import (
    PNG_SUFFIX,
    RAW_SUFFIX,
    Dataset,
    read_image,
    read_prob_map,
    write_dataset,
    write_overlay,
    write_prob_map,
    write_text,
)
from structedge.detector import DetectOptions, EdgeProbMap, detect_edges, nms
from structedge.evaluation.metrics import EvalOptions, EvalReport, evaluate_dataset
from structedge.evaluation.synth import synth_corpus
from structedge.ground_truth import GroundTruth
from structedge.model_file import load_model, save_model
from structedge.run_status import RunStatus
from structedge.structforest.forest import Forest, TrainingSample, train_forest

# pylint: disable=line-too-long,too-many-arguments,too-many-locals

_LOGGER = logging.getLogger(__name__)

IMAGE_SUFFIXES = (PNG_SUFFIX, ".jpg", ".jpeg")
REPORT_JSON = "report.json"
REPORT_CSV = "pr_curve.csv"
REPORT_TXT = "report.txt"


@dataclass(frozen=True)
class DetectionRecord:
    """
    Outcome of detecting edges in one image.

    Attributes:
        image_id (str): Input file stem.
        output_path (Path): Written edge map.
        seconds (float): Wall time of the detection itself.
        megapixels_per_second (float): Throughput of the detection.
        variant (str): SE, SE+SH, SE+MS or SE+MS+SH.
    """
    image_id: str
    output_path: Path
    seconds: float
    megapixels_per_second: float
    variant: str


def variant_label(opts: DetectOptions) -> str:
    """Variant name for a detection configuration."""
    return VARIANT_LABELS[(opts.multiscale, opts.sharpen_steps > 0)]


def collect_images(inputs: Sequence[str | Path]) -> List[Path]:
    """Expand files and directories into a sorted list of image files."""
    found: List[Path] = []
    for item in map(Path, inputs):
        if item.is_dir():
            found.extend(sorted(p for p in item.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES))
        else:
            found.append(item)
    return found


def find_prediction(pred_dir: Path, image_id: str) -> Optional[Path]:
    """Prediction file of an image id, PNG preferred over raw floats."""
    for suffix in (PNG_SUFFIX, RAW_SUFFIX):
        candidate = pred_dir / f"{image_id}{suffix}"
        if candidate.is_file():
            return candidate
    return None


def score_forest(forest: Forest, images: Sequence[Image], gts: Sequence[GroundTruth], detect_opts: DetectOptions, eval_opts: EvalOptions) -> EvalReport:
    """Detect edges in every image and benchmark them against the ground truth."""
    maps = [detect_edges(image, forest, detect_opts) for image in images]
    report, _ = evaluate_dataset(maps, gts, eval_opts)
    return report


class EdgePipeline:
    """
    Structured edge pipeline bound to a run configuration.

    All public coroutines return (status, payload) and log failures instead of raising.
    """

    def __init__(self, config: RunConfig, threads: Optional[int] = None) -> None:
        """
        Initialize the pipeline.

        Args:
            config (RunConfig): Validated run configuration.
            threads (Optional[int]): Worker count from the command line; overrides
                the environment variable and the configuration.
        """
        self._config = config
        self._threads = config.resolve_threads(threads)
        self._forest: Optional[Forest] = None

    @property
    def config(self) -> RunConfig:
        """The run configuration."""
        return self._config

    @property
    def threads(self) -> int:
        """Resolved worker count."""
        return self._threads

    @property
    def forest(self) -> Forest:
        """The loaded or trained model."""
        if self._forest is None:
            raise RuntimeError("No model loaded. Call load_model() or train() first.")
        return self._forest

    @property
    def has_model(self) -> bool:
        """True once a model is loaded or trained."""
        return self._forest is not None

    async def load_model(self, path: Optional[str | Path] = None) -> RunStatus:
        """Load the model at path, or at paths.model_path of the configuration."""
        path = path or self._config.paths.model_path
        if path is None:
            _LOGGER.error("No model path given")
            return RunStatus.CONFIG_ERROR
        status, forest = await load_model(path)
        if status == RunStatus.SUCCESS:
            self._forest = forest
        return status

    async def load_training_samples(self, train_dir: str | Path) -> Tuple[RunStatus, List[TrainingSample]]:
        """Read training images and ground truth, honouring forest.n_images."""
        status, dataset = Dataset.open(train_dir)
        if status != RunStatus.SUCCESS or dataset is None:
            return status, []
        try:
            triples = await dataset.load_samples(self._config.forest.n_images)
        except OSError as err:
            _LOGGER.error("Cannot read training data: %s", err)
            return RunStatus.IO_ERROR, []
        except ValueError as err:
            _LOGGER.error("Invalid training data: %s", err)
            return RunStatus.DATA_MISMATCH, []
        return RunStatus.SUCCESS, [(image, gt) for _, image, gt in triples]

    async def train(self, train_dir: Optional[str | Path] = None, model_path: Optional[str | Path] = None) -> Tuple[RunStatus, Optional[Forest]]:
        """
        Train a forest on a dataset and write it to model_path.

        Returns:
            Tuple[RunStatus, Optional[Forest]]: EMPTY_DATASET without usable images,
            IO_ERROR for unreadable data or an unwritable model file.
        """
        train_dir = train_dir or self._config.paths.train_dir
        model_path = model_path or self._config.paths.model_path
        if train_dir is None or model_path is None:
            _LOGGER.error("Training needs a dataset directory and a model path")
            return RunStatus.CONFIG_ERROR, None
        status, samples = await self.load_training_samples(train_dir)
        if status != RunStatus.SUCCESS:
            return status, None
        _LOGGER.info("Training %d trees on %d images with %d workers", self._config.forest.n_trees, len(samples), self._threads)
        try:
            forest = await train_forest(samples, self._config.forest, self._config.channels, self._threads)
        except ValueError as err:
            _LOGGER.error("Training failed: %s", err)
            return RunStatus.DATA_MISMATCH, None
        status = await save_model(forest, model_path)
        if status != RunStatus.SUCCESS:
            return status, None
        self._forest = forest
        return RunStatus.SUCCESS, forest

    def _detect_one(self, image: Image, opts: DetectOptions) -> Tuple[EdgeProbMap, float]:
        start = time.perf_counter()
        prob = detect_edges(image, self.forest, opts)
        return prob, time.perf_counter() - start

    async def detect(
        self,
        inputs: Sequence[str | Path],
        output_dir: Optional[str | Path] = None,
        *,
        opts: Optional[DetectOptions] = None,
        apply_nms: bool = False,
        overlay: bool = False,
        raw: bool = False,
        bits: int = 8,
    ) -> Tuple[RunStatus, List[DetectionRecord]]:
        """
        Detect edges in images or directories of images.

        One edge map per input is written to output_dir under the input's stem;
        thinned maps get a "_nms" suffix and overlays an "_overlay" suffix.

        Returns:
            Tuple[RunStatus, List[DetectionRecord]]: DATA_MISMATCH if the options do
            not fit the model, IO_ERROR for unreadable inputs or unwritable outputs.
        """
        if self._forest is None:
            _LOGGER.error("Detection needs a model")
            return RunStatus.CONFIG_ERROR, []
        output_dir = output_dir or self._config.paths.output_dir
        if output_dir is None:
            _LOGGER.error("No output directory given")
            return RunStatus.CONFIG_ERROR, []
        out = Path(output_dir)
        opts = opts or self._config.detect_options()
        variant = variant_label(opts)
        paths = collect_images(inputs)
        if not paths:
            _LOGGER.error("No input images found")
            return RunStatus.EMPTY_DATASET, []

        try:
            images = [await read_image(p) for p in paths]
        except (OSError, ValueError) as err:
            _LOGGER.error("Cannot read input image: %s", err)
            return RunStatus.IO_ERROR, []

        loop = asyncio.get_running_loop()
        try:
            with ThreadPoolExecutor(max_workers=max(1, min(self._threads, len(images)))) as pool:
                results = await asyncio.gather(*[loop.run_in_executor(pool, self._detect_one, image, opts) for image in images])
        except ValueError as err:
            _LOGGER.error("Detection failed: %s", err)
            return RunStatus.DATA_MISMATCH, []

        records: List[DetectionRecord] = []
        suffix = RAW_SUFFIX if raw else PNG_SUFFIX
        try:
            for path, image, (prob, seconds) in zip(paths, images, results):
                target = out / f"{path.stem}{suffix}"
                await write_prob_map(target, prob.values, bits)
                if apply_nms:
                    thin = nms(prob, self._config.eval.nms_radius, self._config.eval.nms_multiplier, self._config.eval.boundary_radius)
                    await write_prob_map(out / f"{path.stem}_nms{suffix}", thin.values, bits)
                if overlay:
                    await write_overlay(out / f"{path.stem}_overlay{PNG_SUFFIX}", image, prob.values)
                mpx = image.height * image.width / 1e6
                records.append(DetectionRecord(path.stem, target, seconds, mpx / seconds if seconds > 0 else float("inf"), variant))
                _LOGGER.debug("Detected %s in %.3fs (%s)", path.name, seconds, variant)
        except OSError as err:
            _LOGGER.error("Cannot write detection output: %s", err)
            return RunStatus.IO_ERROR, records
        return RunStatus.SUCCESS, records

    async def evaluate(
        self,
        pred_dir: str | Path,
        test_dir: Optional[str | Path] = None,
        output_dir: Optional[str | Path] = None,
        *,
        n_thresholds: Optional[int] = None,
    ) -> Tuple[RunStatus, Optional[EvalReport]]:
        """
        Benchmark stored predictions against a dataset's ground truth.

        Writes report.json, pr_curve.csv and report.txt to output_dir when given.

        Returns:
            Tuple[RunStatus, Optional[EvalReport]]: DATA_MISMATCH if a prediction is
            missing or has the wrong size.
        """
        test_dir = test_dir or self._config.paths.test_dir
        if test_dir is None:
            _LOGGER.error("Evaluation needs a dataset directory")
            return RunStatus.CONFIG_ERROR, None
        status, dataset = Dataset.open(test_dir)
        if status != RunStatus.SUCCESS or dataset is None:
            return status, None
        pred_root = Path(pred_dir)
        pred_paths = {image_id: find_prediction(pred_root, image_id) for image_id in dataset.ids}
        missing = [image_id for image_id, p in pred_paths.items() if p is None]
        if missing:
            _LOGGER.error("Missing predictions for: %s", ", ".join(missing))
            return RunStatus.DATA_MISMATCH, None

        eval_opts = self._config.eval if n_thresholds is None else replace(self._config.eval, n_thresholds=n_thresholds)
        try:
            preds = [await read_prob_map(p) for p in pred_paths.values() if p is not None]
            gts = [await dataset.load_ground_truth(image_id) for image_id in dataset.ids]
        except OSError as err:
            _LOGGER.error("Cannot read evaluation data: %s", err)
            return RunStatus.IO_ERROR, None
        except ValueError as err:
            _LOGGER.error("Invalid evaluation data: %s", err)
            return RunStatus.DATA_MISMATCH, None
        try:
            report, _ = evaluate_dataset(preds, gts, eval_opts)
        except ValueError as err:
            _LOGGER.error("Evaluation failed: %s", err)
            return RunStatus.DATA_MISMATCH, None

        if output_dir is not None:
            out = Path(output_dir)
            try:
                await write_text(out / REPORT_JSON, report.to_json())
                await write_text(out / REPORT_CSV, report.to_csv())
                await write_text(out / REPORT_TXT, report.to_table() + "\n")
            except OSError as err:
                _LOGGER.error("Cannot write report: %s", err)
                return RunStatus.IO_ERROR, report
            _LOGGER.info("Report written to %s", out)
        return RunStatus.SUCCESS, report

    async def synth(self, output_dir: str | Path, seed: int, n_images: int, size: int = 128, *, prefix: str = "img") -> Tuple[RunStatus, List[str]]:
        """Write a synthetic corpus in the dataset layout."""
        try:
            images, gts = synth_corpus(seed, n_images, size)
        except ValueError as err:
            _LOGGER.error("Invalid corpus request: %s", err)
            return RunStatus.CONFIG_ERROR, []
        try:
            ids = await write_dataset(Path(output_dir), images, gts, prefix)
        except OSError as err:
            _LOGGER.error("Cannot write corpus: %s", err)
            return RunStatus.IO_ERROR, []
        _LOGGER.info("Wrote %d synthetic images to %s", len(ids), output_dir)
        return RunStatus.SUCCESS, ids

