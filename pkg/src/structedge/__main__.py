#!/usr/bin/env python3
"""Command-line interface for python-structedge."""

import argparse
import asyncio
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from structedge import __version__
from structedge.config import RunConfig
from structedge.dataset import Dataset, write_text
from structedge.model_inspector import ModelInspector, tree_stats
from structedge.pipeline import EdgePipeline
from structedge.run_status import RunStatus
from structedge.sweep import DEFAULT_TRIALS, describe, parse_value, run_sweep, sweep_csv, valid_parameters

# pylint: disable=line-too-long, too-many-locals, too-many-return-statements


async def run_train(args: argparse.Namespace, config: RunConfig) -> RunStatus:
    """Train a forest and print per-tree statistics."""
    pipeline = EdgePipeline(config, args.threads)
    print(f"Training {config.forest.n_trees} trees ({config.forest.n_patches} patches each) with {pipeline.threads} workers")
    status, forest = await pipeline.train(args.train_dir, args.model)
    if status != RunStatus.SUCCESS or forest is None:
        print(f"Training failed: {status}")
        return status
    for i, tree in enumerate(forest.trees):
        stats = tree_stats(tree, i)
        print(f"  Tree {i}: depth {stats['depth']}, {stats['n_leaves']} leaves, {stats['n_nodes']} nodes")
    print(f"Model written to {args.model or config.paths.model_path}")
    return RunStatus.SUCCESS


async def run_detect(args: argparse.Namespace, config: RunConfig) -> RunStatus:
    """Detect edges and print per-image timings."""
    pipeline = EdgePipeline(config, args.threads)
    status = await pipeline.load_model(args.model)
    if status != RunStatus.SUCCESS:
        print(f"Cannot load model: {status}")
        return status
    opts = config.detect_options()
    if args.sharpen is not None:
        opts = replace(opts, sharpen_steps=args.sharpen)
    if args.multiscale:
        opts = replace(opts, multiscale=True)
    status, records = await pipeline.detect(args.inputs, args.output, opts=opts, apply_nms=args.nms, overlay=args.overlay, raw=args.raw, bits=args.bits)
    for record in records:
        print(f"  {record.image_id}: {record.seconds:.3f}s, {record.megapixels_per_second:.2f} MP/s [{record.variant}] -> {record.output_path}")
    if status != RunStatus.SUCCESS:
        print(f"Detection failed: {status}")
    else:
        print(f"Detected edges in {len(records)} images")
    return status


async def run_eval(args: argparse.Namespace, config: RunConfig) -> RunStatus:
    """Benchmark predictions and print the summary table."""
    pipeline = EdgePipeline(config, args.threads)
    status, report = await pipeline.evaluate(args.pred, args.dataset, args.output, n_thresholds=args.thresholds)
    if status != RunStatus.SUCCESS or report is None:
        print(f"Evaluation failed: {status}")
        return status
    s = report.summary
    print(f"ODS {s.ods:.4f}  OIS {s.ois:.4f}  AP {s.ap:.4f}  R50 {s.r50:.4f}  ({s.n_images} images)")
    if args.output:
        print(f"Report written to {args.output}")
    return RunStatus.SUCCESS


async def run_sweep_command(args: argparse.Namespace, config: RunConfig) -> RunStatus:
    """Sweep one parameter and write the (value, ods) CSV."""
    try:
        values = [parse_value(args.param, v) for v in args.values]
    except ValueError as err:
        print(f"Invalid sweep: {err}")
        print(f"Valid parameters: {', '.join(valid_parameters())}")
        return RunStatus.CONFIG_ERROR
    train_dir = args.train_dir or config.paths.train_dir
    test_dir = args.test_dir or config.paths.test_dir
    if train_dir is None or test_dir is None:
        print("Sweeping needs a training and a test dataset")
        return RunStatus.CONFIG_ERROR
    pipeline = EdgePipeline(config, args.threads)
    status, train_samples = await pipeline.load_training_samples(train_dir)
    if status != RunStatus.SUCCESS:
        print(f"Cannot load training data: {status}")
        return status
    status, test_set = Dataset.open(test_dir)
    if status != RunStatus.SUCCESS or test_set is None:
        print(f"Cannot open test data: {status}")
        return status
    try:
        test = await test_set.load_samples()
    except (OSError, ValueError) as err:
        print(f"Cannot read test data: {err}")
        return RunStatus.IO_ERROR
    print(f"Sweeping {args.param} ({describe(args.param)}) over {values}, {args.trials} trials each")
    status, rows = await run_sweep(
        config, args.param, values, train_samples, [img for _, img, _ in test], [gt for _, _, gt in test], trials=args.trials, threads=pipeline.threads
    )
    for row in rows:
        print(f"  {args.param}={row.value}: ODS {row.ods:.4f}")
    if status != RunStatus.SUCCESS:
        print(f"Sweep failed: {status}")
        return status
    csv_text = sweep_csv(rows)
    if args.output:
        try:
            await write_text(Path(args.output), csv_text)
        except OSError as err:
            print(f"Cannot write {args.output}: {err}")
            return RunStatus.IO_ERROR
        print(f"Results written to {args.output}")
    else:
        print(csv_text, end="")
    return RunStatus.SUCCESS


async def run_synth(args: argparse.Namespace, config: RunConfig) -> RunStatus:
    """Write a synthetic dataset."""
    pipeline = EdgePipeline(config, args.threads)
    status, ids = await pipeline.synth(args.output, args.seed, args.count, args.size)
    if status != RunStatus.SUCCESS:
        print(f"Corpus generation failed: {status}")
        return status
    print(f"Wrote {len(ids)} images of {args.size}x{args.size} to {args.output}")
    return RunStatus.SUCCESS


async def run_inspect(args: argparse.Namespace, config: RunConfig) -> RunStatus:
    """Print model statistics."""
    pipeline = EdgePipeline(config, args.threads)
    status = await pipeline.load_model(args.model)
    if status != RunStatus.SUCCESS:
        print(f"Cannot load model: {status}")
        return status
    inspector = ModelInspector(pipeline.forest)
    inspector.display(inspector.inspect())
    return RunStatus.SUCCESS


_COMMANDS = {
    "train": run_train,
    "detect": run_detect,
    "eval": run_eval,
    "sweep": run_sweep_command,
    "synth": run_synth,
    "inspect": run_inspect,
}


async def run_command(args: argparse.Namespace) -> RunStatus:
    """Load the configuration and dispatch to the subcommand."""
    status, config = await RunConfig.load(args.config)
    if status != RunStatus.SUCCESS or config is None:
        print(f"Cannot load configuration: {status}")
        return status
    return await _COMMANDS[args.command](args, config)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="structedge",
        description="Structured forest edge detection: train, detect, benchmark",
        epilog="""
Examples:
  # Generate a synthetic corpus
  structedge synth --output data/train --count 60 --seed 1

  # Train a model
  structedge train --train-dir data/train --model model.sedf

  # Detect edges with multiscale detection and no sharpening
  structedge detect --model model.sedf --output out --multiscale --sharpen 0 data/test/images

  # Benchmark predictions
  structedge eval --pred out --dataset data/test --output report

  # Sweep the number of sampled pixel pairs
  structedge sweep --param m --values 2 64 256 --train-dir data/train --test-dir data/test
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", type=str, default=None, help="JSON configuration overlaid on the defaults")
    parser.add_argument("--threads", type=int, default=None, help="Worker count (overrides STRUCTEDGE_THREADS and the config)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging")
    parser.add_argument("--version", action="version", version=f"python-structedge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="Train a structured forest")
    train.add_argument("--train-dir", type=str, default=None, help="Training dataset root")
    train.add_argument("--model", type=str, default=None, help="Output model file")

    detect = sub.add_parser("detect", help="Detect edges in images")
    detect.add_argument("inputs", nargs="+", help="Image files or directories")
    detect.add_argument("--model", type=str, default=None, help="Model file")
    detect.add_argument("--output", type=str, default=None, help="Output directory")
    detect.add_argument("--sharpen", type=int, default=None, metavar="N", help="Sharpening steps")
    detect.add_argument("--multiscale", action="store_true", help="Average half, original and double resolution")
    detect.add_argument("--nms", action="store_true", help="Also write non-maximum suppressed maps")
    detect.add_argument("--overlay", action="store_true", help="Also write overlay PNGs")
    detect.add_argument("--raw", action="store_true", help="Write raw float maps instead of PNG")
    detect.add_argument("--bits", type=int, choices=(8, 16), default=8, help="PNG bit depth")

    evaluate = sub.add_parser("eval", help="Benchmark edge maps against ground truth")
    evaluate.add_argument("--pred", type=str, required=True, help="Directory of predictions")
    evaluate.add_argument("--dataset", type=str, default=None, help="Dataset root with ground truth")
    evaluate.add_argument("--output", type=str, default=None, help="Directory for report.json, pr_curve.csv and report.txt")
    evaluate.add_argument("--thresholds", type=int, default=None, metavar="N", help="Number of thresholds (default 99)")

    sweep = sub.add_parser("sweep", help="Sweep one parameter and report ODS per value")
    sweep.add_argument("--param", type=str, required=True, help=f"One of: {', '.join(valid_parameters())}")
    sweep.add_argument("--values", nargs="+", required=True, help="Values to try")
    sweep.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="Trials averaged per value")
    sweep.add_argument("--train-dir", type=str, default=None, help="Training dataset root")
    sweep.add_argument("--test-dir", type=str, default=None, help="Test dataset root")
    sweep.add_argument("--output", type=str, default=None, help="CSV output file (stdout if omitted)")

    synth = sub.add_parser("synth", help="Generate a synthetic dataset")
    synth.add_argument("--output", type=str, required=True, help="Dataset root to write")
    synth.add_argument("--count", type=int, default=20, help="Number of images")
    synth.add_argument("--size", type=int, default=128, help="Image side in pixels")
    synth.add_argument("--seed", type=int, default=0, help="Corpus seed")

    inspect = sub.add_parser("inspect", help="Print model statistics")
    inspect.add_argument("--model", type=str, default=None, help="Model file")
    return parser


def main(argv: Optional[list[str]] = None) -> None:
    """Main CLI function."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    if hasattr(sys.stdout, "reconfigure") and sys.stdout.encoding != "utf-8":
        sys.stdout.reconfigure(encoding="utf-8")

    try:
        status = asyncio.run(run_command(args))
    except KeyboardInterrupt:
        print("\nOperation cancelled by user.")
        sys.exit(RunStatus.UNKNOWN_ERROR.exit_code)
    except Exception as e:  # pylint: disable=broad-except
        print(f"\nUnexpected error: {e}")
        sys.exit(RunStatus.UNKNOWN_ERROR.exit_code)
    sys.exit(status.exit_code)


if __name__ == "__main__":
    main()
