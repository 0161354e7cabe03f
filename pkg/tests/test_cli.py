"""Tests for the command-line interface."""

from unittest.mock import AsyncMock, patch

import pytest

from structedge.__main__ import build_parser, main, run_command
from structedge.model_file import save_model
from structedge.run_status import RunStatus

# pylint: disable=line-too-long


class TestParser:
    """Test cases for argument parsing."""

    def test_detect_arguments(self):
        """Detect flags parse into the namespace."""
        args = build_parser().parse_args(["--threads", "2", "detect", "--model", "m.sedf", "--output", "out", "--sharpen", "0", "--multiscale", "--bits", "16", "a.png", "dir"])
        assert args.command == "detect"
        assert args.threads == 2
        assert args.inputs == ["a.png", "dir"]
        assert args.sharpen == 0
        assert args.multiscale
        assert args.bits == 16
        assert not args.nms

    def test_sweep_arguments(self):
        """Sweep values stay strings until the parameter is known."""
        args = build_parser().parse_args(["sweep", "--param", "m", "--values", "2", "64", "--trials", "1"])
        assert args.values == ["2", "64"]
        assert args.trials == 1

    def test_command_required(self):
        """A subcommand is required."""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_bits_restricted(self):
        """Only 8 and 16 bit PNGs are offered."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["detect", "--bits", "12", "a.png"])


class TestMain:
    """Test cases for exit codes."""

    @pytest.mark.parametrize("status", list(RunStatus))
    def test_exit_code_follows_status(self, status):
        """The process exit code is the status exit code."""
        with patch("structedge.__main__.run_command", new=AsyncMock(return_value=status)):
            with pytest.raises(SystemExit) as exc:
                main(["synth", "--output", "x"])
        assert exc.value.code == status.exit_code

    def test_unexpected_error(self, capsys):
        """Unexpected exceptions exit with the unknown error code."""
        with patch("structedge.__main__.run_command", new=AsyncMock(side_effect=RuntimeError("boom"))):
            with pytest.raises(SystemExit) as exc:
                main(["synth", "--output", "x"])
        assert exc.value.code == 1
        assert "boom" in capsys.readouterr().out

    def test_exit_codes(self):
        """Documented exit code table."""
        assert [s.exit_code for s in (RunStatus.SUCCESS, RunStatus.UNKNOWN_ERROR, RunStatus.CONFIG_ERROR, RunStatus.IO_ERROR, RunStatus.DATA_MISMATCH, RunStatus.EMPTY_DATASET)] == [0, 1, 2, 3, 4, 5]


class TestCommands:
    """Test cases for subcommands run in process."""

    @pytest.mark.asyncio
    async def test_bad_config(self, tmp_path, capsys):
        """An invalid configuration file stops before the command."""
        path = tmp_path / "config.json"
        path.write_text('{"forest": {"bogus": 1}}')
        args = build_parser().parse_args(["--config", str(path), "synth", "--output", str(tmp_path / "c")])
        assert await run_command(args) == RunStatus.CONFIG_ERROR
        assert "Cannot load configuration" in capsys.readouterr().out

    @pytest.mark.asyncio
    async def test_synth_then_inspect(self, tmp_path, capsys, tiny_forest):
        """synth writes a corpus and inspect prints a model report."""
        args = build_parser().parse_args(["synth", "--output", str(tmp_path / "c"), "--count", "2", "--size", "32", "--seed", "4"])
        assert await run_command(args) == RunStatus.SUCCESS
        assert (tmp_path / "c" / "images" / "img001.png").is_file()
        model = tmp_path / "m.sedf"
        await save_model(tiny_forest, model)
        args = build_parser().parse_args(["inspect", "--model", str(model)])
        assert await run_command(args) == RunStatus.SUCCESS
        out = capsys.readouterr().out
        assert "Wrote 2 images of 32x32" in out
        assert "MODEL INSPECTION RESULTS" in out

    @pytest.mark.asyncio
    async def test_detect_and_eval(self, tmp_path, capsys, tiny_forest):
        """detect writes maps that eval benchmarks."""
        model = tmp_path / "m.sedf"
        await save_model(tiny_forest, model)
        config = tmp_path / "config.json"
        config.write_text('{"forest": {"n_trees": 2, "n_trees_eval": 1}, "detect": {"n_trees_eval": 1}}')
        data = tmp_path / "c"
        assert await run_command(build_parser().parse_args(["synth", "--output", str(data), "--count", "2", "--size", "48"])) == RunStatus.SUCCESS
        detect = build_parser().parse_args(["--config", str(config), "--threads", "1", "detect", "--model", str(model), "--output", str(tmp_path / "pred"), "--sharpen", "0", str(data / "images")])
        assert await run_command(detect) == RunStatus.SUCCESS
        evaluate = build_parser().parse_args(["--config", str(config), "eval", "--pred", str(tmp_path / "pred"), "--dataset", str(data), "--thresholds", "9", "--output", str(tmp_path / "report")])
        assert await run_command(evaluate) == RunStatus.SUCCESS
        out = capsys.readouterr().out
        assert "[SE]" in out
        assert "ODS" in out
        assert (tmp_path / "report" / "report.json").is_file()

    @pytest.mark.asyncio
    async def test_detect_missing_model(self, tmp_path, capsys):
        """A missing model is reported with its status."""
        args = build_parser().parse_args(["detect", "--model", str(tmp_path / "none.sedf"), "--output", str(tmp_path), "a.png"])
        assert await run_command(args) == RunStatus.IO_ERROR
        assert "Cannot load model" in capsys.readouterr().out

    @pytest.mark.asyncio
    async def test_sweep_unknown_parameter(self, capsys):
        """Unknown sweep parameters list the valid ones."""
        args = build_parser().parse_args(["sweep", "--param", "speed", "--values", "1"])
        assert await run_command(args) == RunStatus.CONFIG_ERROR
        assert "Valid parameters" in capsys.readouterr().out

    @pytest.mark.asyncio
    async def test_sweep_needs_datasets(self, capsys):
        """Sweeps need training and test data."""
        args = build_parser().parse_args(["sweep", "--param", "m", "--values", "2"])
        assert await run_command(args) == RunStatus.CONFIG_ERROR
        assert "needs a training and a test dataset" in capsys.readouterr().out

    @pytest.mark.asyncio
    async def test_sweep_writes_csv(self, tmp_path, tiny_forest):
        """A sweep writes the value,ods CSV."""
        data = tmp_path / "c"
        assert await run_command(build_parser().parse_args(["synth", "--output", str(data), "--count", "2", "--size", "32"])) == RunStatus.SUCCESS
        config = tmp_path / "config.json"
        config.write_text('{"forest": {"n_trees": 2, "n_trees_eval": 1}, "detect": {"n_trees_eval": 1}, "eval": {"n_thresholds": 5}}')
        out = tmp_path / "sweep.csv"
        args = build_parser().parse_args(["--config", str(config), "sweep", "--param", "sharpen_steps", "--values", "0", "1", "--trials", "1", "--train-dir", str(data), "--test-dir", str(data), "--output", str(out)])
        with patch("structedge.sweep.train_forest", new=AsyncMock(return_value=tiny_forest)):
            assert await run_command(args) == RunStatus.SUCCESS
        lines = out.read_text().splitlines()
        assert lines[0] == "value,ods"
        assert [line.split(",")[0] for line in lines[1:]] == ["0", "1"]
