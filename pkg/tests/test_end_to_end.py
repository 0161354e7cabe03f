"""Desk-scale end-to-end runs on the synthetic corpus.

These train full-size forests and take minutes; they only run with
STRUCTEDGE_RUN_SLOW=1.
"""

import asyncio
import time

import numpy as np
import pytest

from structedge.channels import ChannelParams, Image
from structedge.detector import DetectOptions, detect
from structedge.evaluation.metrics import EvalOptions
from structedge.evaluation.synth import synth_corpus
from structedge.model_file import encode_model
from structedge.pipeline import score_forest
from structedge.structforest.forest import train_forest
from structedge.structforest.params import ForestParams

# pylint: disable=line-too-long, redefined-outer-name

DESK_PARAMS = ForestParams(n_patches=20_000)
EVAL_OPTS = EvalOptions(n_thresholds=25)


@pytest.fixture(scope="module")
def desk_corpus():
    """60 training and 20 test images of 128x128."""
    images, gts = synth_corpus(2024, 80, 128)
    return list(zip(images[:60], gts[:60])), images[60:], gts[60:]


@pytest.fixture(scope="module")
def desk_forest(desk_corpus):
    """Eight trees trained on the desk corpus."""
    train, _, _ = desk_corpus
    return asyncio.run(train_forest(train, DESK_PARAMS, ChannelParams(), threads=4))


@pytest.mark.slow
class TestDeskScale:
    """Benchmarks of a full-size forest on the synthetic corpus."""

    def test_single_scale_ods(self, desk_corpus, desk_forest):
        """SE reaches ODS 0.80 and sharpening does not lower R50."""
        _, images, gts = desk_corpus
        plain = score_forest(desk_forest, images, gts, DetectOptions(sharpen_steps=0), EVAL_OPTS)
        sharp = score_forest(desk_forest, images, gts, DetectOptions(sharpen_steps=2), EVAL_OPTS)
        assert plain.summary.ods >= 0.80
        assert sharp.summary.r50 >= plain.summary.r50
        assert plain.summary.ois >= plain.summary.ods

    def test_multiscale_does_not_regress(self, desk_corpus, desk_forest):
        """Multiscale ODS stays within 0.02 of single scale."""
        _, images, gts = desk_corpus
        single = score_forest(desk_forest, images, gts, DetectOptions(sharpen_steps=0), EVAL_OPTS)
        multi = score_forest(desk_forest, images, gts, DetectOptions(sharpen_steps=0, multiscale=True), EVAL_OPTS)
        assert multi.summary.ods >= single.summary.ods - 0.02

    @pytest.mark.asyncio
    async def test_deterministic_training_and_detection(self, desk_corpus, desk_forest):
        """A second training run gives a byte-identical model and identical maps."""
        train, images, _ = desk_corpus
        again = await train_forest(train, DESK_PARAMS, ChannelParams(), threads=2)
        assert encode_model(again) == encode_model(desk_forest)
        a = detect(images[0], desk_forest).values
        b = detect(images[0], again).values
        assert a.tobytes() == b.tobytes()

    def test_linear_scaling(self, desk_forest):
        """Twice the pixels take at most 2.5 times as long."""
        images, _ = synth_corpus(7, 1, (128, 256))
        wide = images[0]
        narrow = Image(np.ascontiguousarray(wide.data[:, :128]))
        opts = DetectOptions()

        def median_time(img):
            detect(img, desk_forest, opts)
            times = []
            for _ in range(5):
                start = time.perf_counter()
                detect(img, desk_forest, opts)
                times.append(time.perf_counter() - start)
            return float(np.median(times))

        assert median_time(wide) <= 2.5 * median_time(narrow)
