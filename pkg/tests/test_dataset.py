"""Tests for the dataset layout and edge map file formats."""

import io
import struct

import numpy as np
import pytest
from PIL import Image as PILImage

from structedge.channels import Image
from structedge.dataset import (
    Dataset,
    decode_image,
    decode_prob_map,
    decode_raw,
    decode_segmentation,
    encode_image,
    encode_overlay,
    encode_prob_map,
    encode_raw,
    encode_segmentation,
    read_prob_map,
    write_bytes,
    write_dataset,
    write_prob_map,
)
from structedge.evaluation.synth import synth_corpus
from structedge.ground_truth import GroundTruth
from structedge.run_status import RunStatus

# pylint: disable=line-too-long


class TestCodecs:
    """Test cases for image, segmentation and edge map encodings."""

    def test_image_quantized_to_8_bit(self):
        """Images are written with 8 bits per channel."""
        data = np.random.default_rng(0).uniform(size=(6, 7, 3)).astype(np.float32)
        decoded = decode_image(encode_image(Image(data)))
        assert decoded.data.shape == (6, 7, 3)
        np.testing.assert_allclose(decoded.data, np.round(data * 255) / 255, atol=1e-6)

    def test_grayscale_image(self):
        """Single-plane images stay single-plane."""
        decoded = decode_image(encode_image(Image(np.full((4, 4), 0.5, dtype=np.float32))))
        assert decoded.n_planes == 1

    def test_palette_image_converted(self):
        """Palette images decode to RGB."""
        buffer = io.BytesIO()
        PILImage.new("P", (5, 3), color=1).save(buffer, format="PNG")
        decoded = decode_image(buffer.getvalue())
        assert decoded.data.shape == (3, 5, 3)

    def test_segmentation_16_bit(self):
        """Segment ids above 255 survive."""
        seg = np.arange(12, dtype=np.int32).reshape(3, 4) * 1000
        np.testing.assert_array_equal(decode_segmentation(encode_segmentation(seg)), seg)

    def test_segmentation_range_checked(self):
        """Ids outside 16 bits are rejected."""
        with pytest.raises(ValueError):
            encode_segmentation(np.array([[70000]]))

    def test_segmentation_rejects_rgb(self):
        """A color PNG is not a segmentation."""
        with pytest.raises(ValueError):
            decode_segmentation(encode_image(Image(np.zeros((4, 4, 3), dtype=np.float32))))

    def test_prob_map_16_bit(self):
        """16-bit edge maps keep 1/65535 resolution."""
        values = np.linspace(0.0, 1.0, 20, dtype=np.float32).reshape(4, 5)
        decoded = decode_prob_map(encode_prob_map(values, bits=16), ".png")
        np.testing.assert_allclose(decoded, values, atol=1.0 / 65535)

    def test_prob_map_clipped(self):
        """Values outside [0, 1] are clipped before quantization."""
        decoded = decode_prob_map(encode_prob_map(np.array([[-0.5, 1.5]]), bits=8), ".png")
        np.testing.assert_allclose(decoded, [[0.0, 1.0]])

    def test_prob_map_bits_checked(self):
        """Only 8 and 16 bits are supported."""
        with pytest.raises(ValueError):
            encode_prob_map(np.zeros((2, 2)), bits=12)

    def test_raw_layout(self):
        """Raw maps are width, height, then little-endian float32 rows."""
        values = np.arange(6, dtype=np.float32).reshape(2, 3) / 10
        data = encode_raw(values)
        assert struct.unpack_from("<II", data) == (3, 2)
        assert len(data) == 8 + 4 * 6
        np.testing.assert_array_equal(decode_raw(data), values)

    def test_raw_size_checked(self):
        """Truncated raw maps are rejected."""
        data = encode_raw(np.zeros((2, 3), dtype=np.float32))
        with pytest.raises(ValueError):
            decode_raw(data[:-4])
        with pytest.raises(ValueError):
            decode_raw(data[:5])

    def test_overlay(self):
        """Overlays are RGB and full-strength edges are red."""
        img = Image(np.zeros((4, 4), dtype=np.float32))
        values = np.zeros((4, 4), dtype=np.float32)
        values[1, 2] = 1.0
        decoded = decode_image(encode_overlay(img, values))
        assert decoded.data.shape == (4, 4, 3)
        np.testing.assert_allclose(decoded.data[1, 2], [1.0, 0.0, 0.0])
        assert not decoded.data[0, 0].any()


class TestFiles:
    """Test cases for edge map files."""

    @pytest.mark.asyncio
    async def test_write_prob_map_by_suffix(self, tmp_path):
        """The .bin suffix selects raw floats, anything else PNG."""
        values = np.random.default_rng(1).uniform(size=(5, 6)).astype(np.float32)
        await write_prob_map(tmp_path / "a.bin", values)
        await write_prob_map(tmp_path / "sub" / "a.png", values, bits=16)
        np.testing.assert_array_equal(await read_prob_map(tmp_path / "a.bin"), values)
        np.testing.assert_allclose(await read_prob_map(tmp_path / "sub" / "a.png"), values, atol=1.0 / 65535)
        assert (tmp_path / "a.bin").read_bytes()[:8] == struct.pack("<II", 6, 5)


class TestDataset:
    """Test cases for indexing and loading datasets."""

    @pytest.mark.asyncio
    async def test_write_and_load(self, tmp_path):
        """A written corpus loads back in id order with equal segmentations."""
        images, gts = synth_corpus(2, 3, 32)
        ids = await write_dataset(tmp_path, images, gts)
        assert ids == ["img000", "img001", "img002"]
        status, dataset = Dataset.open(tmp_path)
        assert status == RunStatus.SUCCESS
        assert dataset.ids == ids
        assert len(dataset) == 3
        samples = await dataset.load_samples()
        for (image_id, image, gt), want_gt in zip(samples, gts):
            assert image_id in ids
            assert image.data.shape == (32, 32, 3)
            np.testing.assert_array_equal(gt.segmentations[0], want_gt.segmentations[0])
        assert len(await dataset.load_samples(limit=2)) == 2

    @pytest.mark.asyncio
    async def test_multiple_annotators(self, tmp_path):
        """Every annotator file becomes one segmentation."""
        images, gts = synth_corpus(3, 1, 24)
        seg = gts[0].segmentations[0]
        await write_dataset(tmp_path, images, [GroundTruth((seg, seg.T.copy()))])
        _, dataset = Dataset.open(tmp_path)
        gt = await dataset.load_ground_truth("img000")
        assert gt.n_annotators == 2

    @pytest.mark.asyncio
    async def test_id_width_grows(self, tmp_path):
        """Ids are zero padded to at least three digits."""
        images, gts = synth_corpus(4, 1, 16)
        ids = await write_dataset(tmp_path, images * 1001, gts * 1001, prefix="x")
        assert ids[0] == "x0000"
        assert ids[-1] == "x1000"

    def test_missing_images_dir(self, tmp_path):
        """A root without images/ is an I/O error."""
        assert Dataset.open(tmp_path) == (RunStatus.IO_ERROR, None)

    @pytest.mark.asyncio
    async def test_images_without_ground_truth(self, tmp_path):
        """Images without ground truth are skipped, or usable when not required."""
        images, _ = synth_corpus(5, 1, 16)
        await write_bytes(tmp_path / "images" / "a.png", encode_image(images[0]))
        (tmp_path / "images" / "notes.txt").write_text("ignored")
        assert Dataset.open(tmp_path) == (RunStatus.EMPTY_DATASET, None)
        status, dataset = Dataset.open(tmp_path, require_gt=False)
        assert status == RunStatus.SUCCESS
        assert list(dataset.image_paths) == ["a"]
        assert len(dataset) == 0

    def test_empty_images_dir(self, tmp_path):
        """No images at all is an empty dataset."""
        (tmp_path / "images").mkdir()
        assert Dataset.open(tmp_path, require_gt=False) == (RunStatus.EMPTY_DATASET, None)

    @pytest.mark.asyncio
    async def test_size_mismatch(self, tmp_path):
        """Ground truth of another size fails loading."""
        images, _ = synth_corpus(6, 1, 16)
        await write_bytes(tmp_path / "images" / "a.png", encode_image(images[0]))
        await write_bytes(tmp_path / "groundtruth" / "a" / "0.png", encode_segmentation(np.zeros((8, 8), dtype=np.int32)))
        status, dataset = Dataset.open(tmp_path)
        assert status == RunStatus.SUCCESS
        with pytest.raises(ValueError, match="does not match"):
            await dataset.load_samples()
