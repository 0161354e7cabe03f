"""Tests for the binary model file format."""

import struct
import zlib
from dataclasses import asdict

import numpy as np
import pytest
from conftest import make_stump

from structedge.channels import ChannelParams
from structedge.model_file import ModelFormatError, _json_block, decode_model, encode_model, load_model, save_model
from structedge.run_status import RunStatus
from structedge.structforest.forest import Forest
from structedge.structforest.params import ForestParams

# pylint: disable=line-too-long


def _stump_forest():
    return Forest((make_stump(5, 0.5), make_stump(2, 0.25)), ChannelParams(), ForestParams(n_trees=2, n_trees_eval=1))


def _with_crc(body: bytes) -> bytes:
    return body + struct.pack("<I", zlib.crc32(body))


def _first_node_offset(forest):
    params = len(_json_block(asdict(forest.channel_params))) + len(_json_block(asdict(forest.forest_params)))
    return 4 + 4 + params + 4 + 12


def _assert_same_trees(a, b):
    assert a.n_trees == b.n_trees
    for x, y in zip(a.trees, b.trees):
        for name in ("feature", "threshold", "left", "right", "leaf_index", "leaf_segs", "leaf_edges", "leaf_counts"):
            np.testing.assert_array_equal(getattr(x, name), getattr(y, name))
        assert x.n_features == y.n_features


class TestEncoding:
    """Test cases for encoding and decoding models."""

    def test_reencode_is_byte_identical(self, tiny_forest):
        """Decoding and encoding again gives the same bytes."""
        data = encode_model(tiny_forest)
        decoded = decode_model(data)
        assert encode_model(decoded) == data
        assert decoded.channel_params == tiny_forest.channel_params
        assert decoded.forest_params == tiny_forest.forest_params
        _assert_same_trees(decoded, tiny_forest)

    def test_header(self):
        """Files start with the magic and version 1."""
        data = encode_model(_stump_forest())
        assert data[:4] == b"SEDF"
        assert struct.unpack_from("<I", data, 4) == (1,)

    def test_bad_magic(self):
        """Other files are rejected by their magic."""
        data = bytearray(encode_model(_stump_forest()))
        data[0] ^= 0xFF
        with pytest.raises(ModelFormatError, match="magic"):
            decode_model(bytes(data))

    def test_flipped_bytes_fail_checksum(self):
        """Any corrupted byte after the magic fails the checksum."""
        data = encode_model(_stump_forest())
        for pos in (5, len(data) // 2, len(data) - 6, len(data) - 1):
            corrupt = bytearray(data)
            corrupt[pos] ^= 0x01
            with pytest.raises(ModelFormatError):
                decode_model(bytes(corrupt))

    def test_unsupported_version(self):
        """A valid checksum does not make another version readable."""
        body = bytearray(encode_model(_stump_forest())[:-4])
        body[4:8] = struct.pack("<I", 2)
        with pytest.raises(ModelFormatError, match="version"):
            decode_model(_with_crc(bytes(body)))

    def test_truncated(self):
        """A shortened body is reported as truncated."""
        body = encode_model(_stump_forest())[:-4]
        with pytest.raises(ModelFormatError, match="truncated"):
            decode_model(_with_crc(body[:-10]))

    def test_trailing_bytes(self):
        """Extra bytes after the last tree are rejected."""
        body = encode_model(_stump_forest())[:-4]
        with pytest.raises(ModelFormatError, match="trailing"):
            decode_model(_with_crc(body + b"\0\0"))

    def test_node_reference_out_of_range(self):
        """A child index beyond the node table is rejected."""
        forest = _stump_forest()
        body = bytearray(encode_model(forest)[:-4])
        right = _first_node_offset(forest) + 13
        assert struct.unpack_from("<I", body, right) == (2,)
        body[right:right + 4] = struct.pack("<I", 99)
        with pytest.raises(ModelFormatError, match="out of range"):
            decode_model(_with_crc(bytes(body)))

    def test_bad_parameter_block(self):
        """Unknown parameter names are a format error."""
        forest = _stump_forest()
        ch = _json_block(asdict(forest.channel_params))
        body = encode_model(forest)[:-4]
        bad = _json_block({"bogus": 1})
        with pytest.raises(ModelFormatError, match="parameter block"):
            decode_model(_with_crc(body[:8] + bad + body[8 + len(ch):]))


class TestFiles:
    """Test cases for saving and loading model files."""

    @pytest.mark.asyncio
    async def test_save_and_load(self, tmp_path):
        """A saved model loads back unchanged."""
        forest = _stump_forest()
        path = tmp_path / "models" / "m.sedf"
        assert await save_model(forest, path) == RunStatus.SUCCESS
        status, loaded = await load_model(path)
        assert status == RunStatus.SUCCESS
        _assert_same_trees(loaded, forest)

    @pytest.mark.asyncio
    async def test_missing_file(self, tmp_path):
        """A missing model is an I/O error."""
        assert await load_model(tmp_path / "none.sedf") == (RunStatus.IO_ERROR, None)

    @pytest.mark.asyncio
    async def test_corrupt_file(self, tmp_path):
        """A malformed model is a data mismatch."""
        path = tmp_path / "bad.sedf"
        path.write_bytes(b"SEDF" + b"\0" * 20)
        assert await load_model(path) == (RunStatus.DATA_MISMATCH, None)

    @pytest.mark.asyncio
    async def test_unwritable_path(self, tmp_path):
        """Saving below a regular file fails with an I/O error."""
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert await save_model(_stump_forest(), blocker / "m.sedf") == RunStatus.IO_ERROR
