"""Binary model file format.

Layout, all integers little-endian:

    magic "SEDF" | version u32
    channel parameter block: length u32 + sorted-key JSON
    forest parameter block:  length u32 + sorted-key JSON
    tree count u32
    per tree: n_nodes u32 | n_leaves u32 | n_features u32
              node records (is_leaf u8, feature u32, threshold f32, left u32, right u32),
              left holding the leaf ordinal for leaves
              leaf records (segment ids d*d u8, packed edge bits, count u32)
    CRC32 u32 of everything before it
"""

import json
import logging
import struct
import zlib
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from structedge.channels import ChannelParams
from structedge.constants import MODEL_MAGIC, MODEL_VERSION
from structedge.dataset import read_bytes, write_bytes
from structedge.run_status import RunStatus
from structedge.structforest.forest import Forest
from structedge.structforest.params import ForestParams
from structedge.structforest.tree import StructTree

_LOGGER = logging.getLogger(__name__)

_U32 = struct.Struct("<I")
_TREE_HEADER = struct.Struct("<III")
NODE_DTYPE = np.dtype([("is_leaf", "u1"), ("feature", "<u4"), ("threshold", "<f4"), ("left", "<u4"), ("right", "<u4")])


class ModelFormatError(ValueError):
    """Raised for a corrupt or incompatible model file."""


def _leaf_dtype(d_out: int) -> np.dtype:
    n_pix = d_out * d_out
    return np.dtype([("seg", "u1", (n_pix,)), ("edge", "u1", ((n_pix + 7) // 8,)), ("count", "<u4")])


def _json_block(params: Dict[str, Any]) -> bytes:
    body = json.dumps(params, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return _U32.pack(len(body)) + body


def _encode_tree(tree: StructTree) -> bytes:
    nodes = np.zeros(tree.n_nodes, dtype=NODE_DTYPE)
    leaf = tree.is_leaf
    nodes["is_leaf"] = leaf
    nodes["feature"] = np.where(leaf, 0, tree.feature)
    nodes["threshold"] = np.where(leaf, 0.0, tree.threshold)
    nodes["left"] = np.where(leaf, tree.leaf_index, tree.left)
    nodes["right"] = np.where(leaf, 0, tree.right)
    leaves = np.zeros(tree.n_leaves, dtype=_leaf_dtype(tree.d_out))
    leaves["seg"] = tree.leaf_segs.reshape(tree.n_leaves, -1)
    leaves["edge"] = np.packbits(tree.leaf_edges.reshape(tree.n_leaves, -1), axis=1)
    leaves["count"] = tree.leaf_counts
    header = _TREE_HEADER.pack(tree.n_nodes, tree.n_leaves, tree.n_features)
    return header + nodes.tobytes() + leaves.tobytes()


def encode_model(forest: Forest) -> bytes:
    """Serialize a forest."""
    parts = [
        MODEL_MAGIC,
        _U32.pack(MODEL_VERSION),
        _json_block(asdict(forest.channel_params)),
        _json_block(asdict(forest.forest_params)),
        _U32.pack(forest.n_trees),
    ]
    parts += [_encode_tree(tree) for tree in forest.trees]
    body = b"".join(parts)
    return body + _U32.pack(zlib.crc32(body))


class _Reader:
    """Bounds-checked cursor over the model body."""

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFormatError("model file is truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return int(_U32.unpack(self.take(4))[0])

    def json_block(self) -> Dict[str, Any]:
        try:
            return dict(json.loads(self.take(self.u32()).decode("utf-8")))
        except (UnicodeDecodeError, json.JSONDecodeError) as err:
            raise ModelFormatError(f"bad parameter block: {err}") from err


def _decode_tree(reader: _Reader, d_out: int) -> StructTree:
    n_nodes, n_leaves, n_features = _TREE_HEADER.unpack(reader.take(_TREE_HEADER.size))
    nodes = np.frombuffer(reader.take(n_nodes * NODE_DTYPE.itemsize), dtype=NODE_DTYPE)
    leaf_dtype = _leaf_dtype(d_out)
    leaves = np.frombuffer(reader.take(n_leaves * leaf_dtype.itemsize), dtype=leaf_dtype)
    is_leaf = nodes["is_leaf"].astype(bool)
    if int(is_leaf.sum()) != n_leaves:
        raise ModelFormatError("leaf count does not match the node records")
    inner_children = np.concatenate([nodes["left"][~is_leaf], nodes["right"][~is_leaf]])
    if np.any(inner_children >= n_nodes) or np.any(nodes["left"][is_leaf] >= n_leaves):
        raise ModelFormatError("node reference out of range")
    n_pix = d_out * d_out
    return StructTree(
        feature=np.where(is_leaf, 0, nodes["feature"]).astype(np.int32),
        threshold=nodes["threshold"].astype(np.float32),
        left=np.where(is_leaf, -1, nodes["left"].astype(np.int64)).astype(np.int32),
        right=np.where(is_leaf, -1, nodes["right"].astype(np.int64)).astype(np.int32),
        leaf_index=np.where(is_leaf, nodes["left"].astype(np.int64), -1).astype(np.int32),
        leaf_segs=leaves["seg"].reshape(n_leaves, d_out, d_out).copy(),
        leaf_edges=np.unpackbits(leaves["edge"], axis=1, count=n_pix).reshape(n_leaves, d_out, d_out).astype(bool),
        leaf_counts=leaves["count"].astype(np.uint32),
        n_features=int(n_features),
    )


def decode_model(data: bytes) -> Forest:
    """
    Parse a serialized forest.

    Raises:
        ModelFormatError: On bad magic, unsupported version, CRC mismatch or malformed content.
    """
    if len(data) < len(MODEL_MAGIC) + 8 or data[:len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise ModelFormatError("not a structured edge model (bad magic)")
    body, (crc,) = data[:-4], _U32.unpack(data[-4:])
    if zlib.crc32(body) != crc:
        raise ModelFormatError("model checksum mismatch")
    reader = _Reader(body)
    reader.take(len(MODEL_MAGIC))
    version = reader.u32()
    if version != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    try:
        channel_params = ChannelParams(**reader.json_block())
        forest_params = ForestParams(**reader.json_block())
    except TypeError as err:
        raise ModelFormatError(f"bad parameter block: {err}") from err
    trees = tuple(_decode_tree(reader, forest_params.d_out) for _ in range(reader.u32()))
    if reader.pos != len(body):
        raise ModelFormatError("trailing bytes after the last tree")
    return Forest(trees, channel_params, forest_params)


async def save_model(forest: Forest, path: str | Path) -> RunStatus:
    """Write a model file; IO_ERROR if it cannot be written."""
    try:
        await write_bytes(Path(path), encode_model(forest))
    except OSError as err:
        _LOGGER.error("Cannot write model %s: %s", path, err)
        return RunStatus.IO_ERROR
    _LOGGER.info("Model with %d trees written to %s", forest.n_trees, path)
    return RunStatus.SUCCESS


async def load_model(path: str | Path) -> Tuple[RunStatus, Optional[Forest]]:
    """Read a model file; IO_ERROR if unreadable, DATA_MISMATCH if malformed."""
    try:
        data = await read_bytes(Path(path))
    except OSError as err:
        _LOGGER.error("Cannot read model %s: %s", path, err)
        return RunStatus.IO_ERROR, None
    try:
        return RunStatus.SUCCESS, decode_model(data)
    except ModelFormatError as err:
        _LOGGER.error("Invalid model %s: %s", path, err)
        return RunStatus.DATA_MISMATCH, None
