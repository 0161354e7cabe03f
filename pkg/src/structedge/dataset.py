"""Dataset layout, image and edge map file formats."""

import io
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import aiofiles
import numpy as np
from PIL import Image as PILImage

from structedge.channels import Image
from structedge.constants import GROUNDTRUTH_DIR, IMAGES_DIR
from structedge.ground_truth import GroundTruth
from structedge.run_status import RunStatus

# pylint: disable=line-too-long

_LOGGER = logging.getLogger(__name__)

RAW_SUFFIX = ".bin"
PNG_SUFFIX = ".png"
_RAW_HEADER = struct.Struct("<II")


def decode_image(data: bytes) -> Image:
    """
    Decode PNG/JPEG bytes into an Image with values in [0, 1].

    8-bit images are scaled by 1/255, 16-bit grayscale by 1/65535. Palette and
    alpha images are converted to RGB.
    """
    with PILImage.open(io.BytesIO(data)) as pil:
        if pil.mode in ("I;16", "I;16B", "I;16L", "I"):
            arr = np.asarray(pil, dtype=np.float64) / 65535.0
        elif pil.mode in ("L", "RGB"):
            arr = np.asarray(pil, dtype=np.float64) / 255.0
        elif pil.mode == "F":
            arr = np.asarray(pil, dtype=np.float64)
        else:
            arr = np.asarray(pil.convert("RGB"), dtype=np.float64) / 255.0
    return Image(np.clip(arr, 0.0, 1.0).astype(np.float32))


def decode_segmentation(data: bytes) -> np.ndarray:
    """Decode a (16-bit) PNG of segment ids."""
    with PILImage.open(io.BytesIO(data)) as pil:
        if pil.mode not in ("I;16", "I;16B", "I;16L", "I", "L", "P"):
            raise ValueError(f"segmentation must be a single-channel integer image, got mode {pil.mode}")
        return np.asarray(pil).astype(np.int32)


def encode_segmentation(seg: np.ndarray) -> bytes:
    """Encode segment ids as a 16-bit PNG."""
    seg = np.asarray(seg)
    if seg.min(initial=0) < 0 or seg.max(initial=0) > 65535:
        raise ValueError("segment ids must fit in 16 bits")
    buffer = io.BytesIO()
    PILImage.fromarray(seg.astype(np.uint16)).save(buffer, format="PNG")
    return buffer.getvalue()


def encode_image(img: Image) -> bytes:
    """Encode an RGB or grayscale image as an 8-bit PNG."""
    data = np.round(img.data * 255.0).astype(np.uint8)
    data = data[:, :, 0] if img.n_planes == 1 else data[:, :, :3]
    buffer = io.BytesIO()
    PILImage.fromarray(data).save(buffer, format="PNG")
    return buffer.getvalue()


def encode_prob_map(values: np.ndarray, bits: int = 8) -> bytes:
    """Encode an edge map in [0, 1] as an 8 or 16-bit grayscale PNG."""
    values = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    if bits == 8:
        arr = np.round(values * 255.0).astype(np.uint8)
    elif bits == 16:
        arr = np.round(values * 65535.0).astype(np.uint16)
    else:
        raise ValueError("bits must be 8 or 16")
    buffer = io.BytesIO()
    PILImage.fromarray(arr).save(buffer, format="PNG")
    return buffer.getvalue()


def encode_raw(values: np.ndarray) -> bytes:
    """Raw float plane: width u32, height u32, then float32 little-endian rows."""
    values = np.asarray(values, dtype="<f4")
    height, width = values.shape
    return _RAW_HEADER.pack(width, height) + values.tobytes(order="C")


def decode_raw(data: bytes) -> np.ndarray:
    """Inverse of encode_raw."""
    if len(data) < _RAW_HEADER.size:
        raise ValueError("raw edge map is truncated")
    width, height = _RAW_HEADER.unpack_from(data)
    body = data[_RAW_HEADER.size:]
    if len(body) != 4 * width * height:
        raise ValueError("raw edge map size does not match its header")
    return np.frombuffer(body, dtype="<f4").reshape(height, width).astype(np.float32)


def decode_prob_map(data: bytes, suffix: str) -> np.ndarray:
    """Decode an edge map from PNG (8/16-bit) or raw float bytes."""
    if suffix == RAW_SUFFIX:
        return decode_raw(data)
    img = decode_image(data)
    if img.n_planes != 1:
        raise ValueError("edge map PNG must be grayscale")
    return img.data[:, :, 0]


def encode_overlay(img: Image, values: np.ndarray) -> bytes:
    """RGB PNG of the image with edge strength blended in red."""
    base = img.data[:, :, :3] if img.n_planes >= 3 else np.repeat(img.data[:, :, :1], 3, axis=2)
    alpha = np.clip(np.asarray(values, dtype=np.float32), 0.0, 1.0)[:, :, None]
    red = np.zeros_like(base)
    red[:, :, 0] = 1.0
    blended = base * (1.0 - alpha) + red * alpha
    buffer = io.BytesIO()
    PILImage.fromarray(np.round(blended * 255.0).astype(np.uint8)).save(buffer, format="PNG")
    return buffer.getvalue()


async def read_bytes(path: Path) -> bytes:
    """Read a whole file."""
    async with aiofiles.open(path, "rb") as f:
        return await f.read()


async def write_bytes(path: Path, data: bytes) -> None:
    """Write a whole file, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    async with aiofiles.open(path, "wb") as f:
        await f.write(data)


async def write_text(path: Path, text: str) -> None:
    """Write a UTF-8 text file, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    async with aiofiles.open(path, "w", encoding="utf-8") as f:
        await f.write(text)


async def read_image(path: Path) -> Image:
    """Read an image file."""
    return decode_image(await read_bytes(path))


async def read_segmentation(path: Path) -> np.ndarray:
    """Read a segment id PNG."""
    return decode_segmentation(await read_bytes(path))


async def read_prob_map(path: Path) -> np.ndarray:
    """Read an edge map written by write_prob_map."""
    return decode_prob_map(await read_bytes(path), path.suffix.lower())


async def write_prob_map(path: Path, values: np.ndarray, bits: int = 8) -> None:
    """Write an edge map as PNG, or as raw floats when the suffix is .bin."""
    data = encode_raw(values) if path.suffix.lower() == RAW_SUFFIX else encode_prob_map(values, bits)
    await write_bytes(path, data)


async def write_overlay(path: Path, img: Image, values: np.ndarray) -> None:
    """Write an edge overlay PNG."""
    await write_bytes(path, encode_overlay(img, values))


@dataclass
class Dataset:
    """
    Image/ground truth dataset laid out as images/<id>.png and
    groundtruth/<id>/<annotator>.png.

    Attributes:
        root (Path): Dataset root directory.
        image_paths (Dict[str, Path]): Image file per id, sorted by id.
        gt_paths (Dict[str, List[Path]]): Annotator files per id, sorted by name.
    """
    root: Path
    image_paths: Dict[str, Path] = field(default_factory=dict)
    gt_paths: Dict[str, List[Path]] = field(default_factory=dict)

    @property
    def ids(self) -> List[str]:
        """Image ids with ground truth, sorted."""
        return sorted(self.gt_paths)

    def __len__(self) -> int:
        return len(self.gt_paths)

    @classmethod
    def open(cls, root: str | Path, require_gt: bool = True) -> Tuple[RunStatus, Optional["Dataset"]]:
        """
        Index a dataset directory.

        Images without ground truth are skipped with a warning when require_gt is set.

        Returns:
            Tuple[RunStatus, Optional[Dataset]]: IO_ERROR if the image directory is
            missing, EMPTY_DATASET if no usable image remains.
        """
        root = Path(root)
        images_dir = root / IMAGES_DIR
        if not images_dir.is_dir():
            _LOGGER.error("Dataset %s has no %s directory", root, IMAGES_DIR)
            return RunStatus.IO_ERROR, None
        image_paths = {p.stem: p for p in sorted(images_dir.iterdir()) if p.suffix.lower() in (PNG_SUFFIX, ".jpg", ".jpeg")}
        gt_paths: Dict[str, List[Path]] = {}
        for image_id in image_paths:
            gt_dir = root / GROUNDTRUTH_DIR / image_id
            annotators = sorted(gt_dir.glob("*.png")) if gt_dir.is_dir() else []
            if annotators:
                gt_paths[image_id] = annotators
            elif require_gt:
                _LOGGER.warning("Skipping image %s without ground truth", image_id)
        if require_gt and not gt_paths:
            _LOGGER.error("Dataset %s holds no image with ground truth", root)
            return RunStatus.EMPTY_DATASET, None
        if not require_gt and not image_paths:
            _LOGGER.error("Dataset %s holds no images", root)
            return RunStatus.EMPTY_DATASET, None
        return RunStatus.SUCCESS, cls(root, image_paths, gt_paths)

    async def load_ground_truth(self, image_id: str) -> GroundTruth:
        """Read all annotator segmentations of an image."""
        return GroundTruth(tuple([await read_segmentation(p) for p in self.gt_paths[image_id]]))

    async def load_samples(self, limit: Optional[int] = None) -> List[Tuple[str, Image, GroundTruth]]:
        """
        Read (id, image, ground truth) triples in id order.

        Raises:
            OSError, ValueError: On unreadable or inconsistent files.
        """
        samples = []
        for image_id in self.ids[:limit]:
            image = await read_image(self.image_paths[image_id])
            gt = await self.load_ground_truth(image_id)
            if (gt.height, gt.width) != (image.height, image.width):
                raise ValueError(f"ground truth of {image_id} does not match the image size")
            samples.append((image_id, image, gt))
        return samples


async def write_dataset(root: Path, images: List[Image], gts: List[GroundTruth], prefix: str = "img") -> List[str]:
    """Write images and ground truth in the dataset layout; returns the ids."""
    ids = []
    width = max(3, len(str(len(images) - 1)))
    for i, (image, gt) in enumerate(zip(images, gts)):
        image_id = f"{prefix}{i:0{width}d}"
        await write_bytes(root / IMAGES_DIR / f"{image_id}{PNG_SUFFIX}", encode_image(image))
        for a, seg in enumerate(gt.segmentations):
            await write_bytes(root / GROUNDTRUTH_DIR / image_id / f"{a}{PNG_SUFFIX}", encode_segmentation(seg))
        ids.append(image_id)
    return ids

