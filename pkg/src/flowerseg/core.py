"""Raster containers and mask/score-map file I/O.

Conventions used everywhere in the package: arrays are row-major with
shape (height, width[, channel]) and pixels are addressed as
(x, y) = (column, row).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptData, IoFailure, ShapeMismatch, UnreadableFile, UnsupportedFormat


class PixelIndex(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class RasterImage:
    """8-bit RGB image. The constructor takes ownership of `data` and
    freezes it, so instances are safe to share across workers."""

    data: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ShapeMismatch(f"expected (h, w, 3) RGB array, got shape {self.data.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeMismatch("image must be at least 1x1")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class ScoreMap:
    """Per-pixel real-valued map. Values must be finite; a *normalized*
    map additionally lies in [0, 1] (see `is_normalized`)."""

    values: np.ndarray  # (height, width) float64

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeMismatch(f"expected 2-d score map, got shape {self.values.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeMismatch("score map must be at least 1x1")
        if not np.isfinite(arr).all():
            raise ValueError("score map contains NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def is_normalized(self) -> bool:
        return bool((self.values >= 0.0).all() and (self.values <= 1.0).all())


@dataclass(frozen=True)
class SegMask:
    """Binary segmentation mask; 1 = flower, 0 = background."""

    values: np.ndarray  # (height, width) uint8 in {0, 1}

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.uint8)
        if arr.ndim != 2:
            raise ShapeMismatch(f"expected 2-d mask, got shape {self.values.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeMismatch("mask must be at least 1x1")
        if arr.max(initial=0) > 1:
            raise ValueError("mask values must be 0 or 1")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


_16BIT_MODES = ("I;16", "I;16B", "I;16L", "I;16N", "I")


def load_image(path: str | Path) -> RasterImage:
    """Decode a PNG or JPEG file into an 8-bit RGB raster.

    16-bit sources are downconverted by dropping the low byte.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode in _16BIT_MODES:
                raw = np.asarray(im, dtype=np.int32)
                gray = np.clip(raw >> 8, 0, 255).astype(np.uint8)
                arr = np.repeat(gray[:, :, None], 3, axis=2)
            else:
                arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        raise UnreadableFile(f"cannot open {path}: {exc}") from exc
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(f"{path} is not a supported raster format") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptData(f"{path} is damaged: {exc}") from exc
    return RasterImage(arr)


def save_mask(mask: SegMask, path: str | Path) -> None:
    """Write a mask as a single-channel PNG with 0 -> 0 and 1 -> 255.

    The encoding is lossless: `load_mask(save_mask(m)) == m` bit-exactly.
    """
    path = Path(path)
    try:
        Image.fromarray(mask.values * np.uint8(255), mode="L").save(path, format="PNG")
    except (OSError, ValueError) as exc:
        raise IoFailure(f"cannot write mask to {path}: {exc}") from exc


def encode_mask_png(mask: SegMask) -> bytes:
    """In-memory equivalent of `save_mask`; same byte-level contract."""
    import io

    buf = io.BytesIO()
    Image.fromarray(mask.values * np.uint8(255), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def load_mask(path: str | Path) -> SegMask:
    """Inverse of `save_mask`; any pixel value > 127 maps to 1."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            gray = np.asarray(im.convert("L"), dtype=np.uint8)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        raise UnreadableFile(f"cannot open {path}: {exc}") from exc
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(f"{path} is not a supported raster format") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptData(f"{path} is damaged: {exc}") from exc
    return SegMask((gray > 127).astype(np.uint8))
