"""Annotated raster images and their domain/split tags.

Pixels are 8-bit RGB arrays of shape (H, W, 3). An AnnotatedImage parsed
from an annotation CSV starts with lazy pixels (``pixels is None``) and a
``path`` to load from, so large datasets can be indexed without decoding
every file.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image

from .boxes import BoundingBox, validate_boxes
from .errors import AnnotationError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class Domain(str, Enum):
    DAY = "day"
    NIGHT = "night"


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"
    UNSPLIT = "unsplit"


@dataclass(eq=False)
class AnnotatedImage:
    """A raster image plus its box annotations, domain tag and split tag."""

    image_id: str
    boxes: list[BoundingBox] = field(default_factory=list)
    domain: Domain = Domain.DAY
    split: Split = Split.UNSPLIT
    pixels: np.ndarray | None = None
    path: Path | None = None

    def __post_init__(self) -> None:
        if not self.image_id:
            raise AnnotationError("image_id must be non-empty")
        if self.pixels is not None:
            self.pixels = as_pixels(self.pixels)
            validate_boxes(self.boxes, *self.pixels.shape[:2], image_id=self.image_id)

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width) of the loaded pixels."""
        return self.load_pixels().shape[:2]

    def load_pixels(self) -> np.ndarray:
        """Pixels, decoding (and caching) from ``path`` on first access."""
        if self.pixels is None:
            if self.path is None:
                raise AnnotationError(f"image {self.image_id} has neither pixels nor a path")
            self.pixels = load_image(self.path)
            validate_boxes(self.boxes, *self.pixels.shape[:2], image_id=self.image_id)
        return self.pixels

    def with_(self, **changes) -> "AnnotatedImage":
        """Copy with the given fields replaced (pixels are shared, not copied)."""
        return replace(self, **changes)


def as_pixels(array) -> np.ndarray:
    """Coerce to a contiguous (H, W, 3) uint8 array or raise."""
    pixels = np.asarray(array)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise AnnotationError(f"pixels must have shape (H, W, 3), got {pixels.shape}")
    if pixels.dtype != np.uint8:
        raise AnnotationError(f"pixels must be uint8, got {pixels.dtype}")
    return np.ascontiguousarray(pixels)


def load_image(path: Path | str) -> np.ndarray:
    """Read an image file as (H, W, 3) uint8 RGB."""
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def save_image(pixels: np.ndarray, path: Path | str) -> None:
    """Write (H, W, 3) uint8 RGB pixels as PNG."""
    Image.fromarray(as_pixels(pixels), mode="RGB").save(path, format="PNG")


def mean_luminance(pixels: np.ndarray) -> float:
    """Mean of per-pixel luminance 0.299 R + 0.587 G + 0.114 B, in [0, 255]."""
    pixels = as_pixels(pixels)
    return float(np.tensordot(pixels.astype(np.float64), LUMA_WEIGHTS, axes=([2], [0])).mean())


def to_unit_float(pixels: np.ndarray) -> np.ndarray:
    """uint8 [0, 255] -> float32 [0, 1]."""
    return as_pixels(pixels).astype(np.float32) / 255.0


def from_unit_float(values: np.ndarray) -> np.ndarray:
    """float [0, 1] -> uint8 with round-half-up, clipped to [0, 255]."""
    scaled = np.floor(np.asarray(values, dtype=np.float64) * 255.0 + 0.5)
    return np.clip(scaled, 0, 255).astype(np.uint8)
