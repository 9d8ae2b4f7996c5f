"""Axis-aligned bounding boxes in pixel coordinates.

Coordinates use the half-open convention: ``x_max``/``y_max`` are exclusive,
so ``width == x_max - x_min`` exactly and a box covers the pixel indices
``x_min..x_max-1`` / ``y_min..y_max-1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AnnotationError


@dataclass(frozen=True)
class BoundingBox:
    """A labelled rectangle with integer, top-left-origin coordinates."""

    class_label: str
    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self) -> None:
        if not self.class_label:
            raise AnnotationError("box class_label must be non-empty")
        for name in ("x_min", "y_min", "x_max", "y_max"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)):
                raise AnnotationError(f"box coordinate {name}={value!r} is not an integer")
            object.__setattr__(self, name, int(value))
        if not (0 <= self.x_min < self.x_max):
            raise AnnotationError(f"box requires 0 <= x_min < x_max, got [{self.x_min}, {self.x_max})")
        if not (0 <= self.y_min < self.y_max):
            raise AnnotationError(f"box requires 0 <= y_min < y_max, got [{self.y_min}, {self.y_max})")

    @property
    def width(self) -> int:
        return self.x_max - self.x_min

    @property
    def height(self) -> int:
        return self.y_max - self.y_min

    @property
    def area(self) -> int:
        return self.width * self.height

    def shifted(self, dx: int, dy: int) -> "BoundingBox":
        """The same box translated by (dx, dy)."""
        return BoundingBox(self.class_label, self.x_min + dx, self.y_min + dy,
                           self.x_max + dx, self.y_max + dy)

    def fully_inside(self, x0: int, y0: int, x1: int, y1: int) -> bool:
        """True if the box lies entirely within the window [x0,x1) x [y0,y1)."""
        return x0 <= self.x_min and self.x_max <= x1 and y0 <= self.y_min and self.y_max <= y1


def validate_boxes(boxes: list[BoundingBox], height: int, width: int, image_id: str = "?") -> None:
    """Raise AnnotationError if any box extends beyond an HxW image."""
    for box in boxes:
        if box.x_max > width or box.y_max > height:
            raise AnnotationError(
                f"image {image_id}: box {box} exceeds image bounds {width}x{height}"
            )


def box_iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes; exact on the half-open pixel grid."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def boxes_to_mask(boxes: list[BoundingBox], height: int, width: int) -> np.ndarray:
    """Binary HxW mask marking every pixel covered by at least one box."""
    mask = np.zeros((height, width), dtype=bool)
    for box in boxes:
        mask[box.y_min:box.y_max, box.x_min:box.x_max] = True
    return mask
