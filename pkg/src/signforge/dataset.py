"""Dataset ingestion: CSV annotations, size standardization, domain tagging, splits.

The annotation format is a UTF-8 CSV with header
``filename,class,x_min,y_min,x_max,y_max`` and one row per box; image files
are resolved relative to the CSV's directory. Standardization crops every
image to 256x256 choosing the window that keeps the most boxes fully inside,
with ties broken toward the image center. Day/night separation uses a mean
luminance threshold (night below ``tau``), since a global luminance statistic
is the simplest reproducible rule.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .boxes import BoundingBox
from .errors import AnnotationError
from .images import AnnotatedImage, Domain, Split, mean_luminance

CSV_HEADER = ["filename", "class", "x_min", "y_min", "x_max", "y_max"]
CROP_SIZE = 256
NIGHT_LUMINANCE_THRESHOLD = 60.0


def parse_annotations(csv_path: Path | str) -> list[AnnotatedImage]:
    """Read an annotation CSV into AnnotatedImages with lazy pixels.

    Rows are grouped by filename in file order; each distinct filename yields
    one image whose ``path`` points next to the CSV. Raises AnnotationError
    naming the offending line for malformed rows and the image_id for boxes
    violating the coordinate invariants.
    """
    csv_path = Path(csv_path)
    if not csv_path.is_file():
        raise AnnotationError(f"annotation file not found: {csv_path}")
    root = csv_path.parent

    by_name: dict[str, AnnotatedImage] = {}
    with open(csv_path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise AnnotationError(f"{csv_path}: empty file, expected header {','.join(CSV_HEADER)}")
        if [h.strip() for h in header] != CSV_HEADER:
            raise AnnotationError(
                f"{csv_path}: bad header {','.join(header)!r}, expected {','.join(CSV_HEADER)!r}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 6:
                raise AnnotationError(f"{csv_path}:{line_no}: expected 6 fields, got {len(row)}")
            filename, label = row[0].strip(), row[1].strip()
            if not filename:
                raise AnnotationError(f"{csv_path}:{line_no}: empty filename")
            try:
                coords = [int(v) for v in row[2:6]]
            except ValueError:
                raise AnnotationError(f"{csv_path}:{line_no}: non-integer coordinates {row[2:6]}")
            try:
                box = BoundingBox(label, *coords)
            except AnnotationError as exc:
                raise AnnotationError(f"image {filename}: {exc}") from exc
            if filename not in by_name:
                by_name[filename] = AnnotatedImage(
                    image_id=filename, boxes=[], path=root / filename
                )
            by_name[filename].boxes.append(box)
    return list(by_name.values())


def center_crop_256(img: AnnotatedImage, size: int = CROP_SIZE) -> AnnotatedImage:
    """Crop to ``size`` x ``size`` keeping as many boxes fully inside as possible.

    Among windows retaining the maximal number of boxes, the one closest to
    the centered window wins (then lowest y, then lowest x, for determinism).
    Retained boxes are re-expressed in crop coordinates; boxes that would be
    clipped are dropped. Inputs smaller than ``size`` in either dimension are
    an error: no upscaling.
    """
    pixels = img.load_pixels()
    h, w = pixels.shape[:2]
    if h < size or w < size:
        raise AnnotationError(
            f"image {img.image_id}: {w}x{h} is smaller than the {size}x{size} crop"
        )

    n_x, n_y = w - size + 1, h - size + 1
    counts = np.zeros((n_y, n_x), dtype=np.int32)
    for box in img.boxes:
        # box fully inside window at (x0, y0) iff x0 in [x_max-size, x_min], same for y
        x_lo, x_hi = max(0, box.x_max - size), min(n_x - 1, box.x_min)
        y_lo, y_hi = max(0, box.y_max - size), min(n_y - 1, box.y_min)
        if x_lo <= x_hi and y_lo <= y_hi:
            counts[y_lo:y_hi + 1, x_lo:x_hi + 1] += 1

    cx, cy = (w - size) / 2.0, (h - size) / 2.0
    xs = np.arange(n_x, dtype=np.float64)
    ys = np.arange(n_y, dtype=np.float64)
    dist2 = (ys[:, None] - cy) ** 2 + (xs[None, :] - cx) ** 2

    best = counts == counts.max()
    dist2 = np.where(best, dist2, np.inf)
    flat = np.argmin(dist2)  # row-major argmin: nearest center, then lowest y, then x
    y0, x0 = np.unravel_index(flat, dist2.shape)
    y0, x0 = int(y0), int(x0)

    kept = [box.shifted(-x0, -y0) for box in img.boxes
            if box.fully_inside(x0, y0, x0 + size, y0 + size)]
    return img.with_(pixels=pixels[y0:y0 + size, x0:x0 + size].copy(), boxes=kept)


def classify_day_night(img: AnnotatedImage, tau: float = NIGHT_LUMINANCE_THRESHOLD) -> Domain:
    """Night iff mean luminance is below ``tau`` (default 60 of 255)."""
    return Domain.NIGHT if mean_luminance(img.load_pixels()) < tau else Domain.DAY


def split_train_test(
    dataset: list[AnnotatedImage], ratio: float, seed: int
) -> tuple[list[AnnotatedImage], list[AnnotatedImage]]:
    """Deterministic disjoint split with ``round(ratio * N)`` training images.

    Membership is decided by a seeded permutation; both halves preserve the
    input order and carry updated split tags.
    """
    if not dataset:
        raise AnnotationError("cannot split an empty dataset")
    if not 0.0 < ratio < 1.0:
        raise AnnotationError(f"split ratio must be in (0, 1), got {ratio}")
    n = len(dataset)
    n_train = int(np.floor(ratio * n + 0.5))
    order = np.random.default_rng(seed).permutation(n)
    train_idx = set(order[:n_train].tolist())
    train = [img.with_(split=Split.TRAIN) for i, img in enumerate(dataset) if i in train_idx]
    test = [img.with_(split=Split.TEST) for i, img in enumerate(dataset) if i not in train_idx]
    return train, test
