"""The augmentation operation catalog and annotation-aware application.

Eighteen op kinds: the 16-op base catalog (shear-x/y, translate-x/y, rotate,
auto-contrast, invert, equalize, solarize, posterize, contrast, color,
brightness, sharpness, cutout, sample-pairing) plus the `blur` and
`box-occlusion` extensions used to mimic poorly focused and vandalized signs.

Magnitude levels 0..9 map linearly onto each op's documented range:

    shear-x, shear-y      -0.3 .. 0.3      (shear factor)
    translate-x/y         -0.45 .. 0.45    (fraction of the image side)
    rotate                -30 .. 30        (degrees)
    solarize              256 .. 0         (inversion threshold)
    posterize             8 .. 1           (bits kept)
    contrast, color,
    brightness, sharpness 0.1 .. 1.9       (enhancement factor, 1.0 = identity)
    cutout                0.0 .. 0.4       (square side / min image side)
    sample-pairing        0.0 .. 0.4       (blend weight)
    blur                  0 .. 9           (box-filter radius)
    box-occlusion         0.0 .. 1.0       (occluded fraction of each box)

Geometric ops act about the image center on pixel-center coordinates; boxes
follow by mapping their four corners, taking the axis-aligned hull, clipping
to the canvas, and dropping any box whose clipped area falls below 25% of its
original area. Photometric ops never touch box coordinates.
"""

from __future__ import annotations

import math

import numpy as np
from PIL import Image, ImageEnhance, ImageOps
from scipy import ndimage
from sklearn.base import BaseEstimator, TransformerMixin

from .boxes import BoundingBox
from .errors import SignforgeError
from .images import AnnotatedImage, as_pixels
from .policy import OP_KINDS, Policy, PolicyOp, SubPolicy

GEOMETRIC_OP_KINDS = frozenset({"shear-x", "shear-y", "translate-x", "translate-y", "rotate"})

MAGNITUDE_RANGES: dict[str, tuple[float, float] | None] = {
    "shear-x": (-0.3, 0.3),
    "shear-y": (-0.3, 0.3),
    "translate-x": (-0.45, 0.45),
    "translate-y": (-0.45, 0.45),
    "rotate": (-30.0, 30.0),
    "auto-contrast": None,
    "invert": None,
    "equalize": None,
    "solarize": (256.0, 0.0),
    "posterize": (8.0, 1.0),
    "contrast": (0.1, 1.9),
    "color": (0.1, 1.9),
    "brightness": (0.1, 1.9),
    "sharpness": (0.1, 1.9),
    "cutout": (0.0, 0.4),
    "sample-pairing": (0.0, 0.4),
    "blur": (0.0, 9.0),
    "box-occlusion": (0.0, 1.0),
}

MIN_RETAINED_AREA = 0.25


def round_half_up(values):
    """Round with halves away from the floor ambiguity (0.5 -> 1, 1.5 -> 2)."""
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


def _to_uint8(values: np.ndarray) -> np.ndarray:
    return np.clip(round_half_up(values), 0, 255).astype(np.uint8)


def decode_magnitude(op: PolicyOp) -> float | None:
    """Map the op's magnitude level linearly onto its documented range."""
    span = MAGNITUDE_RANGES[op.op_kind]
    if span is None:
        return None
    lo, hi = span
    return lo + op.magnitude_level * (hi - lo) / 9.0


# ---------------------------------------------------------------------------
# Geometric machinery


def affine_for(kind: str, magnitude: float, height: int, width: int):
    """Forward map p' = A (p - c) + c + t on (x, y) pixel-center coordinates."""
    if kind == "translate-x":
        a = np.eye(2)
        t = np.array([magnitude, 0.0])
    elif kind == "translate-y":
        a = np.eye(2)
        t = np.array([0.0, magnitude])
    elif kind == "shear-x":
        a = np.array([[1.0, magnitude], [0.0, 1.0]])
        t = np.zeros(2)
    elif kind == "shear-y":
        a = np.array([[1.0, 0.0], [magnitude, 1.0]])
        t = np.zeros(2)
    elif kind == "rotate":
        rad = math.radians(magnitude)
        cos, sin = math.cos(rad), math.sin(rad)
        a = np.array([[cos, -sin], [sin, cos]])
        t = np.zeros(2)
    else:
        raise SignforgeError(f"{kind!r} is not a geometric op")
    center = np.array([(width - 1) / 2.0, (height - 1) / 2.0])
    return a, t, center


def warp_pixels(pixels: np.ndarray, a: np.ndarray, t: np.ndarray, center: np.ndarray,
                order: int = 1) -> np.ndarray:
    """Resample pixels under the forward map; out-of-canvas regions are black."""
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    inv = np.linalg.inv(a)
    matrix = swap @ inv @ swap
    center_rc = swap @ center
    offset = center_rc - matrix @ (center_rc + swap @ t)
    out = np.empty_like(pixels)
    source = pixels.astype(np.float64)
    for ch in range(pixels.shape[2]):
        warped = ndimage.affine_transform(
            source[:, :, ch], matrix, offset=offset, order=order, mode="constant", cval=0.0
        )
        out[:, :, ch] = _to_uint8(warped)
    return out


def map_box_hull(box: BoundingBox, a: np.ndarray, t: np.ndarray, center: np.ndarray):
    """Axis-aligned hull of the box's four mapped corners (continuous coords)."""
    xs = (box.x_min - 0.5, box.x_max - 0.5)
    ys = (box.y_min - 0.5, box.y_max - 0.5)
    corners = np.array([[x, y] for x in xs for y in ys])
    mapped = (corners - center) @ a.T + center + t
    return (mapped[:, 0].min(), mapped[:, 1].min(), mapped[:, 0].max(), mapped[:, 1].max())


def transform_boxes(boxes: list[BoundingBox], a: np.ndarray, t: np.ndarray,
                    center: np.ndarray, height: int, width: int,
                    min_area_ratio: float = MIN_RETAINED_AREA) -> list[BoundingBox]:
    """Map boxes through the affine, clip to the canvas, drop small remnants."""
    kept = []
    for box in boxes:
        hx0, hy0, hx1, hy1 = map_box_hull(box, a, t, center)
        x0 = int(round_half_up(hx0 + 0.5))
        y0 = int(round_half_up(hy0 + 0.5))
        x1 = int(round_half_up(hx1 + 0.5))
        y1 = int(round_half_up(hy1 + 0.5))
        cx0, cy0 = max(0, x0), max(0, y0)
        cx1, cy1 = min(width, x1), min(height, y1)
        if cx0 >= cx1 or cy0 >= cy1:
            continue
        if (cx1 - cx0) * (cy1 - cy0) < min_area_ratio * box.area:
            continue
        kept.append(BoundingBox(box.class_label, cx0, cy0, cx1, cy1))
    return kept


def apply_geometric(img: AnnotatedImage, kind: str, magnitude: float) -> AnnotatedImage:
    pixels = img.load_pixels()
    h, w = pixels.shape[:2]
    if kind.startswith("translate"):
        side = w if kind == "translate-x" else h
        magnitude = magnitude * side
    a, t, center = affine_for(kind, magnitude, h, w)
    return img.with_(
        pixels=warp_pixels(pixels, a, t, center),
        boxes=transform_boxes(img.boxes, a, t, center, h, w),
    )


def translate_image(img: AnnotatedImage, dx: float = 0.0, dy: float = 0.0) -> AnnotatedImage:
    """Translate by pixels (not side fractions), annotations following."""
    pixels = img.load_pixels()
    h, w = pixels.shape[:2]
    a = np.eye(2)
    t = np.array([float(dx), float(dy)])
    center = np.array([(w - 1) / 2.0, (h - 1) / 2.0])
    return img.with_(
        pixels=warp_pixels(pixels, a, t, center),
        boxes=transform_boxes(img.boxes, a, t, center, h, w),
    )


def rotate_image(img: AnnotatedImage, degrees: float) -> AnnotatedImage:
    return apply_geometric(img, "rotate", degrees)


def shear_image(img: AnnotatedImage, sx: float = 0.0, sy: float = 0.0) -> AnnotatedImage:
    out = img
    if sx:
        out = apply_geometric(out, "shear-x", sx)
    if sy:
        out = apply_geometric(out, "shear-y", sy)
    return out


# ---------------------------------------------------------------------------
# Photometric ops


def _via_pil(img: AnnotatedImage, fn) -> AnnotatedImage:
    result = np.asarray(fn(Image.fromarray(img.load_pixels(), mode="RGB")))
    return img.with_(pixels=result)


def autocontrast_op(img: AnnotatedImage) -> AnnotatedImage:
    return _via_pil(img, ImageOps.autocontrast)


def invert_op(img: AnnotatedImage) -> AnnotatedImage:
    return img.with_(pixels=(255 - img.load_pixels()))


def equalize_op(img: AnnotatedImage) -> AnnotatedImage:
    return _via_pil(img, ImageOps.equalize)


def solarize_op(img: AnnotatedImage, threshold: float) -> AnnotatedImage:
    threshold = int(round_half_up(threshold))
    if threshold >= 256:
        return img.with_(pixels=img.load_pixels().copy())
    return _via_pil(img, lambda p: ImageOps.solarize(p, threshold=threshold))


def posterize_op(img: AnnotatedImage, bits: float) -> AnnotatedImage:
    bits = int(np.clip(round_half_up(bits), 1, 8))
    return _via_pil(img, lambda p: ImageOps.posterize(p, bits))


def _enhance(img: AnnotatedImage, enhancer, factor: float) -> AnnotatedImage:
    return _via_pil(img, lambda p: enhancer(p).enhance(factor))


def contrast_op(img: AnnotatedImage, factor: float) -> AnnotatedImage:
    return _enhance(img, ImageEnhance.Contrast, factor)


def color_op(img: AnnotatedImage, factor: float) -> AnnotatedImage:
    return _enhance(img, ImageEnhance.Color, factor)


def brightness_op(img: AnnotatedImage, factor: float) -> AnnotatedImage:
    return _enhance(img, ImageEnhance.Brightness, factor)


def sharpness_op(img: AnnotatedImage, factor: float) -> AnnotatedImage:
    return _enhance(img, ImageEnhance.Sharpness, factor)


def blur_op(img: AnnotatedImage, radius_level: int) -> AnnotatedImage:
    """Normalized box filter of width 2k+1 with reflect padding; k = radius_level."""
    if not 0 <= radius_level <= 9:
        raise SignforgeError(f"blur radius level {radius_level} outside 0..9")
    if radius_level == 0:
        return img.with_(pixels=img.load_pixels().copy())
    width = 2 * radius_level + 1
    filtered = ndimage.uniform_filter(
        img.load_pixels().astype(np.float64), size=(width, width, 1), mode="reflect"
    )
    return img.with_(pixels=_to_uint8(filtered))


def cutout_op(img: AnnotatedImage, side_fraction: float,
              rng: np.random.Generator) -> AnnotatedImage:
    """Paste a gray square with side = fraction * min(H, W) at a random spot."""
    pixels = img.load_pixels()
    h, w = pixels.shape[:2]
    side = int(round_half_up(side_fraction * min(h, w)))
    if side <= 0:
        return img.with_(pixels=pixels.copy())
    x0 = int(rng.integers(0, w - side + 1))
    y0 = int(rng.integers(0, h - side + 1))
    out = pixels.copy()
    out[y0:y0 + side, x0:x0 + side] = 128
    return img.with_(pixels=out)


def sample_pairing_op(img: AnnotatedImage, weight: float, pool: list[AnnotatedImage],
                      rng: np.random.Generator) -> AnnotatedImage:
    """Blend with a random pool image; base annotations are kept."""
    if not pool:
        raise SignforgeError("sample-pairing needs a non-empty image pool")
    partner = pool[int(rng.integers(0, len(pool)))]
    base = img.load_pixels()
    other = partner.load_pixels()
    if other.shape != base.shape:
        raise SignforgeError(
            f"sample-pairing pool image {partner.image_id} has shape {other.shape}, "
            f"expected {base.shape}"
        )
    blended = (1.0 - weight) * base.astype(np.float64) + weight * other.astype(np.float64)
    return img.with_(pixels=_to_uint8(blended))


def occlusion_op(img: AnnotatedImage, box_index: int, fraction: float,
                 fill: str = "black", rng: np.random.Generator | None = None) -> AnnotatedImage:
    """Fill a rectangle covering ``fraction`` of one box's area; boxes unchanged.

    The rectangle scales both box sides by sqrt(fraction) and lands at a
    random position inside the box (``rng`` required unless the placement is
    forced). ``fill`` is "black" or "mean" (per-channel mean of the box).
    """
    if not 0.0 <= fraction <= 1.0:
        raise SignforgeError(f"occlusion fraction {fraction} outside [0, 1]")
    if not 0 <= box_index < len(img.boxes):
        raise SignforgeError(f"box index {box_index} outside 0..{len(img.boxes) - 1}")
    if fill not in ("black", "mean"):
        raise SignforgeError(f"unknown occlusion fill {fill!r}")
    pixels = img.load_pixels()
    if fraction == 0.0:
        return img.with_(pixels=pixels.copy())
    box = img.boxes[box_index]
    scale = math.sqrt(fraction)
    occ_w = min(box.width, max(1, int(round_half_up(box.width * scale))))
    occ_h = min(box.height, max(1, int(round_half_up(box.height * scale))))
    free_x, free_y = box.width - occ_w, box.height - occ_h
    if free_x or free_y:
        if rng is None:
            raise SignforgeError("occlusion placement is random: an rng is required")
        x0 = box.x_min + int(rng.integers(0, free_x + 1))
        y0 = box.y_min + int(rng.integers(0, free_y + 1))
    else:
        x0, y0 = box.x_min, box.y_min
    region = pixels[box.y_min:box.y_max, box.x_min:box.x_max]
    value = _to_uint8(region.reshape(-1, 3).mean(axis=0)) if fill == "mean" else np.zeros(3, np.uint8)
    out = pixels.copy()
    out[y0:y0 + occ_h, x0:x0 + occ_w] = value
    return img.with_(pixels=out)


def reinsert_roi(generated: AnnotatedImage, original: AnnotatedImage) -> AnnotatedImage:
    """Copy the original pixels back into every box region of the generated image."""
    gen = generated.load_pixels()
    orig = original.load_pixels()
    if gen.shape != orig.shape:
        raise SignforgeError(
            f"reinsert_roi shape mismatch: generated {gen.shape} vs original {orig.shape}"
        )
    if list(generated.boxes) != list(original.boxes):
        raise SignforgeError(
            f"reinsert_roi box mismatch for {original.image_id}: "
            f"{generated.boxes} vs {original.boxes}"
        )
    out = gen.copy()
    for box in original.boxes:
        out[box.y_min:box.y_max, box.x_min:box.x_max] = orig[box.y_min:box.y_max,
                                                             box.x_min:box.x_max]
    return generated.with_(pixels=out)


# ---------------------------------------------------------------------------
# Policy application


def apply_op(img: AnnotatedImage, op: PolicyOp, sample: float,
             rng: np.random.Generator | None = None,
             pool: list[AnnotatedImage] | None = None) -> AnnotatedImage:
    """Apply ``op`` iff ``sample`` falls under its decoded probability.

    ``sample`` is a unit-uniform draw; ``rng`` supplies positions and partner
    choices for the stochastic kinds (cutout, sample-pairing, box-occlusion).
    """
    if op.op_kind not in OP_KINDS:
        raise SignforgeError(f"unknown op kind {op.op_kind!r}")
    if sample >= op.probability:
        return img

    kind = op.op_kind
    magnitude = decode_magnitude(op)
    if kind in GEOMETRIC_OP_KINDS:
        return apply_geometric(img, kind, magnitude)
    if kind == "auto-contrast":
        return autocontrast_op(img)
    if kind == "invert":
        return invert_op(img)
    if kind == "equalize":
        return equalize_op(img)
    if kind == "solarize":
        return solarize_op(img, magnitude)
    if kind == "posterize":
        return posterize_op(img, magnitude)
    if kind == "contrast":
        return contrast_op(img, magnitude)
    if kind == "color":
        return color_op(img, magnitude)
    if kind == "brightness":
        return brightness_op(img, magnitude)
    if kind == "sharpness":
        return sharpness_op(img, magnitude)
    if kind == "blur":
        return blur_op(img, int(round_half_up(magnitude)))
    if kind == "cutout":
        if rng is None:
            raise SignforgeError("cutout placement is random: an rng is required")
        return cutout_op(img, magnitude, rng)
    if kind == "sample-pairing":
        if rng is None:
            raise SignforgeError("sample-pairing is random: an rng is required")
        return sample_pairing_op(img, magnitude, pool or [], rng)
    if kind == "box-occlusion":
        out = img
        for index in range(len(img.boxes)):
            out = occlusion_op(out, index, magnitude, fill="black", rng=rng)
        return out
    raise SignforgeError(f"unhandled op kind {kind!r}")  # pragma: no cover


def apply_subpolicy(img: AnnotatedImage, sub_policy: SubPolicy, rng: np.random.Generator,
                    pool: list[AnnotatedImage] | None = None) -> AnnotatedImage:
    """Apply both ops in order, gating each with one draw from ``rng``."""
    out = img
    for op in sub_policy.ops:
        out = apply_op(out, op, float(rng.random()), rng=rng, pool=pool)
    return out


class PolicyAugment(BaseEstimator, TransformerMixin):
    """Applies one random sub-policy of one random policy to each image.

    Stateless transformer: ``transform`` reseeds from ``seed`` on every call,
    so equal inputs give byte-equal outputs. The input batch doubles as the
    sample-pairing pool.
    """

    def __init__(self, policies: list[Policy] | None = None, seed: int = 0):
        self.policies = policies
        self.seed = seed

    def fit(self, images=None, y=None):
        return self

    def transform(self, images: list[AnnotatedImage]) -> list[AnnotatedImage]:
        if not self.policies:
            raise SignforgeError("PolicyAugment needs at least one policy")
        rng = np.random.default_rng(self.seed)
        out = []
        for img in images:
            policy = self.policies[int(rng.integers(0, len(self.policies)))]
            sub = policy.sub_policies[int(rng.integers(0, len(policy.sub_policies)))]
            out.append(apply_subpolicy(img, sub, rng, pool=images))
        return out
