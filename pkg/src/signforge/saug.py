"""SimpleAugment: a three-step pixel heuristic turning day images into
pseudo-night images.

Step 1 darkens each channel with a power law, v -> v * (1 - beta_c * (v/255)**gamma),
so bright pixels lose superlinearly more than dark ones (blue loses most).
Step 2 further scales the top half of the image to darken the sky.
Step 3 copies every bounding-box region back verbatim from the input, keeping
the signs readable. Both darkening steps round half-up to 8-bit values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import SignforgeError
from .images import AnnotatedImage, Domain
from .ops import round_half_up


@dataclass(frozen=True)
class SaugParams:
    beta_red: float = 0.5
    beta_green: float = 0.5
    beta_blue: float = 0.7
    gamma: float = 2.0
    sky_scale: float = 0.6

    def __post_init__(self) -> None:
        if self.beta_blue < max(self.beta_red, self.beta_green):
            raise SignforgeError(
                "SAUG requires beta_blue >= beta_red, beta_green "
                f"(got {self.beta_blue} < {max(self.beta_red, self.beta_green)})"
            )


def saug_transform(img: AnnotatedImage, params: SaugParams = SaugParams()) -> AnnotatedImage:
    """Produce the pseudo-night version of a day image; boxes are unchanged."""
    if img.domain != Domain.DAY:
        raise SignforgeError(f"SAUG expects a day image, got domain {img.domain.value!r}")
    pixels = img.load_pixels()
    h = pixels.shape[0]

    beta = np.array([params.beta_red, params.beta_green, params.beta_blue])
    values = pixels.astype(np.float64)
    darkened = round_half_up(values * (1.0 - beta * (values / 255.0) ** params.gamma))
    darkened[: (h + 1) // 2] = round_half_up(darkened[: (h + 1) // 2] * params.sky_scale)
    out = np.clip(darkened, 0, 255).astype(np.uint8)

    for box in img.boxes:
        out[box.y_min:box.y_max, box.x_min:box.x_max] = pixels[box.y_min:box.y_max,
                                                               box.x_min:box.x_max]
    return img.with_(pixels=out, domain=Domain.NIGHT)


class SimpleAugment(BaseEstimator, TransformerMixin):
    """SAUG as a stateless transformer over lists of day images."""

    def __init__(self, beta_red: float = 0.5, beta_green: float = 0.5,
                 beta_blue: float = 0.7, gamma: float = 2.0, sky_scale: float = 0.6):
        self.beta_red = beta_red
        self.beta_green = beta_green
        self.beta_blue = beta_blue
        self.gamma = gamma
        self.sky_scale = sky_scale

    def _params(self) -> SaugParams:
        return SaugParams(self.beta_red, self.beta_green, self.beta_blue,
                          self.gamma, self.sky_scale)

    def fit(self, images=None, y=None):
        self._params()  # validate
        return self

    def transform(self, images: list[AnnotatedImage]) -> list[AnnotatedImage]:
        params = self._params()
        return [saug_transform(img, params) for img in images]
