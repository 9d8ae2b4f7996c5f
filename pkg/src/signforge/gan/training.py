"""BBGAN training: alternating updates of the discriminator and of the
generator plus the trainable adversarial/content trade-off weight alpha.

Day and night pools are unpaired: each step samples an independent batch
from both. The discriminator ascends the adversarial terms (with alpha
detached); the generator and alpha descend the full objective, and alpha is
clamped to (1e-3, 1 - 1e-3) after every step.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from sklearn.base import BaseEstimator, TransformerMixin

from ..boxes import boxes_to_mask
from ..errors import DivergenceError, SignforgeError
from ..images import AnnotatedImage, Domain, from_unit_float, to_unit_float
from .checkpoint import load_checkpoint, save_checkpoint
from .losses import PROB_EPS, roi_content_term
from .networks import ConvDiscriminator, UNetGenerator

ALPHA_EPS = 1e-3


def images_to_tensor(images: list[AnnotatedImage]) -> torch.Tensor:
    """Stack to (N, 3, H, W) float32 in [0, 1]; all images must share dims."""
    if not images:
        raise SignforgeError("expected a non-empty image list")
    arrays = [to_unit_float(img.load_pixels()) for img in images]
    shapes = {a.shape for a in arrays}
    if len(shapes) > 1:
        raise SignforgeError(f"images must share dimensions, got {sorted(shapes)}")
    return torch.from_numpy(np.stack(arrays)).permute(0, 3, 1, 2).contiguous()


def masks_to_tensor(images: list[AnnotatedImage]) -> torch.Tensor:
    """Stack box masks to (N, 1, H, W) float32."""
    masks = [boxes_to_mask(img.boxes, *img.load_pixels().shape[:2]) for img in images]
    return torch.from_numpy(np.stack(masks).astype(np.float32)).unsqueeze(1)


def tensor_to_pixels(batch: torch.Tensor) -> list[np.ndarray]:
    arrays = batch.detach().clamp(0, 1).permute(0, 2, 3, 1).cpu().numpy()
    return [from_unit_float(a) for a in arrays]


class BBGAN(BaseEstimator, TransformerMixin):
    """Day-to-night translator trained with the box-content-preserving loss.

    ``fit(day_images, night_images)`` trains generator, discriminator and
    alpha; ``transform(day_images)`` maps day images to generated night
    images with annotations carried over unchanged.
    """

    def __init__(self, depth: int = 3, base_channels: int = 16, disc_depth: int = 3,
                 disc_channels: int = 16, norm: str = "instance", steps: int = 200,
                 batch_size: int = 4, lr: float = 2e-4, beta1: float = 0.5,
                 alpha_init: float = 0.5, alpha_lr: float | None = None, seed: int = 0,
                 checkpoint_every: int = 0, checkpoint_dir: str | None = None):
        self.depth = depth
        self.base_channels = base_channels
        self.disc_depth = disc_depth
        self.disc_channels = disc_channels
        self.norm = norm
        self.steps = steps
        self.batch_size = batch_size
        self.lr = lr
        self.beta1 = beta1
        self.alpha_init = alpha_init
        self.alpha_lr = alpha_lr
        self.seed = seed
        self.checkpoint_every = checkpoint_every
        self.checkpoint_dir = checkpoint_dir

    # -- construction ------------------------------------------------------

    def arch_config(self) -> dict:
        return {
            "depth": self.depth,
            "base_channels": self.base_channels,
            "disc_depth": self.disc_depth,
            "disc_channels": self.disc_channels,
            "norm": self.norm,
        }

    def _build(self) -> None:
        torch.manual_seed(self.seed)
        self.generator_ = UNetGenerator(self.depth, self.base_channels, self.norm)
        self.discriminator_ = ConvDiscriminator(self.disc_depth, self.disc_channels, self.norm)
        self.alpha_ = torch.tensor(float(self.alpha_init), requires_grad=True)
        self.history_: list[dict] = []

    # -- training ----------------------------------------------------------

    def fit(self, day_images: list[AnnotatedImage], night_images: list[AnnotatedImage]):
        day = images_to_tensor(day_images)
        night = images_to_tensor(night_images)
        masks = masks_to_tensor(day_images)
        if day.shape[2] % 2 ** self.depth or day.shape[3] % 2 ** self.depth:
            raise SignforgeError(
                f"image sides {day.shape[2]}x{day.shape[3]} must divide by 2**depth"
            )
        self._build()
        rng = np.random.default_rng(self.seed)

        opt_d = torch.optim.Adam(self.discriminator_.parameters(), lr=self.lr,
                                 betas=(self.beta1, 0.999))
        alpha_lr = self.lr if self.alpha_lr is None else self.alpha_lr
        opt_g = torch.optim.Adam([
            {"params": self.generator_.parameters()},
            {"params": [self.alpha_], "lr": alpha_lr},
        ], lr=self.lr, betas=(self.beta1, 0.999))

        for step in range(self.steps):
            idx = rng.integers(0, day.shape[0], self.batch_size)
            day_batch, mask_batch = day[idx], masks[idx]
            night_batch = night[rng.integers(0, night.shape[0], self.batch_size)]

            fake = self.generator_(day_batch)

            d_real = self.discriminator_(night_batch).clamp(PROB_EPS, 1 - PROB_EPS)
            d_fake = self.discriminator_(fake.detach()).clamp(PROB_EPS, 1 - PROB_EPS)
            adv = torch.log(d_real).mean() + self.alpha_.detach() * torch.log(1 - d_fake).mean()
            opt_d.zero_grad()
            (-adv).backward()
            opt_d.step()

            d_fake2 = self.discriminator_(fake).clamp(PROB_EPS, 1 - PROB_EPS)
            content = roi_content_term(fake, day_batch, mask_batch)
            g_loss = self.alpha_ * torch.log(1 - d_fake2).mean() + (1 - self.alpha_) * content
            opt_g.zero_grad()
            g_loss.backward()
            opt_g.step()
            with torch.no_grad():
                self.alpha_.clamp_(ALPHA_EPS, 1.0 - ALPHA_EPS)

            row = {
                "step": step,
                "d_objective": float(adv),
                "g_loss": float(g_loss),
                "content": float(content),
                "objective": float(torch.log(d_real).mean() + self.alpha_ * torch.log(1 - d_fake2).mean()
                                   + (1 - self.alpha_) * content),
                "alpha": float(self.alpha_),
            }
            if not all(np.isfinite(v) for v in row.values()):
                raise DivergenceError(f"non-finite loss at step {step}: {row}")
            self.history_.append(row)

            if (self.checkpoint_every and self.checkpoint_dir
                    and (step + 1) % self.checkpoint_every == 0):
                self.save(Path(self.checkpoint_dir) / f"gan_step{step + 1:06d}.ckpt")
        return self

    # -- inference ---------------------------------------------------------

    def transform(self, day_images: list[AnnotatedImage]) -> list[AnnotatedImage]:
        self._check_fitted()
        factor = 2 ** self.depth
        out = []
        self.generator_.eval()
        with torch.no_grad():
            for img in day_images:
                h, w = img.load_pixels().shape[:2]
                if h % factor or w % factor:
                    raise SignforgeError(
                        f"image {img.image_id}: {w}x{h} not divisible by 2**depth = {factor}"
                    )
                batch = images_to_tensor([img])
                pixels = tensor_to_pixels(self.generator_(batch))[0]
                out.append(img.with_(pixels=pixels, domain=Domain.NIGHT))
        self.generator_.train()
        return out

    def generate(self, day_image: AnnotatedImage) -> AnnotatedImage:
        return self.transform([day_image])[0]

    # -- persistence -------------------------------------------------------

    def _check_fitted(self) -> None:
        if not hasattr(self, "generator_"):
            raise SignforgeError("BBGAN is not fitted; call fit() or load()")

    def save(self, path: Path | str) -> None:
        self._check_fitted()
        save_checkpoint(path, self.arch_config(), float(self.alpha_),
                        self.generator_.state_dict(), self.discriminator_.state_dict())

    @classmethod
    def load(cls, path: Path | str, **params) -> "BBGAN":
        arch, alpha, gen_state, disc_state = load_checkpoint(path)
        model = cls(**{**arch, **params})
        model._build()
        model.alpha_ = torch.tensor(alpha, requires_grad=True)
        model.generator_.load_state_dict(gen_state)
        model.discriminator_.load_state_dict(disc_state)
        return model


def train_bbgan(day_images: list[AnnotatedImage], night_images: list[AnnotatedImage],
                **params) -> BBGAN:
    """Train a BBGAN and return the fitted model (loss history on .history_)."""
    return BBGAN(**params).fit(day_images, night_images)
