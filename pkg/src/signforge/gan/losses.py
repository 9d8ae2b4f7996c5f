"""Adversarial and box-content-preserving losses.

``gan_loss`` is the bracketed adversarial objective
mean(log D(real)) + mean(log(1 - D(fake))); the training loop realizes the
min-over-generator / max-over-discriminator game on top of it.

``bbgan_loss`` adds the content term: the fake-side adversarial term is
weighted by a trainable alpha, and (1 - alpha) weights the mean squared
pixel difference between the generated image and the day input, restricted
to the sign regions-of-interest and normalized by the number of masked
elements so box size does not change the term's scale.
"""

from __future__ import annotations

import torch

PROB_EPS = 1e-7


def _clamped(probabilities) -> torch.Tensor:
    probs = torch.as_tensor(probabilities)
    if not probs.is_floating_point():
        probs = probs.double()
    return probs.clamp(PROB_EPS, 1.0 - PROB_EPS)


def gan_loss(d_real, d_fake) -> torch.Tensor:
    """mean(log D(real)) + mean(log(1 - D(fake))), probabilities clamped."""
    real = _clamped(d_real)
    fake = _clamped(d_fake)
    return torch.log(real).mean() + torch.log(1.0 - fake).mean()


def roi_content_term(generated, input_day, roi_mask) -> torch.Tensor:
    """Mean squared difference over masked pixels; 0 for an empty mask."""
    gen = torch.as_tensor(generated)
    day = torch.as_tensor(input_day)
    if gen.shape != day.shape:
        raise ValueError(f"generated {tuple(gen.shape)} vs input {tuple(day.shape)} shape mismatch")
    mask = torch.as_tensor(roi_mask).to(gen.dtype)
    while mask.dim() < gen.dim():
        mask = mask.unsqueeze(-3)  # insert a channel axis to broadcast over
    mask = mask.expand_as(gen)
    count = mask.sum()
    if count.item() == 0:
        return torch.zeros((), dtype=gen.dtype)
    return (mask * (gen - day) ** 2).sum() / count


def bbgan_loss(d_real, d_fake, generated, input_day, roi_mask, alpha) -> torch.Tensor:
    """Eq-2-style objective: adversarial terms plus the masked content term.

    Reduces exactly to ``gan_loss`` at alpha == 1.
    """
    real = _clamped(d_real)
    fake = _clamped(d_fake)
    alpha = torch.as_tensor(alpha)
    content = roi_content_term(generated, input_day, roi_mask)
    return (torch.log(real).mean()
            + alpha * torch.log(1.0 - fake).mean()
            + (1.0 - alpha) * content)
