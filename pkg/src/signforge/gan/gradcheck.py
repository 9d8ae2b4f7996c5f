"""Analytic-versus-numerical gradient verification for toy-sized models."""

from __future__ import annotations

from dataclasses import dataclass, field

import torch

from ..errors import SignforgeError

MAX_SCALARS = 10_000
ZERO_GRAD_TOL = 1e-8


@dataclass
class GradientCheckReport:
    max_rel_error: float
    per_param: dict[str, float] = field(default_factory=dict)


def gradient_check(loss_fn, params: dict[str, torch.Tensor],
                   step: float = 1e-4) -> GradientCheckReport:
    """Compare autograd gradients of ``loss_fn()`` against central differences.

    ``loss_fn`` must be a deterministic closure over ``params`` (named leaf
    tensors with requires_grad). Relative error per coordinate is
    |g_a - g_fd| / max(|g_a|, |g_fd|), reported as 0 when both magnitudes are
    below 1e-8. Double precision parameters are strongly recommended.
    """
    total = sum(p.numel() for p in params.values())
    if total > MAX_SCALARS:
        raise SignforgeError(f"gradient_check is for toy models: {total} > {MAX_SCALARS} scalars")

    for p in params.values():
        if not p.requires_grad:
            raise SignforgeError("all checked params must require grad")
        p.grad = None
    loss = loss_fn()
    loss.backward()
    analytic = {name: (p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p))
                for name, p in params.items()}

    report = GradientCheckReport(0.0)
    for name, p in params.items():
        flat = p.data.view(-1)
        grad_a = analytic[name].view(-1)
        worst = 0.0
        for i in range(flat.numel()):
            original = flat[i].item()
            with torch.no_grad():
                flat[i] = original + step
                up = float(loss_fn())
                flat[i] = original - step
                down = float(loss_fn())
                flat[i] = original
            g_fd = (up - down) / (2.0 * step)
            g_a = float(grad_a[i])
            denom = max(abs(g_a), abs(g_fd))
            rel = 0.0 if denom < ZERO_GRAD_TOL else abs(g_a - g_fd) / denom
            worst = max(worst, rel)
        report.per_param[name] = worst
        report.max_rel_error = max(report.max_rel_error, worst)
    return report
