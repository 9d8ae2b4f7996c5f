"""Generator and discriminator networks.

The generator is a U-net style encoder-decoder: strided 4x4 convolutions
halve the resolution on the way down, transposed convolutions double it on
the way up, and skip connections concatenate mirrored encoder features. The
final sigmoid bounds outputs to [0, 1]. The discriminator is a strided
convolutional stack pooled to a single real/fake probability per image.
"""

from __future__ import annotations

import torch
from torch import nn


def _norm_layer(kind: str, channels: int) -> nn.Module:
    if kind == "instance":
        return nn.InstanceNorm2d(channels, affine=True)
    if kind == "none":
        return nn.Identity()
    raise ValueError(f"unknown norm {kind!r}, expected 'instance' or 'none'")


def _channel_plan(base: int, depth: int, cap_factor: int = 8) -> list[int]:
    return [min(base * 2 ** i, base * cap_factor) for i in range(depth)]


class UNetGenerator(nn.Module):
    """3-channel in, 3-channel out; input sides must divide by 2**depth."""

    def __init__(self, depth: int = 4, base_channels: int = 32, norm: str = "instance"):
        super().__init__()
        if depth < 1:
            raise ValueError(f"depth must be >= 1, got {depth}")
        self.depth = depth
        channels = _channel_plan(base_channels, depth)

        self.encoders = nn.ModuleList()
        in_ch = 3
        for i, out_ch in enumerate(channels):
            block = [nn.Conv2d(in_ch, out_ch, 4, stride=2, padding=1)]
            if i > 0:
                block.append(_norm_layer(norm, out_ch))
            block.append(nn.LeakyReLU(0.2, inplace=True))
            self.encoders.append(nn.Sequential(*block))
            in_ch = out_ch

        self.decoders = nn.ModuleList()
        for i in reversed(range(depth)):
            out_ch = channels[i - 1] if i > 0 else 3
            in_dec = channels[i] if i == depth - 1 else channels[i] * 2
            block: list[nn.Module] = [nn.ConvTranspose2d(in_dec, out_ch, 4, stride=2, padding=1)]
            if i > 0:
                block += [_norm_layer(norm, out_ch), nn.ReLU(inplace=True)]
            self.decoders.append(nn.Sequential(*block))
        self.output = nn.Sigmoid()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 4 or x.shape[1] != 3:
            raise ValueError(f"expected (N, 3, H, W) input, got {tuple(x.shape)}")
        factor = 2 ** self.depth
        if x.shape[2] % factor or x.shape[3] % factor:
            raise ValueError(
                f"input {x.shape[2]}x{x.shape[3]} not divisible by 2**depth = {factor}"
            )
        skips = []
        out = x
        for encoder in self.encoders:
            out = encoder(out)
            skips.append(out)
        for i, decoder in enumerate(self.decoders):
            if i > 0:
                out = torch.cat([out, skips[self.depth - 1 - i]], dim=1)
            out = decoder(out)
        return self.output(out)


class ConvDiscriminator(nn.Module):
    """Strided conv stack ending in one probability per image."""

    def __init__(self, depth: int = 3, base_channels: int = 32, norm: str = "instance"):
        super().__init__()
        channels = _channel_plan(base_channels, depth)
        layers: list[nn.Module] = []
        in_ch = 3
        for i, out_ch in enumerate(channels):
            layers.append(nn.Conv2d(in_ch, out_ch, 4, stride=2, padding=1))
            if i > 0:
                layers.append(_norm_layer(norm, out_ch))
            layers.append(nn.LeakyReLU(0.2, inplace=True))
            in_ch = out_ch
        self.features = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.classifier = nn.Linear(in_ch, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 4 or x.shape[1] != 3:
            raise ValueError(f"expected (N, 3, H, W) input, got {tuple(x.shape)}")
        feats = self.pool(self.features(x)).flatten(1)
        return torch.sigmoid(self.classifier(feats)).squeeze(1)
