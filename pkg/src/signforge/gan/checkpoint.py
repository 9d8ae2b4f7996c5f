"""GAN checkpoint container.

Layout: an ASCII header line ``signforge-gan v1``, a JSON line holding the
architecture config, the trained alpha, and an index of the flat parameter
arrays (name, shape, offset, length), then the raw little-endian float32
parameter data. Loading verifies both the version and the architecture
config.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from ..errors import CheckpointError

CHECKPOINT_FORMAT = "signforge-gan"
CHECKPOINT_VERSION = "v1"


def save_checkpoint(path: Path | str, arch: dict, alpha: float,
                    generator_state: dict, discriminator_state: dict) -> None:
    arrays = []
    blobs = []
    offset = 0
    for prefix, state in (("generator", generator_state), ("discriminator", discriminator_state)):
        for name, tensor in state.items():
            values = tensor.detach().cpu().numpy().astype("<f4")
            arrays.append({
                "name": f"{prefix}.{name}",
                "shape": list(values.shape),
                "offset": offset,
                "length": int(values.size),
            })
            blobs.append(values.tobytes())
            offset += values.size
    meta = {"arch": arch, "alpha": float(alpha), "arrays": arrays}
    with open(path, "wb") as handle:
        handle.write(f"{CHECKPOINT_FORMAT} {CHECKPOINT_VERSION}\n".encode("ascii"))
        handle.write((json.dumps(meta, sort_keys=True) + "\n").encode("ascii"))
        for blob in blobs:
            handle.write(blob)


def load_checkpoint(path: Path | str, expected_arch: dict | None = None):
    """Returns (arch, alpha, generator_state, discriminator_state).

    ``expected_arch``, when given, must match the stored architecture config
    exactly; a mismatch is a CheckpointError naming both configs.
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    with open(path, "rb") as handle:
        header = handle.readline().decode("ascii", errors="replace").strip()
        fields = header.split()
        if len(fields) != 2 or fields[0] != CHECKPOINT_FORMAT:
            raise CheckpointError(f"{path}: not a {CHECKPOINT_FORMAT} file (header {header!r})")
        if fields[1] != CHECKPOINT_VERSION:
            raise CheckpointError(
                f"{path}: version mismatch, file has {fields[1]!r}, "
                f"reader supports {CHECKPOINT_VERSION!r}"
            )
        try:
            meta = json.loads(handle.readline().decode("ascii"))
        except ValueError as exc:
            raise CheckpointError(f"{path}: bad metadata line: {exc}") from exc
        data = np.frombuffer(handle.read(), dtype="<f4")

    arch = meta["arch"]
    if expected_arch is not None and expected_arch != arch:
        raise CheckpointError(
            f"{path}: architecture mismatch: checkpoint has {arch}, expected {expected_arch}"
        )
    states: dict[str, dict[str, torch.Tensor]] = {"generator": {}, "discriminator": {}}
    for entry in meta["arrays"]:
        prefix, name = entry["name"].split(".", 1)
        chunk = data[entry["offset"]:entry["offset"] + entry["length"]]
        if chunk.size != entry["length"]:
            raise CheckpointError(f"{path}: truncated array {entry['name']}")
        states[prefix][name] = torch.from_numpy(chunk.reshape(entry["shape"]).copy())
    return arch, float(meta["alpha"]), states["generator"], states["discriminator"]
