"""Line-delimited dataset manifests.

File layout: a version header line ``signforge-manifest v1`` (carrying the
manifest-level provenance and seed as ``key=value`` attributes), then one
JSON record per image with fields path, image_id, domain, split, provenance,
seed and the box list. Paths are stored relative to the manifest file when
possible, so a manifest directory can be moved as a unit.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .boxes import BoundingBox
from .errors import ManifestError
from .images import AnnotatedImage, Domain, Split

MANIFEST_FORMAT = "signforge-manifest"
MANIFEST_VERSION = "v1"


class Provenance(str, Enum):
    ORIGINAL = "original"
    SAUG = "saug"
    BBGAN = "bbgan"
    RLAUG = "rlaug"
    RLAUG_BBGAN = "rlaug_bbgan"
    REINSERTED = "reinserted"


@dataclass(frozen=True)
class ManifestEntry:
    """One image record: a path plus the AnnotatedImage metadata."""

    path: str
    image_id: str
    domain: Domain
    split: Split
    provenance: Provenance
    seed: int
    boxes: tuple[BoundingBox, ...]

    def to_record(self) -> dict:
        return {
            "path": self.path,
            "image_id": self.image_id,
            "domain": self.domain.value,
            "split": self.split.value,
            "provenance": self.provenance.value,
            "seed": self.seed,
            "boxes": [[b.class_label, b.x_min, b.y_min, b.x_max, b.y_max] for b in self.boxes],
        }

    @classmethod
    def from_record(cls, record: dict) -> "ManifestEntry":
        boxes = tuple(BoundingBox(label, x0, y0, x1, y1)
                      for label, x0, y0, x1, y1 in record["boxes"])
        return cls(
            path=record["path"],
            image_id=record["image_id"],
            domain=Domain(record["domain"]),
            split=Split(record["split"]),
            provenance=Provenance(record["provenance"]),
            seed=int(record["seed"]),
            boxes=boxes,
        )

    def load_image(self, root: Path | str = ".") -> AnnotatedImage:
        """Materialize the entry as an AnnotatedImage with lazy pixels."""
        return AnnotatedImage(
            image_id=self.image_id,
            boxes=list(self.boxes),
            domain=self.domain,
            split=self.split,
            path=Path(root) / self.path,
        )


@dataclass
class DatasetManifest:
    """An ordered collection of image records plus method-level provenance."""

    entries: list[ManifestEntry] = field(default_factory=list)
    provenance: Provenance = Provenance.ORIGINAL
    seed: int = 0

    def __len__(self) -> int:
        return len(self.entries)


def entry_for(
    img: AnnotatedImage,
    path: Path | str,
    provenance: Provenance,
    seed: int,
    relative_to: Path | str | None = None,
) -> ManifestEntry:
    """Build a record for an image stored at ``path``."""
    path = Path(path)
    if relative_to is not None:
        path = Path(os.path.relpath(path, relative_to))
    return ManifestEntry(
        path=path.as_posix(),
        image_id=img.image_id,
        domain=img.domain,
        split=img.split,
        provenance=provenance,
        seed=seed,
        boxes=tuple(img.boxes),
    )


def write_manifest(manifest: DatasetManifest, path: Path | str) -> None:
    """Write the manifest; the inverse of read_manifest, field for field."""
    path = Path(path)
    lines = [
        f"{MANIFEST_FORMAT} {MANIFEST_VERSION} "
        f"provenance={manifest.provenance.value} seed={manifest.seed}"
    ]
    lines.extend(json.dumps(e.to_record(), sort_keys=True) for e in manifest.entries)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path: Path | str, check_images: bool = True) -> DatasetManifest:
    """Read a manifest, verifying the version header and record invariants.

    With ``check_images`` every record path must resolve to a readable file
    (relative paths resolve against the manifest's directory).
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().strip()
        fields = header.split()
        if len(fields) < 2 or fields[0] != MANIFEST_FORMAT:
            raise ManifestError(f"{path}: not a {MANIFEST_FORMAT} file (header {header!r})")
        if fields[1] != MANIFEST_VERSION:
            raise ManifestError(
                f"{path}: version mismatch, file has {fields[1]!r}, reader supports {MANIFEST_VERSION!r}"
            )
        attrs = dict(f.split("=", 1) for f in fields[2:] if "=" in f)
        manifest = DatasetManifest(
            entries=[],
            provenance=Provenance(attrs.get("provenance", "original")),
            seed=int(attrs.get("seed", "0")),
        )
        for line_no, line in enumerate(handle, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                entry = ManifestEntry.from_record(json.loads(line))
            except (ValueError, KeyError) as exc:
                raise ManifestError(f"{path}:{line_no}: bad record: {exc}") from exc
            manifest.entries.append(entry)

    if check_images:
        root = path.parent
        for entry in manifest.entries:
            target = root / entry.path
            if not os.access(target, os.R_OK):
                raise ManifestError(f"{path}: entry {entry.image_id} points to unreadable {target}")
    return manifest
