"""Discretized augmentation policies.

A policy is 5 sub-policies; a sub-policy is 2 operations; an operation names
one of the catalog kinds plus a probability level in 0..10 (probability =
level / 10) and a magnitude level in 0..9 (mapped linearly onto the kind's
magnitude range, see ops.MAGNITUDE_RANGES).

Text format, one sub-policy per line, ``opA,pA,mA|opB,pB,mB`` with integer
levels; policies separated by a blank line; file header ``signforge-policy v1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import SignforgeError

POLICY_FORMAT = "signforge-policy"
POLICY_VERSION = "v1"

PROBABILITY_LEVELS = 11
MAGNITUDE_LEVELS = 10
SUBPOLICY_OPS = 2
POLICY_SUBPOLICIES = 5

# Base 16-operation catalog; `blur` and `box-occlusion` extend it for the
# vandalized / poorly-focused sign variants.
BASE_OP_KINDS = (
    "shear-x",
    "shear-y",
    "translate-x",
    "translate-y",
    "rotate",
    "auto-contrast",
    "invert",
    "equalize",
    "solarize",
    "posterize",
    "contrast",
    "color",
    "brightness",
    "sharpness",
    "cutout",
    "sample-pairing",
)
EXTENSION_OP_KINDS = ("blur", "box-occlusion")
OP_KINDS = BASE_OP_KINDS + EXTENSION_OP_KINDS


class PolicyFormatError(SignforgeError):
    """A policy file or policy string could not be parsed."""


@dataclass(frozen=True)
class PolicyOp:
    op_kind: str
    probability_level: int
    magnitude_level: int

    def __post_init__(self) -> None:
        if self.op_kind not in OP_KINDS:
            raise PolicyFormatError(f"unknown op kind {self.op_kind!r}")
        if not 0 <= self.probability_level < PROBABILITY_LEVELS:
            raise PolicyFormatError(
                f"probability level {self.probability_level} outside 0..{PROBABILITY_LEVELS - 1}"
            )
        if not 0 <= self.magnitude_level < MAGNITUDE_LEVELS:
            raise PolicyFormatError(
                f"magnitude level {self.magnitude_level} outside 0..{MAGNITUDE_LEVELS - 1}"
            )

    @property
    def probability(self) -> float:
        return self.probability_level / 10.0

    def format(self) -> str:
        return f"{self.op_kind},{self.probability_level},{self.magnitude_level}"

    @classmethod
    def parse(cls, text: str) -> "PolicyOp":
        parts = text.strip().split(",")
        if len(parts) != 3:
            raise PolicyFormatError(f"bad op {text!r}, expected kind,prob,mag")
        try:
            return cls(parts[0].strip(), int(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise PolicyFormatError(f"bad op {text!r}: {exc}") from exc


@dataclass(frozen=True)
class SubPolicy:
    ops: tuple[PolicyOp, PolicyOp]

    def __post_init__(self) -> None:
        if len(self.ops) != SUBPOLICY_OPS:
            raise PolicyFormatError(f"sub-policy needs exactly {SUBPOLICY_OPS} ops, got {len(self.ops)}")
        object.__setattr__(self, "ops", tuple(self.ops))

    def format(self) -> str:
        return "|".join(op.format() for op in self.ops)

    @classmethod
    def parse(cls, text: str) -> "SubPolicy":
        parts = text.strip().split("|")
        if len(parts) != SUBPOLICY_OPS:
            raise PolicyFormatError(f"bad sub-policy {text!r}, expected opA|opB")
        return cls(tuple(PolicyOp.parse(p) for p in parts))


@dataclass(frozen=True)
class Policy:
    sub_policies: tuple[SubPolicy, ...]

    def __post_init__(self) -> None:
        if len(self.sub_policies) != POLICY_SUBPOLICIES:
            raise PolicyFormatError(
                f"policy needs exactly {POLICY_SUBPOLICIES} sub-policies, got {len(self.sub_policies)}"
            )
        object.__setattr__(self, "sub_policies", tuple(self.sub_policies))

    def format_inline(self) -> str:
        """Single-line form used in search logs: sub-policies joined by ';'."""
        return ";".join(sp.format() for sp in self.sub_policies)

    @classmethod
    def parse_inline(cls, text: str) -> "Policy":
        return cls(tuple(SubPolicy.parse(p) for p in text.strip().split(";")))


def identity_policy() -> Policy:
    """A policy whose every op has probability level 0 (never applies)."""
    op = PolicyOp("invert", 0, 0)
    return Policy(tuple(SubPolicy((op, op)) for _ in range(POLICY_SUBPOLICIES)))


def write_policies(policies: list[Policy], path: Path | str) -> None:
    lines = [f"{POLICY_FORMAT} {POLICY_VERSION}"]
    for i, policy in enumerate(policies):
        if i:
            lines.append("")
        lines.extend(sp.format() for sp in policy.sub_policies)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_policies(path: Path | str) -> list[Policy]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise PolicyFormatError(f"{path}: empty policy file")
    fields = lines[0].split()
    if len(fields) != 2 or fields[0] != POLICY_FORMAT:
        raise PolicyFormatError(f"{path}: not a {POLICY_FORMAT} file (header {lines[0]!r})")
    if fields[1] != POLICY_VERSION:
        raise PolicyFormatError(
            f"{path}: version mismatch, file has {fields[1]!r}, reader supports {POLICY_VERSION!r}"
        )

    policies: list[Policy] = []
    group: list[SubPolicy] = []
    for line in lines[1:]:
        line = line.strip()
        if not line:
            if group:
                policies.append(Policy(tuple(group)))
                group = []
            continue
        group.append(SubPolicy.parse(line))
    if group:
        policies.append(Policy(tuple(group)))
    return policies
