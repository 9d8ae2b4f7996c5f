"""The discretized policy search space."""

from __future__ import annotations

from dataclasses import dataclass

from ..policy import (BASE_OP_KINDS, MAGNITUDE_LEVELS, OP_KINDS, POLICY_SUBPOLICIES,
                      PROBABILITY_LEVELS, SUBPOLICY_OPS)


@dataclass(frozen=True)
class SearchSpace:
    op_kinds: tuple[str, ...] = OP_KINDS
    probability_levels: int = PROBABILITY_LEVELS
    magnitude_levels: int = MAGNITUDE_LEVELS

    @property
    def op_count(self) -> int:
        return len(self.op_kinds)

    @property
    def choices_per_op(self) -> int:
        return self.op_count * self.probability_levels * self.magnitude_levels

    @property
    def decisions_per_policy(self) -> int:
        return POLICY_SUBPOLICIES * SUBPOLICY_OPS * 3  # kind, probability, magnitude

    def subpolicy_count(self) -> int:
        return self.choices_per_op ** SUBPOLICY_OPS

    @classmethod
    def base(cls) -> "SearchSpace":
        """The 16-op space without the blur / box-occlusion extensions."""
        return cls(op_kinds=BASE_OP_KINDS)


def policy_space_size(space: SearchSpace) -> int:
    """Exact number of distinct policies: (K * prob_levels * mag_levels) ** 10."""
    return space.choices_per_op ** (POLICY_SUBPOLICIES * SUBPOLICY_OPS)
