"""Categorical policy controller with a score-function update.

Each of the 30 decisions in a policy (5 sub-policies x 2 ops x kind /
probability / magnitude) gets an independent categorical distribution over
its levels. Sampling draws each decision from the softmax of its logits;
the update nudges logits along the log-likelihood gradient weighted by
(reward - baseline), with the baseline kept as a running mean of all
rewards seen.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..policy import Policy, PolicyOp, SubPolicy
from .space import SearchSpace


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


@dataclass(frozen=True)
class ControllerState:
    space: SearchSpace
    logits: tuple[np.ndarray, ...]
    baseline: float = 0.0
    count: int = 0

    @classmethod
    def initial(cls, space: SearchSpace | None = None) -> "ControllerState":
        space = space or SearchSpace()
        sizes = (space.op_count, space.probability_levels, space.magnitude_levels)
        logits = tuple(np.zeros(sizes[slot % 3]) for slot in range(space.decisions_per_policy))
        return cls(space=space, logits=logits)

    def probabilities(self) -> list[np.ndarray]:
        return [softmax(l) for l in self.logits]


def _policy_from_choices(choices: list[int], space: SearchSpace) -> Policy:
    ops = [PolicyOp(space.op_kinds[choices[i]], choices[i + 1], choices[i + 2])
           for i in range(0, len(choices), 3)]
    subs = tuple(SubPolicy((ops[j], ops[j + 1])) for j in range(0, len(ops), 2))
    return Policy(subs)


def policy_choices(policy: Policy, space: SearchSpace) -> list[int]:
    """The 30 categorical indices that produce this policy."""
    choices: list[int] = []
    for sub in policy.sub_policies:
        for op in sub.ops:
            choices += [space.op_kinds.index(op.op_kind), op.probability_level,
                        op.magnitude_level]
    return choices


def sample_policy(state: ControllerState, rng: np.random.Generator) -> Policy:
    """Draw one policy from the controller's 30 categorical distributions."""
    choices = [int(rng.choice(len(l), p=softmax(l))) for l in state.logits]
    return _policy_from_choices(choices, state.space)


def controller_update(state: ControllerState, records, learning_rate: float) -> ControllerState:
    """Score-function update from a batch of reward records.

    All advantages use the pre-update baseline, so a batch of rewards equal
    to the baseline leaves the logits untouched and opposite advantages on
    identical policies cancel exactly.
    """
    if not records:
        raise ValueError("controller_update needs at least one record")
    new_logits = [l.copy() for l in state.logits]
    for record in records:
        advantage = record.reward - state.baseline
        if advantage == 0.0:
            continue
        for slot, choice in enumerate(policy_choices(record.policy, state.space)):
            probs = softmax(state.logits[slot])
            grad = -probs
            grad[choice] += 1.0
            new_logits[slot] += learning_rate * advantage * grad
    rewards = [record.reward for record in records]
    total = state.baseline * state.count + sum(rewards)
    new_count = state.count + len(rewards)
    return replace(state, logits=tuple(new_logits),
                   baseline=total / new_count, count=new_count)
