"""The sample -> evaluate -> update search loop and its append-only log."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import SignforgeError
from ..images import AnnotatedImage
from ..policy import Policy
from .children import ChildDivergence, ChildTrainer, ClassificationChild
from .controller import ControllerState, controller_update, sample_policy
from .space import SearchSpace


@dataclass(frozen=True)
class RewardRecord:
    policy: Policy
    reward: float
    epoch: int
    diverged: bool = False

    def to_json(self) -> str:
        return json.dumps({
            "epoch": self.epoch,
            "reward": self.reward,
            "policy": self.policy.format_inline(),
            "diverged": self.diverged,
        })

    @classmethod
    def from_json(cls, line: str) -> "RewardRecord":
        data = json.loads(line)
        return cls(policy=Policy.parse_inline(data["policy"]), reward=float(data["reward"]),
                   epoch=int(data["epoch"]), diverged=bool(data.get("diverged", False)))


def evaluate_policy(policy: Policy, child: ChildTrainer,
                    train_set: list[AnnotatedImage], val_set: list[AnnotatedImage],
                    epoch: int = 0) -> RewardRecord:
    """Train the (fresh) child under the policy and score it on the val set.

    A diverging child yields reward 0 with the diverged flag set rather than
    aborting the search.
    """
    if not train_set or not val_set:
        raise SignforgeError("evaluate_policy needs non-empty train and val sets")
    try:
        reward = child.fit(train_set, policy).score(val_set)
    except ChildDivergence:
        return RewardRecord(policy=policy, reward=0.0, epoch=epoch, diverged=True)
    if not np.isfinite(reward):
        return RewardRecord(policy=policy, reward=0.0, epoch=epoch, diverged=True)
    return RewardRecord(policy=policy, reward=float(reward), epoch=epoch)


def read_search_log(path: Path | str) -> list[RewardRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(RewardRecord.from_json(line))
    return records


def top_k_policies(records: list[RewardRecord], k: int) -> list[Policy]:
    """The k highest-reward policies (stable: earlier epochs win ties)."""
    ranked = sorted(records, key=lambda r: (-r.reward, r.epoch))
    return [r.policy for r in ranked[:k]]


def search(space: SearchSpace, child_factory, budget: int, rng: np.random.Generator,
           learning_rate: float = 0.4, top_k: int = 5,
           log_path: Path | str | None = None,
           resume: Path | str | None = None,
           train_set: list[AnnotatedImage] | None = None,
           val_set: list[AnnotatedImage] | None = None):
    """Run ``budget`` rounds of sample -> evaluate -> update.

    Returns (top_policies, records, controller_state). With ``resume``, the
    controller is rebuilt by replaying the logged records and only the
    remaining rounds run (the rng stream restarts, so a resumed run is
    reproducible by itself but not byte-identical to an uninterrupted one).
    """
    if budget < 1:
        raise SignforgeError(f"search budget must be >= 1, got {budget}")
    state = ControllerState.initial(space)
    records: list[RewardRecord] = []
    if resume is not None:
        for record in read_search_log(resume):
            state = controller_update(state, [record], learning_rate)
            records.append(record)

    log_handle = None
    if log_path is not None:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        mode = "a" if resume is not None and Path(log_path) == Path(resume) else "w"
        log_handle = open(log_path, mode, encoding="utf-8")
        if mode == "w":
            for record in records:
                log_handle.write(record.to_json() + "\n")
    try:
        for epoch in range(len(records), budget):
            policy = sample_policy(state, rng)
            record = evaluate_policy(policy, child_factory(), train_set, val_set, epoch=epoch)
            state = controller_update(state, [record], learning_rate)
            records.append(record)
            if log_handle is not None:
                log_handle.write(record.to_json() + "\n")
                log_handle.flush()
    finally:
        if log_handle is not None:
            log_handle.close()
    return top_k_policies(records, top_k), records, state


class PolicySearch(BaseEstimator):
    """Estimator facade over the search loop.

    ``fit(train_images, val_images)`` runs the configured budget and exposes
    ``best_policies_``, ``records_`` and ``controller_``.
    """

    def __init__(self, budget: int = 50, learning_rate: float = 0.4, top_k: int = 5,
                 seed: int = 0, extensions: bool = True, child_factory=None,
                 log_path: str | None = None, resume: str | None = None):
        self.budget = budget
        self.learning_rate = learning_rate
        self.top_k = top_k
        self.seed = seed
        self.extensions = extensions
        self.child_factory = child_factory
        self.log_path = log_path
        self.resume = resume

    def fit(self, train_images: list[AnnotatedImage], val_images: list[AnnotatedImage]):
        space = SearchSpace() if self.extensions else SearchSpace.base()
        factory = self.child_factory or (lambda: ClassificationChild(seed=self.seed))
        rng = np.random.default_rng(self.seed)
        self.best_policies_, self.records_, self.controller_ = search(
            space, factory, self.budget, rng,
            learning_rate=self.learning_rate, top_k=self.top_k,
            log_path=self.log_path, resume=self.resume,
            train_set=train_images, val_set=val_images,
        )
        return self
