"""Child models that turn a candidate policy into a reward.

The default child is a small convolutional classifier over sign ROI crops:
fast enough to evaluate thousands of policies at desk scale. A detection
child (full toy detector, reward = mean of precision and recall) is
available but much slower, so it is off by default.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np
import torch
from PIL import Image
from sklearn.base import BaseEstimator
from torch import nn

from ..errors import SignforgeError
from ..images import AnnotatedImage
from ..ops import apply_subpolicy
from ..policy import Policy


class ChildDivergence(SignforgeError):
    """The child model produced a non-finite training loss."""


@runtime_checkable
class ChildTrainer(Protocol):
    """Fresh-per-evaluation trainer: fit on policy-augmented data, then score."""

    def fit(self, train_set: list[AnnotatedImage], policy: Policy) -> "ChildTrainer": ...

    def score(self, val_set: list[AnnotatedImage]) -> float: ...


def extract_roi_crops(images: list[AnnotatedImage], crop_size: int):
    """All box crops resized to crop_size**2, as float arrays plus labels."""
    crops, labels = [], []
    for img in images:
        pixels = img.load_pixels()
        for box in img.boxes:
            patch = Image.fromarray(pixels[box.y_min:box.y_max, box.x_min:box.x_max])
            patch = patch.resize((crop_size, crop_size), Image.BILINEAR)
            crops.append(np.asarray(patch, dtype=np.float32) / 255.0)
            labels.append(box.class_label)
    return crops, labels


class _CropNet(nn.Module):
    def __init__(self, crop_size: int, channels: int, n_classes: int):
        super().__init__()
        self.features = nn.Sequential(
            nn.Conv2d(3, channels, 3, stride=2, padding=1), nn.ReLU(inplace=True),
            nn.Conv2d(channels, channels * 2, 3, stride=2, padding=1), nn.ReLU(inplace=True),
        )
        side = crop_size // 4
        self.classifier = nn.Linear(channels * 2 * side * side, n_classes)

    def forward(self, x):
        return self.classifier(self.features(x).flatten(1))


class ClassificationChild(BaseEstimator):
    """Conv classifier on ROI crops; reward is validation accuracy.

    Each training epoch re-augments every image with one uniformly chosen
    sub-policy of the candidate policy (the train set itself serves as the
    sample-pairing pool), then trains on the crops of the augmented images.
    Validation crops are never augmented.
    """

    def __init__(self, crop_size: int = 16, channels: int = 8, epochs: int = 2,
                 batch_size: int = 32, lr: float = 2e-3, seed: int = 0):
        self.crop_size = crop_size
        self.channels = channels
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed

    def fit(self, train_set: list[AnnotatedImage], policy: Policy) -> "ClassificationChild":
        if not train_set:
            raise SignforgeError("child training set is empty")
        _, labels = extract_roi_crops(train_set, self.crop_size)
        self.classes_ = sorted(set(labels))
        if not self.classes_:
            raise SignforgeError("child training set has no boxes")
        label_index = {label: i for i, label in enumerate(self.classes_)}

        torch.manual_seed(self.seed)
        aug_rng = np.random.default_rng(self.seed)
        batch_rng = np.random.default_rng(self.seed + 1)
        self.model_ = _CropNet(self.crop_size, self.channels, len(self.classes_))
        optimizer = torch.optim.Adam(self.model_.parameters(), lr=self.lr)
        loss_fn = nn.CrossEntropyLoss()

        for _ in range(self.epochs):
            augmented = [
                apply_subpolicy(
                    img,
                    policy.sub_policies[int(aug_rng.integers(0, len(policy.sub_policies)))],
                    aug_rng,
                    pool=train_set,
                )
                for img in train_set
            ]
            crops, crop_labels = extract_roi_crops(augmented, self.crop_size)
            if not crops:
                continue  # every box was dropped by geometric clipping this epoch
            data = torch.from_numpy(np.stack(crops)).permute(0, 3, 1, 2)
            targets = torch.tensor([label_index[l] for l in crop_labels])
            order = batch_rng.permutation(len(crops))
            for start in range(0, len(order), self.batch_size):
                idx = order[start:start + self.batch_size]
                logits = self.model_(data[idx])
                loss = loss_fn(logits, targets[idx])
                if not torch.isfinite(loss):
                    raise ChildDivergence(f"non-finite child loss {float(loss)}")
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
        return self

    def score(self, val_set: list[AnnotatedImage]) -> float:
        crops, labels = extract_roi_crops(val_set, self.crop_size)
        if not crops:
            return 0.0
        data = torch.from_numpy(np.stack(crops)).permute(0, 3, 1, 2)
        self.model_.eval()
        with torch.no_grad():
            predicted = self.model_(data).argmax(dim=1).numpy()
        self.model_.train()
        index = {label: i for i, label in enumerate(self.classes_)}
        truth = np.array([index.get(l, -1) for l in labels])
        return float((predicted == truth).mean())


class DetectionChild(BaseEstimator):
    """Toy-detector child; reward is the mean of micro precision and recall."""

    def __init__(self, epochs: int = 20, seed: int = 0, iou_threshold: float = 0.5,
                 confidence_threshold: float = 0.5, **detector_params):
        self.epochs = epochs
        self.seed = seed
        self.iou_threshold = iou_threshold
        self.confidence_threshold = confidence_threshold
        self.detector_params = detector_params

    def fit(self, train_set: list[AnnotatedImage], policy: Policy) -> "DetectionChild":
        from ..detect import ToyDetector

        rng = np.random.default_rng(self.seed)
        augmented = [
            apply_subpolicy(
                img, policy.sub_policies[int(rng.integers(0, len(policy.sub_policies)))],
                rng, pool=train_set)
            for img in train_set
        ]
        self.detector_ = ToyDetector(epochs=self.epochs, seed=self.seed,
                                     **self.detector_params)
        self.params_ = self.detector_.train(augmented)
        return self

    def score(self, val_set: list[AnnotatedImage]) -> float:
        from ..detect import evaluate_detector

        report = evaluate_detector(self.detector_, self.params_, val_set,
                                   iou_threshold=self.iou_threshold,
                                   confidence_threshold=self.confidence_threshold)
        precision = report.aggregate.precision or 0.0
        recall = report.aggregate.recall or 0.0
        return (precision + recall) / 2.0
