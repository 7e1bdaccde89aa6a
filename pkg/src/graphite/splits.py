"""Transductive train/val/test assignments over labeled graph nodes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import UNLABELED

SPLIT_NAMES = ("none", "train", "val", "test")
NONE, TRAIN, VAL, TEST = range(4)


@dataclass(frozen=True, eq=False)
class SplitSpec:
    """Per-node split code (0 none, 1 train, 2 val, 3 test) plus generator info."""

    assignment: np.ndarray
    ratios: tuple = ()
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def indices(self, which: str) -> np.ndarray:
        return np.flatnonzero(self.assignment == SPLIT_NAMES.index(which))

    @property
    def train(self) -> np.ndarray:
        return self.indices("train")

    @property
    def val(self) -> np.ndarray:
        return self.indices("val")

    @property
    def test(self) -> np.ndarray:
        return self.indices("test")

    def validate(self, labels) -> "SplitSpec":
        labels = np.asarray(labels)
        if self.assignment.shape[0] != labels.shape[0]:
            raise ValueError("split assignment length differs from the node count")
        bad = np.flatnonzero((self.assignment != NONE) & (labels == UNLABELED))
        if bad.size:
            raise ValueError(f"split assigns unlabeled node {bad[0]}")
        return self

    def __eq__(self, other):
        if not isinstance(other, SplitSpec):
            return NotImplemented
        return np.array_equal(self.assignment, other.assignment)

    __hash__ = None  # type: ignore[assignment]


def random_split(labels, ratios=(0.48, 0.32, 0.20), seed: int = 0) -> SplitSpec:
    """Shuffle labeled nodes and cut them into train/val/test by ``ratios``."""
    labels = np.asarray(labels)
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or min(ratios) < 0 or sum(ratios) > 1 + 1e-12:
        raise ValueError(f"ratios must be three non-negative numbers summing to <= 1, got {ratios}")
    labeled = np.flatnonzero(labels != UNLABELED)
    rng = np.random.default_rng(seed)
    order = rng.permutation(labeled)
    n = labeled.size
    n_train = int(round(ratios[0] * n))
    n_val = int(round(ratios[1] * n))
    n_test = min(int(round(ratios[2] * n)), n - n_train - n_val)
    assignment = np.zeros(labels.shape[0], dtype=np.int8)
    assignment[order[:n_train]] = TRAIN
    assignment[order[n_train : n_train + n_val]] = VAL
    assignment[order[n_train + n_val : n_train + n_val + n_test]] = TEST
    return SplitSpec(assignment, ratios, seed)


def from_names(names) -> SplitSpec:
    codes = np.array([SPLIT_NAMES.index(s) for s in names], dtype=np.int8)
    return SplitSpec(codes)
