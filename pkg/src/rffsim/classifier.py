"""k-nearest-neighbor classification of the 2-D fingerprint feature.

Distances are plain Euclidean: both feature coordinates are the real and
imaginary parts of the same polynomial coefficient, so no standardization
is applied.  Ties in distance are broken by training-set insertion order so
every decision is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LabeledFeature:
    x: float
    y: float
    label: str


def _vote(neighbor_labels) -> object:
    counts: dict = {}
    for lab in neighbor_labels:
        counts[lab] = counts.get(lab, 0) + 1
    best = None
    best_count = -1
    for lab in neighbor_labels:  # nearest-first order breaks vote ties
        if counts[lab] > best_count:
            best, best_count = lab, counts[lab]
    return best


def knn_classify(train, query, k: int):
    """Majority label among the k nearest training features."""
    train = list(train)
    if not train:
        raise ValueError("empty training set")
    if not 1 <= k <= len(train):
        raise ValueError(f"k={k} must be in 1..{len(train)}")
    xy = np.array([[f.x, f.y] for f in train])
    q = np.asarray(query, dtype=float)
    d2 = np.sum((xy - q) ** 2, axis=1)
    order = np.argsort(d2, kind="stable")[:k]
    return _vote([train[i].label for i in order])


def evaluate_split(features_by_label, k: int, split_seed) -> float:
    """Train/test a k-NN on a per-class half/half random split.

    features_by_label maps label -> (n, 2) array; every class must have the
    same sample count.  One seeded permutation of the sample indices is
    applied to every class (so relabeling classes cannot change the split);
    the first half trains, the second half tests.  Returns the fraction of
    correct test decisions.
    """
    labels = sorted(features_by_label)
    if not labels:
        raise ValueError("no classes given")
    arrays = {lab: np.asarray(features_by_label[lab], dtype=float)
              for lab in labels}
    counts = {lab: arr.shape[0] for lab, arr in arrays.items()}
    n = counts[labels[0]]
    if any(c != n for c in counts.values()):
        raise ValueError(f"class sample counts differ: {counts}")
    if n < 2:
        raise ValueError("need at least 2 samples per class to split")
    perm = np.random.default_rng(split_seed).permutation(n)
    half = n // 2
    train_xy, train_lab, test_xy, test_lab = [], [], [], []
    for lab in labels:
        train_xy.append(arrays[lab][perm[:half]])
        train_lab.extend([lab] * half)
        test_xy.append(arrays[lab][perm[half:]])
        test_lab.extend([lab] * (n - half))
    train_xy = np.concatenate(train_xy)
    test_xy = np.concatenate(test_xy)
    if not 1 <= k <= len(train_lab):
        raise ValueError(f"k={k} must be in 1..{len(train_lab)}")
    d2 = np.sum((test_xy[:, None, :] - train_xy[None, :, :]) ** 2, axis=2)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    correct = 0
    for row, truth in zip(order, test_lab):
        if _vote([train_lab[i] for i in row]) == truth:
            correct += 1
    return correct / len(test_lab)
