"""CART-style decision tree over sparse TF-IDF vectors.

Splits greedily minimize Gini impurity, thresholds sit at midpoints
between sorted distinct feature values, and every tie is broken
deterministically (feature order across features, first-best threshold
within a feature, lexicographic label order at leaves). Zero-gain splits
are accepted, so on conflict-free data an unbounded tree reaches pure
leaves and zero training error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tfidf import SparseVector


class DegenerateTraining(ValueError):
    """Training input has fewer than two samples or a single class."""


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_samples_leaf: int = 1
    criterion: str = "gini"

    def to_dict(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "criterion": self.criterion,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TreeParams":
        return cls(
            max_depth=data.get("max_depth"),
            min_samples_leaf=data.get("min_samples_leaf", 1),
            criterion=data.get("criterion", "gini"),
        )


@dataclass
class DecisionTree:
    """Flat-array binary tree; node 0 is the root.

    Internal nodes carry (feature, threshold, left, right); leaves carry
    feature == -1 plus their label and class counts.
    """

    features: list[int] = field(default_factory=list)
    thresholds: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    labels: list[str | None] = field(default_factory=list)
    class_counts: list[dict[str, int] | None] = field(default_factory=list)
    params: TreeParams = field(default_factory=TreeParams)

    def predict(self, vec: SparseVector) -> str:
        node = 0
        while self.features[node] != -1:
            value = vec.entries.get(self.features[node], 0.0)
            node = self.left[node] if value <= self.thresholds[node] else self.right[node]
        label = self.labels[node]
        assert label is not None
        return label

    @property
    def n_nodes(self) -> int:
        return len(self.features)

    def max_path_length(self) -> int:
        depths = [0] * self.n_nodes
        deepest = 0
        for node in range(self.n_nodes):
            if self.features[node] != -1:
                for child in (self.left[node], self.right[node]):
                    depths[child] = depths[node] + 1
                    deepest = max(deepest, depths[child])
        return deepest

    def to_dict(self) -> dict:
        return {
            "features": self.features,
            "thresholds": self.thresholds,
            "left": self.left,
            "right": self.right,
            "labels": self.labels,
            "class_counts": self.class_counts,
            "params": self.params.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionTree":
        return cls(
            features=list(data["features"]),
            thresholds=[float(t) for t in data["thresholds"]],
            left=list(data["left"]),
            right=list(data["right"]),
            labels=list(data["labels"]),
            class_counts=[dict(c) if c is not None else None for c in data["class_counts"]],
            params=TreeParams.from_dict(data.get("params", {})),
        )


def _majority_label(counts: np.ndarray, class_names: Sequence[str]) -> str:
    # class_names is sorted, so the first argmax is the lexicographic winner.
    return class_names[int(np.argmax(counts))]


def _best_split_for_feature(
    col: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    min_samples_leaf: int,
    parent_gini: float,
) -> tuple[float, float] | None:
    """Best (gain, threshold) for one feature, or None if no valid split."""
    order = np.argsort(col, kind="mergesort")
    sorted_vals = col[order]
    sorted_y = y[order]
    n = col.shape[0]

    change = np.nonzero(sorted_vals[:-1] != sorted_vals[1:])[0]
    if change.size == 0:
        return None
    sizes_left = change + 1
    valid = (sizes_left >= min_samples_leaf) & (n - sizes_left >= min_samples_leaf)
    if not np.any(valid):
        return None
    change = change[valid]
    sizes_left = sizes_left[valid]

    one_hot = np.zeros((n, n_classes), dtype=np.int64)
    one_hot[np.arange(n), sorted_y] = 1
    cum = np.cumsum(one_hot, axis=0)
    left_counts = cum[change].astype(np.float64)
    total = cum[-1].astype(np.float64)
    right_counts = total - left_counts

    n_left = sizes_left.astype(np.float64)[:, None]
    n_right = n - n_left
    gini_left = 1.0 - np.sum((left_counts / n_left) ** 2, axis=1)
    gini_right = 1.0 - np.sum((right_counts / n_right) ** 2, axis=1)
    child = (n_left.ravel() * gini_left + n_right.ravel() * gini_right) / n
    gains = parent_gini - child

    best = int(np.argmax(gains))  # first occurrence wins on ties
    i = int(change[best])
    threshold = (sorted_vals[i] + sorted_vals[i + 1]) / 2.0
    return float(gains[best]), float(threshold)


def train_tree(
    samples: Sequence[tuple[SparseVector, str]],
    params: TreeParams = TreeParams(),
    *,
    n_features: int | None = None,
) -> DecisionTree:
    """Fit a CART tree on (vector, label) samples.

    The feature space defaults to the highest dimension index seen in the
    samples; dimensions no sample touches are all-zero and can never
    split, so omitting them is harmless.
    """
    if len(samples) < 2:
        raise DegenerateTraining("need at least two samples")
    class_names = sorted({label for _, label in samples})
    if len(class_names) < 2:
        raise DegenerateTraining("need at least two distinct labels")
    if params.criterion != "gini":
        raise ValueError(f"unsupported criterion: {params.criterion}")

    if n_features is None:
        n_features = 1 + max((max(v.entries) for v, _ in samples if v.entries), default=-1)
    n = len(samples)
    X = np.zeros((n, n_features), dtype=np.float64)
    for row, (vec, _) in enumerate(samples):
        for dim, weight in vec.entries.items():
            if dim < n_features:
                X[row, dim] = weight
    class_index = {name: i for i, name in enumerate(class_names)}
    y = np.array([class_index[label] for _, label in samples], dtype=np.int64)
    n_classes = len(class_names)

    tree = DecisionTree(params=params)

    def new_node() -> int:
        tree.features.append(-1)
        tree.thresholds.append(0.0)
        tree.left.append(-1)
        tree.right.append(-1)
        tree.labels.append(None)
        tree.class_counts.append(None)
        return len(tree.features) - 1

    def make_leaf(node: int, idx: np.ndarray) -> None:
        counts = np.bincount(y[idx], minlength=n_classes)
        tree.labels[node] = _majority_label(counts, class_names)
        tree.class_counts[node] = {
            class_names[i]: int(counts[i]) for i in range(n_classes) if counts[i] > 0
        }

    root = new_node()
    stack: list[tuple[int, np.ndarray, int]] = [(root, np.arange(n), 0)]
    msl = params.min_samples_leaf
    while stack:
        node, idx, depth = stack.pop()
        counts = np.bincount(y[idx], minlength=n_classes)
        n_node = idx.size
        pure = int(np.count_nonzero(counts)) <= 1
        depth_capped = params.max_depth is not None and depth >= params.max_depth
        if pure or depth_capped or n_node < 2 * msl:
            make_leaf(node, idx)
            continue

        parent_gini = 1.0 - float(np.sum((counts / n_node) ** 2))
        sub_X = X[idx]
        spans = np.ptp(sub_X, axis=0)
        best_gain = -1.0
        best_feature = -1
        best_threshold = 0.0
        for f in np.nonzero(spans > 0.0)[0]:
            found = _best_split_for_feature(sub_X[:, f], y[idx], n_classes, msl, parent_gini)
            if found is None:
                continue
            gain, threshold = found
            if gain > best_gain:
                best_gain = gain
                best_feature = int(f)
                best_threshold = threshold
        if best_feature < 0:
            make_leaf(node, idx)
            continue

        mask = sub_X[:, best_feature] <= best_threshold
        left_node = new_node()
        right_node = new_node()
        tree.features[node] = best_feature
        tree.thresholds[node] = best_threshold
        tree.left[node] = left_node
        tree.right[node] = right_node
        stack.append((right_node, idx[~mask], depth + 1))
        stack.append((left_node, idx[mask], depth + 1))
    return tree
