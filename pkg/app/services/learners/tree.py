"""
CART decision tree (Gini impurity, axis-aligned threshold splits).
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from app.models.models import LearnerKind
from app.schemas.learner_schemas import DecisionTreeConfig
from app.services.learners.base import check_width

LEAF = -1


@dataclass(frozen=True)
class TreeNode:
    feature: int
    threshold: float
    left: int
    right: int
    value: int
    n_samples: int
    n_positive: int

    @property
    def is_leaf(self) -> bool:
        return self.feature == LEAF


@dataclass(frozen=True)
class DecisionTreeModel:
    nodes: Tuple[TreeNode, ...]
    n_features: int
    kind: LearnerKind = field(default=LearnerKind.DECISION_TREE)

    @property
    def depth(self) -> int:
        def _depth(i: int) -> int:
            node = self.nodes[i]
            if node.is_leaf:
                return 0
            return 1 + max(_depth(node.left), _depth(node.right))

        return _depth(0)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Index of the leaf each row lands in."""
        X = check_width(X, self.n_features)
        out = np.empty(X.shape[0], dtype=np.int64)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            idx, rows = stack.pop()
            node = self.nodes[idx]
            if node.is_leaf:
                out[rows] = idx
                continue
            go_left = X[rows, node.feature] <= node.threshold
            stack.append((node.left, rows[go_left]))
            stack.append((node.right, rows[~go_left]))
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Positive-label frequency among the training rows of each row's leaf."""
        positive = np.array([n.n_positive / n.n_samples for n in self.nodes])
        return positive[self.apply(X)]

    def predict(self, X: np.ndarray) -> np.ndarray:
        values = np.array([n.value for n in self.nodes], dtype=np.int64)
        return values[self.apply(X)]


def _majority(y: np.ndarray) -> int:
    # ties go to label 0
    return int(2 * int(y.sum()) > y.size)


def _best_split(
    X: np.ndarray, y: np.ndarray, min_leaf: int
) -> Optional[Tuple[int, float]]:
    """
    Lowest weighted Gini impurity split.

    Ties are broken by lowest feature index, then lowest threshold.
    """
    m = y.size
    total_pos = int(y.sum())
    best: Optional[Tuple[float, int, float]] = None

    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        pos_left = np.cumsum(y[order])[:-1].astype(float)
        n_left = np.arange(1, m, dtype=float)
        n_right = m - n_left
        pos_right = total_pos - pos_left

        valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
        if not valid.any():
            continue

        impurity = (
            2 * pos_left * (n_left - pos_left) / n_left
            + 2 * pos_right * (n_right - pos_right) / n_right
        )
        impurity = np.where(valid, impurity, np.inf)
        i = int(np.argmin(impurity))
        if best is None or impurity[i] < best[0]:
            best = (float(impurity[i]), j, float((xs[i] + xs[i + 1]) / 2))

    if best is None:
        return None
    return best[1], best[2]


def fit_tree(config: DecisionTreeConfig, X: np.ndarray, y: np.ndarray) -> DecisionTreeModel:
    nodes: List[Optional[TreeNode]] = []

    def grow(rows: np.ndarray, depth: int) -> int:
        idx = len(nodes)
        nodes.append(None)
        y_node = y[rows]
        value = _majority(y_node)
        pos = int(y_node.sum())

        split = None
        if (
            depth < config.max_depth
            and 0 < pos < rows.size
            and rows.size >= 2 * config.min_samples_leaf
        ):
            split = _best_split(X[rows], y_node, config.min_samples_leaf)

        if split is None:
            nodes[idx] = TreeNode(LEAF, 0.0, LEAF, LEAF, value, rows.size, pos)
            return idx

        feature, threshold = split
        go_left = X[rows, feature] <= threshold
        left = grow(rows[go_left], depth + 1)
        right = grow(rows[~go_left], depth + 1)
        nodes[idx] = TreeNode(feature, threshold, left, right, value, rows.size, pos)
        return idx

    grow(np.arange(X.shape[0]), 0)
    return DecisionTreeModel(nodes=tuple(n for n in nodes if n is not None), n_features=X.shape[1])
