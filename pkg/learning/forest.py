"""Random forest of entropy-split decision trees for up/down labels."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Iterator, Optional

import numpy as np

from core.exceptions import InsufficientDataError
from learning.base import ScaledFeaturesMixin, scaling_bounds
from market.series import Alphabet, LabeledFrame, SignalSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RfConfig:
    n_trees: int = 169
    max_features: int = 2
    max_depth: Optional[int] = 4
    min_samples_split: int = 49
    min_samples_leaf: int = 1
    criterion: str = "entropy"
    seed: int = 42

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_features < 1:
            raise ValueError("max_features must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1 or self.min_samples_split < 2:
            raise ValueError(
                "min_samples_leaf must be >= 1 and min_samples_split >= 2"
            )
        if self.criterion != "entropy":
            raise ValueError("only the entropy criterion is supported")

    def to_dict(self) -> dict:
        return asdict(self)


def entropy(counts) -> float:
    """Shannon entropy in bits of a class-count vector."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=1, keepdims=True)
    p = counts / totals
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return -terms.sum(axis=1)


@dataclass(eq=False)
class Node:
    counts: tuple[int, int]
    depth: int
    feature: Optional[int] = None
    threshold: Optional[float] = None
    gain: float = 0.0
    left: Optional[Node] = None
    right: Optional[Node] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def n_samples(self) -> int:
        return int(sum(self.counts))

    @property
    def prediction(self) -> int:
        return 1 if self.counts[1] > self.counts[0] else 0

    def walk(self) -> Iterator[Node]:
        yield self
        if not self.is_leaf:
            yield from self.left.walk()
            yield from self.right.walk()

    def to_dict(self) -> dict:
        record = {"counts": list(self.counts), "depth": self.depth}
        if not self.is_leaf:
            record.update(
                feature=self.feature,
                threshold=self.threshold,
                gain=self.gain,
                left=self.left.to_dict(),
                right=self.right.to_dict(),
            )
        return record


@dataclass(frozen=True, eq=False)
class Forest:
    trees: tuple[Node, ...]
    features: tuple[str, ...]
    config: RfConfig

    def votes(self, X: np.ndarray) -> np.ndarray:
        """(n_trees, n_rows) matrix of per-tree class predictions."""
        return np.vstack([_predict_tree(tree, X) for tree in self.trees])

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "features": list(self.features),
            "trees": [tree.to_dict() for tree in self.trees],
        }


def _class_counts(y: np.ndarray) -> tuple[int, int]:
    ones = int(y.sum())
    return (len(y) - ones, ones)


def best_split(
    X: np.ndarray, y: np.ndarray, features, min_samples_leaf: int = 1
):
    """
    Exhaustive midpoint search over ``features``.

    Returns (gain, feature, threshold) for the largest positive gain, ties
    going to the smaller threshold, or None when no split improves purity.
    """
    n = len(y)
    parent = entropy(_class_counts(y))
    best = None
    for feature in features:
        order = np.argsort(X[:, feature], kind="stable")
        xs, ys = X[order, feature], y[order]
        cuts = np.flatnonzero(xs[1:] != xs[:-1])
        left_sizes = cuts + 1
        allowed = (left_sizes >= min_samples_leaf) & (
            n - left_sizes >= min_samples_leaf
        )
        cuts, left_sizes = cuts[allowed], left_sizes[allowed]
        if not len(cuts):
            continue
        ones = np.cumsum(ys)[cuts]
        left = np.column_stack([left_sizes - ones, ones])
        right = np.column_stack(
            [n - left_sizes - (ys.sum() - ones), ys.sum() - ones]
        )
        gains = parent - (
            left_sizes / n * _entropy_rows(left)
            + (n - left_sizes) / n * _entropy_rows(right)
        )
        position = int(np.argmax(gains))
        gain = float(gains[position])
        threshold = float((xs[cuts[position]] + xs[cuts[position] + 1]) / 2)
        if best is None or gain > best[0] or (
            gain == best[0] and threshold < best[2]
        ):
            best = (gain, int(feature), threshold)
    if best is None or not best[0] > 0:
        return None
    return best


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    config: RfConfig,
    rng: np.random.Generator,
    depth: int = 0,
) -> Node:
    node = Node(_class_counts(y), depth)
    if (
        (config.max_depth is not None and depth >= config.max_depth)
        or len(y) < config.min_samples_split
        or min(node.counts) == 0
    ):
        return node
    candidates = rng.choice(X.shape[1], config.max_features, replace=False)
    split = best_split(X, y, candidates, config.min_samples_leaf)
    if split is None:
        return node
    node.gain, node.feature, node.threshold = split
    mask = X[:, node.feature] <= node.threshold
    node.left = grow_tree(X[mask], y[mask], config, rng, depth + 1)
    node.right = grow_tree(X[~mask], y[~mask], config, rng, depth + 1)
    return node


def _predict_tree(node: Node, X: np.ndarray) -> np.ndarray:
    out = np.empty(len(X), dtype=int)
    if node.is_leaf:
        out[:] = node.prediction
        return out
    mask = X[:, node.feature] <= node.threshold
    out[mask] = _predict_tree(node.left, X[mask])
    out[~mask] = _predict_tree(node.right, X[~mask])
    return out


def rf_train(train: LabeledFrame, config: Optional[RfConfig] = None) -> Forest:
    config = config or RfConfig()
    X, y = train.X, train.y.astype(int)
    if len(y) < config.min_samples_split:
        raise InsufficientDataError(
            f"random forest needs {config.min_samples_split} rows, "
            f"got {len(y)}"
        )
    if config.max_features > X.shape[1]:
        raise ValueError(
            f"max_features={config.max_features} exceeds {X.shape[1]} features"
        )
    trees = []
    for index in range(config.n_trees):
        rng = np.random.default_rng([config.seed, index])
        sample = rng.integers(0, len(y), len(y))
        trees.append(grow_tree(X[sample], y[sample], config, rng))
    logger.debug("Grew %d trees on %d rows", len(trees), len(y))
    return Forest(tuple(trees), train.features, config)


def rf_predict(forest: Forest, frame: LabeledFrame):
    """Majority vote; returns the signals and the winning class's vote share."""
    votes = forest.votes(frame.X)
    ones = votes.sum(axis=0)
    n_trees = len(forest.trees)
    values = np.where(2 * ones > n_trees, 1, 0)
    fractions = np.where(values == 1, ones, n_trees - ones) / n_trees
    return SignalSeries(frame.dates, values, Alphabet.BINARY), fractions


class ForestModel(ScaledFeaturesMixin):
    name = "rf"

    def __init__(self, config: Optional[RfConfig] = None):
        self.config = config or RfConfig()
        self.forest_: Optional[Forest] = None

    def fit(self, train: LabeledFrame) -> ForestModel:
        self.forest_ = rf_train(self._scale_fit(train), self.config)
        return self

    def predict(self, frame: LabeledFrame) -> SignalSeries:
        signals, _ = rf_predict(self.forest_, self._scale(frame))
        return signals

    def to_dict(self) -> dict:
        return {
            "scaling": scaling_bounds(self.scaling_),
            **(self.forest_.to_dict() if self.forest_ else {}),
        }
