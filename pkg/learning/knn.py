"""k-nearest-neighbour direction classifier (exact brute-force scan)."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from core.exceptions import InsufficientDataError
from learning.base import ScaledFeaturesMixin, scaling_bounds
from market.series import Alphabet, LabeledFrame, SignalSeries

logger = logging.getLogger(__name__)

METRICS = {"manhattan": "cityblock", "euclidean": "euclidean"}
WEIGHTINGS = ("distance", "uniform")


@dataclass(frozen=True)
class KnnConfig:
    k: int = 5
    distance: str = "manhattan"
    weighting: str = "distance"
    # accepted for parity with tree-indexed implementations; the scan is exact
    leaf_size: int = 15

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.distance not in METRICS:
            raise ValueError(f"distance must be one of {tuple(METRICS)}")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"weighting must be one of {WEIGHTINGS}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class KnnPrediction:
    signals: SignalSeries
    # per-row summed weights for class 0 and class 1
    scores: np.ndarray


def neighbour_weights(distances: np.ndarray, weighting: str) -> np.ndarray:
    """1/d per neighbour; rows with an exact match give it all the weight."""
    if weighting == "uniform":
        return np.ones_like(distances)
    exact = distances == 0
    with np.errstate(divide="ignore"):
        weights = 1.0 / distances
    return np.where(exact.any(axis=1, keepdims=True), exact.astype(float), weights)


def knn_predict(
    train: LabeledFrame, test: LabeledFrame, config: Optional[KnnConfig] = None
) -> KnnPrediction:
    config = config or KnnConfig()
    if len(train) == 0:
        raise InsufficientDataError("kNN needs a non-empty training set")
    if config.k > len(train):
        raise ValueError(f"k={config.k} exceeds {len(train)} training rows")

    labels = train.y.astype(int)
    distances = cdist(test.X, train.X, metric=METRICS[config.distance])
    nearest = np.argsort(distances, axis=1, kind="stable")[:, : config.k]
    nearest_distances = np.take_along_axis(distances, nearest, axis=1)
    weights = neighbour_weights(nearest_distances, config.weighting)
    neighbour_labels = labels[nearest]

    scores = np.column_stack(
        [(weights * (neighbour_labels == c)).sum(axis=1) for c in (0, 1)]
    )
    values = np.where(scores[:, 1] > scores[:, 0], 1, 0)
    return KnnPrediction(
        SignalSeries(test.dates, values, Alphabet.BINARY), scores
    )


class KnnModel(ScaledFeaturesMixin):
    name = "knn"

    def __init__(self, config: Optional[KnnConfig] = None):
        self.config = config or KnnConfig()
        self.train_: Optional[LabeledFrame] = None

    def fit(self, train: LabeledFrame) -> KnnModel:
        self.train_ = self._scale_fit(train)
        return self

    def predict(self, frame: LabeledFrame) -> SignalSeries:
        return knn_predict(self.train_, self._scale(frame), self.config).signals

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "scaling": scaling_bounds(self.scaling_),
            "training_rows": 0 if self.train_ is None else len(self.train_),
            "training_dates": (
                []
                if self.train_ is None
                else [
                    self.train_.dates[0].strftime("%Y-%m-%d"),
                    self.train_.dates[-1].strftime("%Y-%m-%d"),
                ]
            ),
        }
