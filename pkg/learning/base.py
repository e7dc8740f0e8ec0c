from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np
import pandas as pd

from market.data import apply_minmax, fit_minmax
from market.series import Alphabet, LabeledFrame, ScalingMetadata, SignalSeries


@runtime_checkable
class SignalModel(Protocol):
    """Anything that learns from a labelled frame and emits 0/1 signals."""

    name: str

    def fit(self, train: LabeledFrame) -> SignalModel:
        ...

    def predict(self, frame: LabeledFrame) -> SignalSeries:
        ...


class ScaledFeaturesMixin:
    """Min-max scaling of the model's features fitted on training rows."""

    scaling_: ScalingMetadata | None = None

    def _scale_fit(self, train: LabeledFrame) -> LabeledFrame:
        self.scaling_ = fit_minmax(train, train.features)
        return apply_minmax(train, self.scaling_)

    def _scale(self, frame: LabeledFrame) -> LabeledFrame:
        return apply_minmax(frame, self.scaling_)


def price_signals(
    dates: pd.DatetimeIndex, predicted_close, prior_close
) -> SignalSeries:
    """
    1 when the implied log return log(predicted / prior) is positive, else 0.

    Non-positive predicted prices count as a fall.
    """
    predicted = np.asarray(predicted_close, dtype=float)
    prior = np.asarray(prior_close, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        implied = np.where(predicted > 0, np.log(predicted / prior), -np.inf)
    return SignalSeries(dates, np.where(implied > 0, 1, 0), Alphabet.BINARY)


def scaling_bounds(metadata: ScalingMetadata | None) -> dict:
    if metadata is None:
        return {}
    return {column: list(bounds) for column, bounds in metadata.bounds.items()}
