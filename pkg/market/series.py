"""Immutable containers for prices, returns, signals and feature frames."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Iterator, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

PRICE_COLUMNS = ("open", "high", "low", "close", "adj_close", "volume")

CSV_HEADER = ("Date", "Open", "High", "Low", "Close", "Adj Close", "Volume")


def _frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.flags.writeable = False
    return array


class Alphabet(enum.Enum):
    BINARY = (0, 1)
    DIRECTIONAL = (-1, 1)

    @property
    def low(self) -> int:
        return self.value[0]

    @property
    def high(self) -> int:
        return self.value[1]


@dataclass(frozen=True)
class PriceBar:
    date: date
    open: float
    high: float
    low: float
    close: float
    adj_close: float
    volume: float

    @property
    def is_consistent(self) -> bool:
        body_low, body_high = sorted((self.open, self.close))
        return (
            self.low <= body_low <= body_high <= self.high
            and self.volume >= 0
        )


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Date-ordered OHLCV bars held in a DataFrame indexed by date."""

    frame: pd.DataFrame

    def __post_init__(self):
        frame = self.frame.loc[:, list(PRICE_COLUMNS)].astype(float).copy()
        frame.index = pd.DatetimeIndex(frame.index, name="date")
        object.__setattr__(self, "frame", frame)

    def __len__(self) -> int:
        return len(self.frame)

    def __iter__(self) -> Iterator[PriceBar]:
        return iter(self.bars)

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.frame.index

    @property
    def close(self) -> pd.Series:
        return self.frame["close"]

    @property
    def high(self) -> pd.Series:
        return self.frame["high"]

    @property
    def low(self) -> pd.Series:
        return self.frame["low"]

    @property
    def bars(self) -> list[PriceBar]:
        return [
            PriceBar(day.date(), *row)
            for day, row in zip(
                self.frame.index, self.frame.itertuples(index=False)
            )
        ]

    def to_csv_frame(self) -> pd.DataFrame:
        frame = self.frame.copy()
        frame.index = frame.index.strftime("%Y-%m-%d")
        frame.index.name = CSV_HEADER[0]
        frame.columns = list(CSV_HEADER[1:])
        return frame


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    dates: pd.DatetimeIndex
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", pd.DatetimeIndex(self.dates))
        object.__setattr__(self, "values", _frozen_array(self.values))
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values differ in length")

    def __len__(self) -> int:
        return len(self.values)

    def to_series(self) -> pd.Series:
        return pd.Series(self.values, index=self.dates, name="return")


@dataclass(frozen=True, eq=False)
class SignalSeries:
    dates: pd.DatetimeIndex
    values: np.ndarray
    alphabet: Alphabet = Alphabet.BINARY

    def __post_init__(self):
        object.__setattr__(self, "dates", pd.DatetimeIndex(self.dates))
        object.__setattr__(self, "values", _frozen_array(self.values, int))
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values differ in length")
        if not np.isin(self.values, self.alphabet.value).all():
            raise ValueError(
                f"signal values outside alphabet {self.alphabet.value}"
            )

    def __len__(self) -> int:
        return len(self.values)

    @property
    def is_high(self) -> np.ndarray:
        return self.values == self.alphabet.high

    def recode(self, alphabet: Alphabet) -> SignalSeries:
        values = np.where(self.is_high, alphabet.high, alphabet.low)
        return SignalSeries(self.dates, values, alphabet)

    def to_series(self) -> pd.Series:
        return pd.Series(self.values, index=self.dates, name="signal")


@dataclass(frozen=True)
class ScalingMetadata:
    """Per-column (min, max) fitted on training rows."""

    bounds: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def transform(self, column: str, values) -> np.ndarray:
        low, high = self.bounds[column]
        return (np.asarray(values, dtype=float) - low) / (high - low)

    def invert(self, column: str, values) -> np.ndarray:
        low, high = self.bounds[column]
        return np.asarray(values, dtype=float) * (high - low) + low


@dataclass(frozen=True, eq=False)
class LabeledFrame:
    """
    Date-aligned feature matrix with a label column.

    ``data`` may carry reference columns beyond ``features`` and ``label``
    (close, next close, realized next-day return); models pick the ones
    they need.
    """

    data: pd.DataFrame
    features: tuple[str, ...]
    label: Optional[str] = None
    scaling: Optional[ScalingMetadata] = None

    def __post_init__(self):
        data = self.data.copy()
        data.index = pd.DatetimeIndex(data.index, name="date")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "features", tuple(self.features))
        missing = [
            column
            for column in (*self.features, self.label)
            if column is not None and column not in data.columns
        ]
        if missing:
            raise KeyError(f"frame lacks columns {missing}")

    def __len__(self) -> int:
        return len(self.data)

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.data.index

    @property
    def X(self) -> np.ndarray:
        return self.data.loc[:, list(self.features)].to_numpy(dtype=float)

    @property
    def y(self) -> np.ndarray:
        return self.data[self.label].to_numpy()

    def column(self, name: str) -> np.ndarray:
        return self.data[name].to_numpy(dtype=float)

    def take(self, positions: Sequence[int] | np.ndarray) -> LabeledFrame:
        return self.replace(data=self.data.iloc[np.asarray(positions)])

    def replace(self, **changes) -> LabeledFrame:
        values = {
            "data": self.data,
            "features": self.features,
            "label": self.label,
            "scaling": self.scaling,
        }
        values.update(changes)
        return LabeledFrame(**values)

    def with_features(self, columns: Mapping[str, Iterable]) -> LabeledFrame:
        data = self.data.copy()
        for name, values in columns.items():
            data[name] = np.asarray(values, dtype=float)
        return self.replace(data=data)

    @classmethod
    def concat(cls, parts: Sequence[LabeledFrame]) -> LabeledFrame:
        first = parts[0]
        return first.replace(data=pd.concat([part.data for part in parts]))
