"""
Technical indicators and the feature frame built from them.

Every indicator is causal: the value at t only uses observations up to t.
Positions before ``warmup`` are NaN.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
import pandas as pd
from scipy.signal import lfilter

from core.exceptions import DataError, InsufficientDataError
from market.series import LabeledFrame, PriceSeries

logger = logging.getLogger(__name__)

FEATURES = ("rsi", "roc", "macd", "k_percent")

DEFAULT_PERIODS = {
    "rsi": 14,
    "roc": 9,
    "macd_fast": 12,
    "macd_slow": 26,
    "k_percent": 14,
}


@dataclass(frozen=True, eq=False)
class IndicatorSeries:
    dates: pd.Index
    values: np.ndarray
    warmup: int

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def defined(self) -> np.ndarray:
        return self.values[self.warmup:]

    def to_series(self, name: Optional[str] = None) -> pd.Series:
        return pd.Series(self.values, index=self.dates, name=name)


def _as_series(values) -> pd.Series:
    if isinstance(values, pd.Series):
        return values.astype(float)
    return pd.Series(np.asarray(values, dtype=float))


def _require(length: int, needed: int, what: str):
    if length < needed:
        raise InsufficientDataError(
            f"{what} needs at least {needed} values, got {length}"
        )


def sma(series, window: int) -> IndicatorSeries:
    values = _as_series(series)
    if window < 1:
        raise ValueError("window must be at least 1")
    _require(len(values), window, f"SMA({window})")
    averaged = values.rolling(window).mean().to_numpy()
    return IndicatorSeries(values.index, averaged, window - 1)


def ema(series, window: int) -> IndicatorSeries:
    """EMA with k = 2/(n+1), seeded by the SMA of the first ``window`` values."""
    values = _as_series(series)
    if window < 1:
        raise ValueError("window must be at least 1")
    _require(len(values), window, f"EMA({window})")
    raw = values.to_numpy()
    k = 2.0 / (window + 1)
    seed = raw[:window].mean()
    out = np.full(len(raw), np.nan)
    out[window - 1] = seed
    tail = raw[window:]
    if len(tail):
        # ema_t = k x_t + (1 - k) ema_{t-1}
        zi = [(1 - k) * seed]
        out[window:], _ = lfilter([k], [1.0, -(1 - k)], tail, zi=zi)
    return IndicatorSeries(values.index, out, window - 1)


def rsi(close, period: int = 14) -> IndicatorSeries:
    """
    Relative strength index from simple averages of the trailing ``period``
    up and down moves: RSI = 100 - 100 / (1 + avg_up / avg_down).

    avg_down == 0 gives 100 and avg_up == 0 gives 0.
    """
    prices = _as_series(close)
    _require(len(prices), period + 1, f"RSI({period})")
    change = prices.diff()
    avg_up = change.clip(lower=0).rolling(period).sum() / period
    avg_down = (-change).clip(lower=0).rolling(period).sum() / period
    up, down = avg_up.to_numpy(), avg_down.to_numpy()
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 100.0 - 100.0 / (1.0 + up / down)
    out = np.where(down == 0, 100.0, out)
    out = np.where((up == 0) & (down > 0), 0.0, out)
    out[:period] = np.nan
    return IndicatorSeries(prices.index, out, period)


def stochastic_k(series: PriceSeries, period: int = 14) -> IndicatorSeries:
    """%K = 100 (C - L) / (H - L) over the trailing ``period`` bars; 50 when H == L."""
    _require(len(series), period, f"%K({period})")
    highest = series.high.rolling(period).max().to_numpy()
    lowest = series.low.rolling(period).min().to_numpy()
    close = series.close.to_numpy()
    span = highest - lowest
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(span > 0, 100.0 * (close - lowest) / span, 50.0)
    out[: period - 1] = np.nan
    return IndicatorSeries(series.dates, out, period - 1)


def macd(close, fast: int = 12, slow: int = 26) -> IndicatorSeries:
    prices = _as_series(close)
    _require(len(prices), slow + 1, f"MACD({fast},{slow})")
    line = ema(prices, fast).values - ema(prices, slow).values
    return IndicatorSeries(prices.index, line, slow - 1)


def roc(close, period: int = 9) -> IndicatorSeries:
    prices = _as_series(close)
    _require(len(prices), period + 1, f"ROC({period})")
    raw = prices.to_numpy()
    previous = raw[:-period]
    if (previous == 0).any():
        raise DataError(f"zero close {period} periods back")
    out = np.full(len(raw), np.nan)
    out[period:] = 100.0 * (raw[period:] - previous) / previous
    return IndicatorSeries(prices.index, out, period)


def build_features(
    series: PriceSeries, periods: Optional[Mapping[str, int]] = None
) -> LabeledFrame:
    """
    RSI, ROC, MACD and %K per date, labelled with the next day's direction.

    Reference columns carried alongside: ``close``, ``next_close``,
    ``log_return`` (return into t) and ``next_return`` (return into t+1,
    the one the signal label describes).
    """
    periods = {**DEFAULT_PERIODS, **(periods or {})}
    close = series.close
    if (close <= 0).any():
        raise DataError("non-positive close price")

    log_close = np.log(close.to_numpy())
    log_return = np.r_[np.nan, np.diff(log_close)]
    next_return = np.r_[np.diff(log_close), np.nan]

    data = pd.DataFrame(
        {
            "rsi": rsi(close, periods["rsi"]).values,
            "roc": roc(close, periods["roc"]).values,
            "macd": macd(
                close, periods["macd_fast"], periods["macd_slow"]
            ).values,
            "k_percent": stochastic_k(series, periods["k_percent"]).values,
            "close": close.to_numpy(),
            "next_close": close.shift(-1).to_numpy(),
            "log_return": log_return,
            "next_return": next_return,
        },
        index=series.dates,
    )
    data["signal"] = np.where(data["next_return"] > 0, 1, 0)
    data = data.dropna()
    if data.empty:
        raise InsufficientDataError(
            f"no complete feature rows from {len(series)} bars"
        )
    data["signal"] = data["signal"].astype(int)
    logger.debug("Built %d feature rows from %d bars", len(data), len(series))
    return LabeledFrame(data, FEATURES, "signal")
