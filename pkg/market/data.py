"""Loading, cleaning, labelling and splitting of daily OHLCV data."""
from __future__ import annotations

import io
import logging
import math
from pathlib import Path
from typing import IO, Sequence, Union

import numpy as np
import pandas as pd
import requests

from core.exceptions import (
    ConstantSeriesError,
    DataError,
    FetchError,
    InsufficientDataError,
)
from market.series import (
    CSV_HEADER,
    PRICE_COLUMNS,
    Alphabet,
    LabeledFrame,
    PriceSeries,
    ReturnSeries,
    ScalingMetadata,
    SignalSeries,
)

logger = logging.getLogger(__name__)

MISSING_TOKENS = {"", "null", "nan", "na", "n/a", "none"}

CSV_CONTENT_TYPES = ("text/csv", "text/plain", "application/csv",
                     "application/octet-stream")

Source = Union[str, Path, IO[bytes], IO[str]]


def _parse_number(token: str, column: str, row: int) -> float:
    if token.strip().lower() in MISSING_TOKENS:
        return math.nan
    try:
        return float(token)
    except ValueError:
        raise DataError(
            f"non-numeric {column} value {token!r}", row=row
        ) from None


def load_csv(source: Source) -> PriceSeries:
    """
    Read ``Date,Open,High,Low,Close,Adj Close,Volume`` rows.

    Missing values stay as NaN for ``clean`` to drop. Row numbers in errors
    count data rows from 1 (the header is row 0).
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.is_file():
            raise DataError(f"price file not found: {path}")
        source = path

    try:
        raw = pd.read_csv(
            source, dtype=str, keep_default_na=False, skipinitialspace=True
        )
    except pd.errors.EmptyDataError:
        raise DataError("no data rows") from None
    missing = [name for name in CSV_HEADER if name not in raw.columns]
    if missing:
        raise DataError(f"header lacks columns {missing}")
    if raw.empty:
        raise DataError("no data rows")

    dates = pd.to_datetime(raw["Date"], format="ISO8601", errors="coerce")
    records = []
    for position, day in enumerate(dates):
        row_number = position + 1
        if pd.isna(day):
            raise DataError(
                f"unparseable date {raw['Date'].iat[position]!r}",
                row=row_number,
            )
        values = [
            _parse_number(raw[header].iat[position], column, row_number)
            for header, column in zip(CSV_HEADER[1:], PRICE_COLUMNS)
        ]
        if values[-1] < 0:
            raise DataError("negative volume", row=row_number)
        records.append(values)

    frame = pd.DataFrame(
        records, columns=list(PRICE_COLUMNS), index=pd.DatetimeIndex(dates)
    )
    duplicated = frame.index.duplicated(keep="first")
    if duplicated.any():
        first = int(np.flatnonzero(duplicated)[0]) + 1
        raise DataError(
            f"duplicate date {frame.index[first - 1].date()}", row=first
        )
    if not frame.index.is_monotonic_increasing:
        logger.info("Sorting %d bars by date", len(frame))
        frame = frame.sort_index()

    series = PriceSeries(frame)
    inconsistent = sum(
        1 for bar in series.bars
        if not any(map(math.isnan, (bar.open, bar.high, bar.low, bar.close)))
        and not bar.is_consistent
    )
    if inconsistent:
        logger.warning(
            "%d bars fall outside their own high-low envelope", inconsistent
        )
    return series


def fetch_remote(url: str, timeout: float = 30) -> bytes:
    """Download a CSV export over plain HTTP(S) GET."""
    logger.info("Fetching prices from %s", url)
    try:
        response = requests.get(url, timeout=timeout)
    except requests.RequestException as exc:
        raise FetchError(f"network failure: {exc}", url) from exc

    if response.status_code != 200:
        raise FetchError(f"unexpected status {response.status_code}", url)

    content_type = response.headers.get("Content-Type", "").split(";")[0]
    first_line = response.content.lstrip(b"\xef\xbb\xbf").split(b"\n", 1)[0]
    if (
        content_type.strip().lower() not in CSV_CONTENT_TYPES
        and not first_line.startswith(b"Date,")
    ):
        raise FetchError(f"payload is not CSV ({content_type})", url)
    return response.content


def load_source(source: str, timeout: float = 30) -> PriceSeries:
    if source.startswith(("http://", "https://")):
        return load_csv(io.BytesIO(fetch_remote(source, timeout=timeout)))
    return load_csv(source)


def clean(series: PriceSeries) -> PriceSeries:
    """Drop every bar with a missing or non-finite field."""
    frame = series.frame
    complete = np.isfinite(frame.to_numpy(dtype=float)).all(axis=1)
    dropped = int((~complete).sum())
    if dropped:
        logger.info("Dropping %d incomplete bars", dropped)
    if complete.sum() < 2:
        raise InsufficientDataError("insufficient data after cleaning")
    return PriceSeries(frame.loc[complete])


def _closes(series: PriceSeries) -> np.ndarray:
    closes = series.close.to_numpy(dtype=float)
    if len(closes) < 2:
        raise InsufficientDataError("returns need at least two closes")
    if (closes <= 0).any():
        raise DataError("non-positive close price")
    return closes


def log_returns(series: PriceSeries) -> ReturnSeries:
    closes = _closes(series)
    return ReturnSeries(series.dates[1:], np.diff(np.log(closes)))


def simple_returns(series: PriceSeries) -> ReturnSeries:
    closes = _closes(series)
    return ReturnSeries(series.dates[1:], closes[1:] / closes[:-1] - 1.0)


def make_signal(
    returns: ReturnSeries, alphabet: Alphabet = Alphabet.BINARY
) -> SignalSeries:
    """Signal at t is the high code iff the return at t+1 is positive."""
    if len(returns) == 0:
        raise InsufficientDataError("no returns to label")
    following = returns.values[1:]
    values = np.where(following > 0, alphabet.high, alphabet.low)
    return SignalSeries(returns.dates[:-1], values, alphabet)


def chrono_split(
    frame: LabeledFrame, train_fraction: float
) -> tuple[LabeledFrame, LabeledFrame]:
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    cut = math.floor(len(frame) * train_fraction)
    if cut == 0 or cut == len(frame):
        raise InsufficientDataError(
            f"split of {len(frame)} rows at {train_fraction} leaves a side empty"
        )
    return frame.take(np.arange(cut)), frame.take(np.arange(cut, len(frame)))


def fit_minmax(frame: LabeledFrame, columns: Sequence[str]) -> ScalingMetadata:
    bounds = {}
    for column in columns:
        values = frame.column(column)
        low, high = float(values.min()), float(values.max())
        if not high > low:
            raise ConstantSeriesError(f"column {column!r} is constant")
        bounds[column] = (low, high)
    return ScalingMetadata(bounds)


def apply_minmax(frame: LabeledFrame, metadata: ScalingMetadata) -> LabeledFrame:
    scaled = frame.with_features({
        column: metadata.transform(column, frame.column(column))
        for column in metadata.bounds
    })
    return scaled.replace(scaling=metadata)


def minmax_scale(
    train: LabeledFrame, test: LabeledFrame, columns: Sequence[str]
) -> tuple[LabeledFrame, LabeledFrame, ScalingMetadata]:
    """Scale ``columns`` to [0, 1] using training-row extrema only."""
    metadata = fit_minmax(train, columns)
    return apply_minmax(train, metadata), apply_minmax(test, metadata), metadata
