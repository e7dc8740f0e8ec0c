"""Strategy simulation and performance metrics for daily signals."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import pandas as pd

from core.exceptions import (
    AlignmentError,
    ConstantSeriesError,
    InsufficientDataError,
)
from market.indicators import sma
from market.series import Alphabet, LabeledFrame, ReturnSeries, SignalSeries

logger = logging.getLogger(__name__)

TRADING_DAYS = 252


class StrategyKind(str, enum.Enum):
    BUY_AND_HOLD = "buy_and_hold"
    ONLY_LONG = "only_long"
    LONG_SHORT = "long_short"

    def positions(self, signals: SignalSeries) -> np.ndarray:
        if self is StrategyKind.BUY_AND_HOLD:
            return np.ones(len(signals), dtype=int)
        high = signals.is_high
        if self is StrategyKind.ONLY_LONG:
            return np.where(high, 1, 0)
        return np.where(high, 1, -1)


@dataclass(frozen=True, eq=False)
class EquityCurve:
    """
    ``dates`` are the days the returns are earned; ``positions[i]`` was set
    from the signal of the previous trading day.
    """

    dates: pd.DatetimeIndex
    positions: np.ndarray
    daily_returns: np.ndarray
    kind: Optional[StrategyKind] = None

    def __post_init__(self):
        object.__setattr__(self, "dates", pd.DatetimeIndex(self.dates))
        object.__setattr__(
            self, "positions", np.asarray(self.positions, dtype=int)
        )
        object.__setattr__(
            self, "daily_returns", np.asarray(self.daily_returns, dtype=float)
        )
        if not (
            len(self.dates) == len(self.positions) == len(self.daily_returns)
        ):
            raise AlignmentError("equity curve columns differ in length")

    def __len__(self) -> int:
        return len(self.daily_returns)

    @property
    def cumulative(self) -> np.ndarray:
        return np.expm1(np.cumsum(self.daily_returns))

    @property
    def wealth(self) -> np.ndarray:
        return np.exp(np.cumsum(self.daily_returns))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            {
                "position": self.positions,
                "daily_return": self.daily_returns,
                "cumulative": self.cumulative,
            },
            index=self.dates.strftime("%Y-%m-%d"),
        )
        frame.index.name = "date"
        return frame


@dataclass(frozen=True)
class PerformanceReport:
    sharpe_ratio: Optional[float]
    profit_factor: float
    max_drawdown: float
    monthly_returns: dict[str, float] = field(default_factory=dict)
    max_profit: Optional[float] = None
    total_return: float = 0.0


def cross_signal(close, fast: int = 15, slow: int = 60) -> SignalSeries:
    """
    1 on days the fast SMA is strictly above the slow SMA, else 0. The
    position takes effect on the following bar through ``simulate``.
    """
    prices = close if isinstance(close, pd.Series) else pd.Series(close)
    if fast < 1 or slow < 1:
        raise ValueError("SMA windows must be >= 1")
    if len(prices) <= max(fast, slow):
        raise InsufficientDataError(
            f"cross signal needs more than {max(fast, slow)} closes"
        )
    fast_line = sma(prices, fast).to_series()
    slow_line = sma(prices, slow).to_series()
    start = max(fast, slow) - 1
    above = (fast_line > slow_line).to_numpy()[start:]
    return SignalSeries(prices.index[start:], above.astype(int))


class CrossSignalModel:
    """Moving-average crossover read off the full close history."""

    name = "cross_signal"

    def __init__(self, history: pd.Series, fast: int = 15, slow: int = 60):
        self.history = history
        self.fast = fast
        self.slow = slow

    def fit(self, train: LabeledFrame) -> CrossSignalModel:
        return self

    def to_dict(self) -> dict:
        return {"fast": self.fast, "slow": self.slow}

    def predict(self, frame: LabeledFrame) -> SignalSeries:
        signals = cross_signal(self.history, self.fast, self.slow).to_series()
        aligned = signals.reindex(frame.dates)
        if aligned.isna().any():
            raise AlignmentError("crossover is undefined on some frame dates")
        return SignalSeries(frame.dates, aligned.to_numpy(dtype=int))


def simulate(
    signals: SignalSeries,
    returns: ReturnSeries,
    kind: Union[StrategyKind, str],
) -> EquityCurve:
    """
    Each signal dated d earns the first return dated after d:
    strategy_return = position * return.
    """
    kind = StrategyKind(kind)
    if not len(signals):
        raise AlignmentError("no signals to simulate")
    following = returns.dates.searchsorted(signals.dates, side="right")
    if following.max() >= len(returns):
        raise AlignmentError(
            "the last signal has no following return to earn"
        )
    if len(np.unique(following)) != len(following):
        raise AlignmentError("several signals map onto the same return day")
    positions = kind.positions(signals)
    earned = returns.values[following]
    return EquityCurve(
        returns.dates[following], positions, positions * earned, kind
    )


def _values(curve) -> np.ndarray:
    if isinstance(curve, EquityCurve):
        return curve.daily_returns
    return np.asarray(curve, dtype=float)


def sharpe(curve) -> float:
    """Annualized mean/std of daily returns, zero risk-free rate."""
    daily = _values(curve)
    if len(daily) < 2:
        raise InsufficientDataError("Sharpe ratio needs at least 2 returns")
    spread = float(np.std(daily, ddof=1))
    if spread == 0 or not np.isfinite(spread):
        raise ConstantSeriesError("returns have zero variance")
    return float(np.mean(daily) / spread * math.sqrt(TRADING_DAYS))


def profit_factor(curve) -> float:
    """Sum of gains over absolute sum of losses; inf without losses."""
    daily = _values(curve)
    gains = float(daily[daily > 0].sum())
    losses = float(-daily[daily < 0].sum())
    if losses == 0:
        return math.inf if gains > 0 else math.nan
    return gains / losses


def max_drawdown(values) -> tuple[float, np.ndarray]:
    """
    Largest fall from a running peak. An EquityCurve is measured on its
    wealth path exp(cumsum(returns)) starting from wealth 1.0;
    anything else is taken as levels.
    """
    start = 0
    if isinstance(values, EquityCurve):
        levels = np.r_[1.0, values.wealth]
        start = 1
    else:
        levels = np.asarray(values, dtype=float)
    if len(levels) == start:
        raise InsufficientDataError("drawdown of an empty series")
    drawdown = (levels / np.maximum.accumulate(levels) - 1.0)[start:]
    return float(drawdown.min()), drawdown


def monthly_returns(curve: EquityCurve) -> dict[str, float]:
    grouped = (
        pd.Series(curve.daily_returns, index=curve.dates)
        .groupby(curve.dates.strftime("%Y-%m"))
        .sum()
    )
    return {month: float(np.expm1(total)) for month, total in grouped.items()}


def max_profit(curve: EquityCurve) -> Optional[float]:
    """Best calendar-month return."""
    months = monthly_returns(curve)
    return max(months.values()) if months else None


def total_return(curve: EquityCurve) -> float:
    return float(np.expm1(curve.daily_returns.sum()))


def performance(curve: EquityCurve) -> PerformanceReport:
    try:
        ratio = sharpe(curve)
    except (ConstantSeriesError, InsufficientDataError) as exc:
        logger.warning("Sharpe ratio undefined: %s", exc)
        ratio = None
    return PerformanceReport(
        sharpe_ratio=ratio,
        profit_factor=profit_factor(curve),
        max_drawdown=max_drawdown(curve)[0],
        monthly_returns=monthly_returns(curve),
        max_profit=max_profit(curve),
        total_return=total_return(curve),
    )