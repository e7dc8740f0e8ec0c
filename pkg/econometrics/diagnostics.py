"""Pre-modelling analysis of a price history: tables and plot series."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from core.exceptions import OilsignalError
from econometrics.arma_garch import GarchFit, fit_arma_garch
from econometrics.stats import (
    AdfResult,
    DescriptiveSummary,
    JarqueBera,
    LjungBox,
    acf_values,
    adf_test,
    describe,
    jarque_bera,
    ljung_box,
    pacf_values,
    qq_points,
)
from market.data import log_returns
from market.indicators import sma
from market.series import PriceSeries
from trading.backtest import max_drawdown

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Diagnostics:
    close: DescriptiveSummary
    log_return: DescriptiveSummary
    jarque_bera: dict[str, JarqueBera]
    adf: dict[str, AdfResult]
    correlogram: pd.DataFrame
    qq: dict[str, pd.DataFrame]
    drawdown: pd.DataFrame
    overlay: pd.DataFrame
    garch: Optional[GarchFit] = None
    ljung_box: tuple[LjungBox, ...] = ()


def _dated(index: pd.DatetimeIndex, **columns) -> pd.DataFrame:
    frame = pd.DataFrame(columns, index=index.strftime("%Y-%m-%d"))
    frame.index.name = "date"
    return frame


def diagnose(
    prices: PriceSeries,
    max_lag: int = 50,
    ljung_box_lags: Sequence[int] = (10, 20, 30),
    qq_df: float = 5,
    overlay_window: int = 200,
    garch_options: Optional[dict] = None,
) -> Diagnostics:
    closes = prices.close.to_numpy()
    returns = log_returns(prices)
    r = returns.values
    band = 1.96 / np.sqrt(len(r))

    correlogram = pd.DataFrame(
        {
            "lag": np.arange(1, max_lag + 1),
            "acf": acf_values(r, max_lag)[1:],
            "pacf": pacf_values(r, max_lag),
            "acf_squared": acf_values(r**2, max_lag)[1:],
            "band": band,
        }
    )
    standardized = (r - r.mean()) / r.std(ddof=1)
    qq = {
        "normal": pd.DataFrame(
            qq_points(standardized, "normal"), columns=["theoretical", "sample"]
        ),
        "student_t": pd.DataFrame(
            qq_points(standardized, "student_t", qq_df),
            columns=["theoretical", "sample"],
        ),
    }
    drawdown = _dated(prices.dates, close=closes, drawdown=max_drawdown(closes)[1])
    overlay = _dated(
        prices.dates,
        close=closes,
        sma=sma(prices.close, min(overlay_window, len(closes))).values,
    )

    garch, box = None, ()
    options = {"p": 1, "q": 1, "n": 1, "m": 1, **(garch_options or {})}
    try:
        garch = fit_arma_garch(r, **options)
        box = tuple(ljung_box(garch.standardized_residuals, ljung_box_lags))
    except OilsignalError as exc:
        logger.warning("ARMA-GARCH residual checks skipped: %s", exc)

    return Diagnostics(
        close=describe(closes),
        log_return=describe(r),
        jarque_bera={"close": jarque_bera(closes), "log_return": jarque_bera(r)},
        adf={"close": adf_test(closes), "log_return": adf_test(r)},
        correlogram=correlogram,
        qq=qq,
        drawdown=drawdown,
        overlay=overlay,
        garch=garch,
        ljung_box=box,
    )
