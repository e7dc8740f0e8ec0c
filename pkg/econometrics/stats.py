"""Descriptive statistics and time-series diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from core.exceptions import ConstantSeriesError, InsufficientDataError

JB_CRITICAL_5PCT = float(stats.chi2.ppf(0.95, 2))

# MacKinnon constant-only critical value at 5%
ADF_CRITICAL_5PCT = -2.86

QUANTILE_LEVELS = (0.05, 0.25, 0.50, 0.75, 0.95)


@dataclass(frozen=True)
class DescriptiveSummary:
    count: int
    mean: float
    std: float
    min: float
    q5: float
    q25: float
    q50: float
    q75: float
    q95: float
    max: float
    skewness: float
    kurtosis: float


@dataclass(frozen=True)
class CorrelogramPoint:
    lag: int
    value: float
    confidence_band: float

    @property
    def significant(self) -> bool:
        return abs(self.value) > self.confidence_band


@dataclass(frozen=True)
class JarqueBera:
    statistic: float
    normality_rejected: bool


@dataclass(frozen=True)
class LjungBox:
    lag: int
    statistic: float
    p_value: float


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    lag_order: int
    unit_root_rejected: bool


def _array(values, minimum: int, what: str) -> np.ndarray:
    data = np.asarray(values, dtype=float)
    if data.ndim != 1 or len(data) < minimum:
        raise InsufficientDataError(
            f"{what} needs at least {minimum} values, got {data.size}"
        )
    return data


def describe(values) -> DescriptiveSummary:
    data = _array(values, 2, "describe")
    quantiles = np.quantile(data, QUANTILE_LEVELS, method="linear")
    return DescriptiveSummary(
        count=len(data),
        mean=float(data.mean()),
        std=float(data.std(ddof=1)),
        min=float(data.min()),
        q5=float(quantiles[0]),
        q25=float(quantiles[1]),
        q50=float(quantiles[2]),
        q75=float(quantiles[3]),
        q95=float(quantiles[4]),
        max=float(data.max()),
        skewness=float(stats.skew(data, bias=True)),
        kurtosis=float(stats.kurtosis(data, fisher=True, bias=True)),
    )


def jarque_bera(values) -> JarqueBera:
    """JB = n/6 (S^2 + K^2/4) with excess kurtosis K; 5% chi-square(2) decision."""
    data = _array(values, 8, "Jarque-Bera")
    if np.ptp(data) == 0:
        raise ConstantSeriesError("Jarque-Bera of a constant series")
    skewness = stats.skew(data, bias=True)
    kurtosis = stats.kurtosis(data, fisher=True, bias=True)
    statistic = len(data) / 6.0 * (skewness**2 + kurtosis**2 / 4.0)
    return JarqueBera(float(statistic), bool(statistic > JB_CRITICAL_5PCT))


def acf_values(values, max_lag: int) -> np.ndarray:
    """Sample autocorrelations for lags 0..max_lag (lag 0 is 1)."""
    data = _array(values, max_lag + 1, "ACF")
    centred = data - data.mean()
    denominator = float(centred @ centred)
    if denominator == 0:
        raise ConstantSeriesError("autocorrelation of a constant series")
    n = len(data)
    return np.array(
        [1.0]
        + [
            float(centred[: n - lag] @ centred[lag:]) / denominator
            for lag in range(1, max_lag + 1)
        ]
    )


def _band(n: int) -> float:
    return 1.96 / math.sqrt(n)


def acf(values, max_lag: int) -> list[CorrelogramPoint]:
    rho = acf_values(values, max_lag)
    band = _band(len(values))
    return [
        CorrelogramPoint(lag, float(rho[lag]), band)
        for lag in range(1, max_lag + 1)
    ]


def pacf_values(values, max_lag: int) -> np.ndarray:
    """Partial autocorrelations for lags 1..max_lag by Durbin-Levinson."""
    rho = acf_values(values, max_lag)
    partial = np.zeros(max_lag)
    phi = np.zeros(0)
    for k in range(1, max_lag + 1):
        if k == 1:
            phi_kk = rho[1]
        else:
            numerator = rho[k] - phi @ rho[k - 1:0:-1]
            denominator = 1.0 - phi @ rho[1:k]
            phi_kk = numerator / denominator
        phi = np.r_[phi - phi_kk * phi[::-1], phi_kk]
        partial[k - 1] = phi_kk
    return partial


def pacf(values, max_lag: int) -> list[CorrelogramPoint]:
    partial = pacf_values(values, max_lag)
    band = _band(len(values))
    return [
        CorrelogramPoint(lag, float(partial[lag - 1]), band)
        for lag in range(1, max_lag + 1)
    ]


def chi2_upper_tail(statistic: float, dof: int) -> float:
    """P(X > statistic) for X ~ chi-square(dof), via the regularized gamma."""
    return float(special.gammaincc(dof / 2.0, statistic / 2.0))


def ljung_box(residuals, lags: Sequence[int]) -> list[LjungBox]:
    data = np.asarray(residuals, dtype=float)
    lags = sorted(int(lag) for lag in lags)
    if not lags or lags[0] < 1:
        raise ValueError("lags must be positive")
    if lags[-1] >= len(data):
        raise InsufficientDataError("largest lag must be below the sample size")
    rho = acf_values(data, lags[-1])
    n = len(data)
    terms = rho[1:] ** 2 / (n - np.arange(1, lags[-1] + 1))
    cumulative = n * (n + 2) * np.cumsum(terms)
    return [
        LjungBox(lag, float(cumulative[lag - 1]),
                 chi2_upper_tail(float(cumulative[lag - 1]), lag))
        for lag in lags
    ]


def default_adf_lag(n: int) -> int:
    return int(math.floor(12 * (n / 100.0) ** 0.25))


def adf_test(values, lag_order: Optional[int] = None) -> AdfResult:
    """
    Augmented Dickey-Fuller regression with a constant:
    dy_t = c + g y_{t-1} + sum_i d_i dy_{t-i} + e_t; the statistic is t(g).
    """
    data = np.asarray(values, dtype=float)
    if lag_order is None:
        lag_order = default_adf_lag(len(data))
    _array(data, lag_order + 3, "ADF")

    diff = np.diff(data)
    rows = len(diff) - lag_order
    target = diff[lag_order:]
    columns = [np.ones(rows), data[lag_order:-1]]
    for lag in range(1, lag_order + 1):
        columns.append(diff[lag_order - lag: len(diff) - lag])
    design = np.column_stack(columns)

    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise ConstantSeriesError("singular ADF regression")
    coefficients, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    residuals = target - design @ coefficients
    dof = rows - design.shape[1]
    if dof <= 0:
        raise InsufficientDataError("ADF regression has no residual freedom")
    sigma2 = float(residuals @ residuals) / dof
    covariance = sigma2 * np.linalg.inv(design.T @ design)
    statistic = float(coefficients[1] / math.sqrt(covariance[1, 1]))
    return AdfResult(statistic, lag_order, statistic < ADF_CRITICAL_5PCT)


def qq_points(
    values, reference: str = "normal", df: Optional[float] = None
) -> list[tuple[float, float]]:
    """Order statistics against reference quantiles at (i - 0.5)/n."""
    data = np.sort(_array(values, 10, "QQ plot"))
    positions = (np.arange(1, len(data) + 1) - 0.5) / len(data)
    if reference == "normal":
        theoretical = stats.norm.ppf(positions)
    elif reference == "student_t":
        if df is None or df <= 0:
            raise ValueError("student_t reference needs df > 0")
        theoretical = stats.t.ppf(positions, df)
    else:
        raise ValueError(f"unsupported reference {reference!r}")
    return list(zip(theoretical.tolist(), data.tolist()))
