"""
ARMA(p, q) mean model with GARCH(n, m) conditional variance.

Estimation is two-stage: the ARMA part by Gaussian conditional likelihood,
then the GARCH part on the ARMA residuals with Student-t or normal
innovations. Both stages run Nelder-Mead over unconstrained
reparameterizations, on data rescaled to unit variance.

The variance recursion uses the conventional roles:

    sigma2_t = omega + sum_i alpha_i eps2_{t-i} + sum_j beta_j sigma2_{t-j}

so ``alpha`` (the ARCH terms, small) multiplies lagged squared residuals
and ``beta`` (the GARCH terms, large) multiplies lagged variances.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize, special
from scipy.signal import lfilter, lfiltic

from core.exceptions import (
    BoundarySolutionError,
    ConvergenceError,
    InsufficientDataError,
    NonStationaryError,
    OilsignalError,
)
from market.series import Alphabet, LabeledFrame, ReturnSeries, SignalSeries

logger = logging.getLogger(__name__)

DF_LOWER = 2.05
DF_UPPER = 100.0
BOUNDARY_TOL = 1e-6
INNOVATIONS = ("student_t", "normal")


@dataclass(frozen=True)
class ArmaParams:
    mu: float
    ar: tuple[float, ...] = ()
    ma: tuple[float, ...] = ()

    @property
    def p(self) -> int:
        return len(self.ar)

    @property
    def q(self) -> int:
        return len(self.ma)

    @property
    def is_stationary(self) -> bool:
        if not self.ar:
            return True
        # roots of 1 - a_1 z - ... - a_p z^p
        roots = np.roots(np.r_[-np.asarray(self.ar)[::-1], 1.0])
        return bool(np.all(np.abs(roots) > 1.0))


@dataclass(frozen=True)
class GarchParams:
    omega: float
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    df: Optional[float] = None

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if any(a < 0 for a in self.alpha) or any(b < 0 for b in self.beta):
            raise ValueError("ARCH and GARCH coefficients must be >= 0")
        if self.df is not None and not self.df > 2:
            raise ValueError("Student-t degrees of freedom must exceed 2")

    @property
    def persistence(self) -> float:
        return float(sum(self.alpha) + sum(self.beta))

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.persistence)


@dataclass(frozen=True, eq=False)
class ArmaFit:
    params: ArmaParams
    residuals: np.ndarray
    log_likelihood: float
    bic: float
    trace: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class GarchEstimate:
    params: GarchParams
    log_likelihood: float
    conditional_variance: np.ndarray
    trace: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class GarchFit:
    arma: ArmaParams
    garch: GarchParams
    log_likelihood: float
    bic: float
    residuals: np.ndarray
    conditional_variance: np.ndarray
    returns: np.ndarray = field(repr=False)

    @property
    def standardized_residuals(self) -> np.ndarray:
        return self.residuals / np.sqrt(self.conditional_variance)

    def parameter_table(self) -> dict[str, float]:
        table = {"mu": self.arma.mu}
        table.update({f"a{i}": v for i, v in enumerate(self.arma.ar, 1)})
        table.update({f"b{j}": v for j, v in enumerate(self.arma.ma, 1)})
        table["omega"] = self.garch.omega
        table.update({f"alpha{i}": v for i, v in enumerate(self.garch.alpha, 1)})
        table.update({f"beta{j}": v for j, v in enumerate(self.garch.beta, 1)})
        if self.garch.df is not None:
            table["nu"] = self.garch.df
        return table


@dataclass(frozen=True)
class OrderSelection:
    p: int
    q: int
    bic_table: dict[tuple[int, int], float]


# Reparameterizations


def constrain_stationary(raw: np.ndarray) -> np.ndarray:
    """
    Map unconstrained values to coefficients of a stationary AR polynomial.

    tanh gives partial autocorrelations in (-1, 1); the Durbin-Levinson
    recursion turns them into polynomial coefficients.
    """
    partial = np.tanh(np.asarray(raw, dtype=float))
    coefficients = np.zeros(0)
    for r in partial:
        coefficients = np.r_[coefficients - r * coefficients[::-1], r]
    return coefficients


def _softmax_with_slack(logits: np.ndarray) -> np.ndarray:
    """Non-negative weights whose sum stays strictly below one."""
    shift = max(0.0, float(np.max(logits))) if len(logits) else 0.0
    exps = np.exp(logits - shift)
    return exps / (math.exp(-shift) + exps.sum())


def _df_from_raw(raw: float) -> float:
    return DF_LOWER + (DF_UPPER - DF_LOWER) * float(special.expit(raw))


def _df_to_raw(df: float) -> float:
    return float(special.logit((df - DF_LOWER) / (DF_UPPER - DF_LOWER)))


# Recursions


def arma_residuals(
    params: ArmaParams, y, presample: Optional[float] = None
) -> np.ndarray:
    """
    eps_t = y_t - mu - sum a_i y_{t-i} - sum b_j eps_{t-j}

    Pre-sample observations equal ``presample`` (default: the sample mean)
    and pre-sample residuals are zero.
    """
    y = np.asarray(y, dtype=float)
    if presample is None:
        presample = float(y.mean())
    padded = np.r_[np.full(params.p, presample), y]
    x = y - params.mu
    for i, a in enumerate(params.ar, 1):
        x = x - a * padded[params.p - i: params.p - i + len(y)]
    if not params.ma:
        return x
    return lfilter([1.0], np.r_[1.0, params.ma], x)


def _variance_recursion(
    eps2: np.ndarray,
    omega: float,
    alpha: Sequence[float],
    beta: Sequence[float],
    seed: float,
) -> np.ndarray:
    n_arch = len(alpha)
    padded = np.r_[np.full(n_arch, seed), eps2]
    arch = np.full(len(eps2), omega, dtype=float)
    for i, a in enumerate(alpha, 1):
        arch = arch + a * padded[n_arch - i: n_arch - i + len(eps2)]
    if not len(beta):
        return arch
    denominator = np.r_[1.0, -np.asarray(beta, dtype=float)]
    zi = lfiltic([1.0], denominator, np.full(len(beta), seed))
    variance, _ = lfilter([1.0], denominator, arch, zi=zi)
    return variance


def conditional_variance(params: GarchParams, residuals) -> np.ndarray:
    """sigma2 path for ``residuals``; pre-sample terms equal mean(eps^2)."""
    eps2 = np.asarray(residuals, dtype=float) ** 2
    seed = float(eps2.mean()) if len(eps2) else 0.0
    return _variance_recursion(
        eps2, params.omega, params.alpha, params.beta, seed
    )


def _innovation_loglik(
    eps: np.ndarray, variance: np.ndarray, df: Optional[float]
) -> float:
    if df is None:
        return float(
            -0.5 * np.sum(np.log(2 * np.pi) + np.log(variance)
                          + eps**2 / variance)
        )
    # standardized (unit-variance) Student-t
    constant = (
        special.gammaln((df + 1) / 2)
        - special.gammaln(df / 2)
        - 0.5 * math.log(math.pi * (df - 2))
    )
    return float(
        len(eps) * constant
        - 0.5 * np.sum(np.log(variance))
        - (df + 1) / 2 * np.sum(np.log1p(eps**2 / (variance * (df - 2))))
    )


# Optimization


def _minimize(
    objective: Callable[[np.ndarray], float],
    start: np.ndarray,
    steps: np.ndarray,
    max_iter: int,
    tol: float,
    what: str,
):
    """Nelder-Mead with a trace of the best objective at every iteration."""
    simplex = np.vstack([start, start + np.diag(steps)])
    trace = []
    result = optimize.minimize(
        objective,
        start,
        method="Nelder-Mead",
        callback=lambda xk: trace.append(-objective(xk)),
        options={
            "initial_simplex": simplex,
            "maxiter": max_iter,
            "xatol": tol,
            "fatol": tol,
        },
    )
    if not result.success or not np.isfinite(result.fun):
        gradient = optimize.approx_fprime(result.x, objective, 1e-7)
        raise ConvergenceError(
            f"{what} did not converge: {result.message}",
            residual=float(np.linalg.norm(gradient)),
        )
    return result, tuple(trace)


def fit_arma(
    returns, p: int = 1, q: int = 1, max_iter: int = 2000, tol: float = 1e-8
) -> ArmaFit:
    y = np.asarray(getattr(returns, "values", returns), dtype=float)
    if p < 0 or q < 0:
        raise ValueError("orders must be non-negative")
    if len(y) < 50 * max(p, q, 1):
        raise InsufficientDataError(
            f"ARMA({p},{q}) needs {50 * max(p, q, 1)} observations"
        )

    centre = float(y.mean())
    scale = float(y.std())
    if scale == 0:
        raise InsufficientDataError("ARMA fit on a constant series")
    z = (y - centre) / scale
    n = len(z)

    def unpack(theta: np.ndarray) -> ArmaParams:
        return ArmaParams(
            float(theta[0]),
            tuple(constrain_stationary(theta[1: 1 + p])),
            tuple(-constrain_stationary(theta[1 + p:])),
        )

    def negative_loglik(theta: np.ndarray) -> float:
        eps = arma_residuals(unpack(theta), z, presample=0.0)
        sigma2 = float(eps @ eps) / n
        if not sigma2 > 0 or not np.isfinite(sigma2):
            return np.inf
        return 0.5 * n * (math.log(2 * math.pi) + math.log(sigma2) + 1)

    start = np.zeros(1 + p + q)
    steps = np.r_[0.05, np.full(p + q, 0.1)]
    result, trace = _minimize(
        negative_loglik, start, steps, max_iter, tol, f"ARMA({p},{q})"
    )

    standard = unpack(result.x)
    params = ArmaParams(
        mu=centre * (1.0 - sum(standard.ar)) + scale * standard.mu,
        ar=standard.ar,
        ma=standard.ma,
    )
    if not params.is_stationary:
        raise NonStationaryError(f"ARMA({p},{q}) estimate is not stationary")

    log_likelihood = -float(result.fun) - n * math.log(scale)
    residuals = arma_residuals(params, y, presample=centre)
    bic = (p + q + 1) * math.log(n) - 2.0 * log_likelihood
    logger.debug("ARMA(%d,%d) logL=%.3f BIC=%.3f", p, q, log_likelihood, bic)
    return ArmaFit(
        params,
        residuals,
        log_likelihood,
        bic,
        tuple(t - n * math.log(scale) for t in trace),
    )


def estimate_garch(
    residuals,
    n: int = 1,
    m: int = 1,
    innovation: str = "student_t",
    max_iter: int = 2000,
    tol: float = 1e-8,
) -> GarchEstimate:
    eps = np.asarray(residuals, dtype=float)
    if innovation not in INNOVATIONS:
        raise ValueError(f"innovation must be one of {INNOVATIONS}")
    if n < 1 or m < 0:
        raise ValueError("GARCH needs n >= 1 ARCH terms and m >= 0")
    if len(eps) < 250:
        raise InsufficientDataError("GARCH fit needs at least 250 residuals")

    scale = math.sqrt(float(np.mean(eps**2)))
    if scale == 0:
        raise InsufficientDataError("GARCH fit on all-zero residuals")
    e = eps / scale
    e2 = e**2
    student = innovation == "student_t"

    def unpack(theta: np.ndarray):
        weights = _softmax_with_slack(theta[1: 1 + n + m])
        df = _df_from_raw(theta[-1]) if student else None
        return math.exp(theta[0]), weights[:n], weights[n:], df

    def negative_loglik(theta: np.ndarray) -> float:
        omega, alpha, beta, df = unpack(theta)
        variance = _variance_recursion(e2, omega, alpha, beta, 1.0)
        if not np.all(variance > 0) or not np.all(np.isfinite(variance)):
            return np.inf
        return -_innovation_loglik(e, variance, df)

    slack = 0.05
    start_alpha = np.full(n, 0.05 / n)
    start_beta = np.full(m, 0.90 / m) if m else np.zeros(0)
    start = np.r_[
        math.log(0.05),
        np.log(start_alpha / slack),
        np.log(start_beta / slack),
    ]
    if student:
        start = np.r_[start, _df_to_raw(8.0)]
    steps = np.full(len(start), 0.5)

    result, trace = _minimize(
        negative_loglik, start, steps, max_iter, tol, f"GARCH({n},{m})"
    )
    omega, alpha, beta, df = unpack(result.x)
    params = GarchParams(
        omega=omega * scale**2,
        alpha=tuple(float(a) for a in alpha),
        beta=tuple(float(b) for b in beta),
        df=df,
    )
    if params.persistence >= 1.0 - BOUNDARY_TOL:
        raise BoundarySolutionError(
            f"GARCH({n},{m}) persistence {params.persistence:.8f} "
            "is on the stationarity boundary"
        )
    log_likelihood = -float(result.fun) - len(e) * math.log(scale)
    variance = conditional_variance(params, eps)
    return GarchEstimate(
        params,
        log_likelihood,
        variance,
        tuple(t - len(e) * math.log(scale) for t in trace),
    )


def fit_garch(
    residuals,
    n: int = 1,
    m: int = 1,
    innovation: str = "student_t",
    max_iter: int = 2000,
    tol: float = 1e-8,
) -> GarchParams:
    return estimate_garch(residuals, n, m, innovation, max_iter, tol).params


def fit_arma_garch(
    returns,
    p: int = 1,
    q: int = 1,
    n: int = 1,
    m: int = 1,
    innovation: str = "student_t",
    max_iter: int = 2000,
    tol: float = 1e-8,
) -> GarchFit:
    y = np.asarray(getattr(returns, "values", returns), dtype=float)
    arma = fit_arma(y, p, q, max_iter=max_iter, tol=tol)
    garch = estimate_garch(
        arma.residuals, n, m, innovation, max_iter=max_iter, tol=tol
    )
    k = p + q + 1 + 1 + n + m + (1 if innovation == "student_t" else 0)
    bic = k * math.log(len(y)) - 2.0 * garch.log_likelihood
    logger.info(
        "ARMA(%d,%d)-GARCH(%d,%d) fitted: persistence %.4f, BIC %.2f",
        p, q, n, m, garch.params.persistence, bic,
    )
    return GarchFit(
        arma=arma.params,
        garch=garch.params,
        log_likelihood=garch.log_likelihood,
        bic=bic,
        residuals=arma.residuals,
        conditional_variance=garch.conditional_variance,
        returns=y,
    )


def select_order(returns, p_max: int = 3, q_max: int = 3, **fit_options):
    """Fit every ARMA(p, q) with p <= p_max, q <= q_max; keep the lowest BIC."""
    if not (0 <= p_max <= 3 and 0 <= q_max <= 3):
        raise ValueError("order grid is limited to p_max, q_max <= 3")
    table = {}
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            try:
                table[(p, q)] = fit_arma(returns, p, q, **fit_options).bic
            except OilsignalError as exc:
                logger.warning("ARMA(%d,%d) skipped: %s", p, q, exc)
    if not table:
        raise ConvergenceError("every ARMA order in the grid failed")
    best = min(table, key=lambda order: (table[order], order))
    return OrderSelection(best[0], best[1], table)


def forecast_signal(fit: GarchFit, test_returns: ReturnSeries) -> SignalSeries:
    """
    One-step directional forecasts over the test window with static
    parameters: the signal dated t is the sign of the forecast for t+1,
    built from realized returns and residuals up to t.
    """
    history = fit.returns
    y = np.r_[history, test_returns.values]
    eps = arma_residuals(fit.arma, y, presample=float(history.mean()))
    positions = np.arange(len(history), len(y))
    forecast = np.full(len(positions), fit.arma.mu)
    for i, a in enumerate(fit.arma.ar, 1):
        forecast += a * y[positions + 1 - i]
    for j, b in enumerate(fit.arma.ma, 1):
        forecast += b * eps[positions + 1 - j]
    values = np.where(forecast > 0, 1, -1)
    return SignalSeries(test_returns.dates, values, Alphabet.DIRECTIONAL)


# Simulation


def simulate_arma(
    mu: float,
    ar: Sequence[float],
    ma: Sequence[float],
    n: int,
    seed: int,
    sigma: float = 1.0,
    burn: int = 500,
) -> np.ndarray:
    rng = np.random.default_rng(seed)
    shocks = rng.normal(0.0, sigma, n + burn)
    level = mu / (1.0 - sum(ar))
    path = lfilter(np.r_[1.0, ma], np.r_[1.0, -np.asarray(ar, float)], shocks)
    return path[burn:] + level


def simulate_garch(
    omega: float,
    alpha: Sequence[float],
    beta: Sequence[float],
    n: int,
    seed: int,
    df: Optional[float] = None,
    burn: int = 500,
) -> np.ndarray:
    rng = np.random.default_rng(seed)
    total = n + burn
    if df is None:
        shocks = rng.standard_normal(total)
    else:
        shocks = rng.standard_t(df, total) * math.sqrt((df - 2) / df)
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    lags = max(len(alpha), len(beta))
    start = omega / (1.0 - alpha.sum() - beta.sum())
    eps = np.zeros(total + lags)
    variance = np.full(total + lags, start)
    for t in range(lags, total + lags):
        variance[t] = (
            omega
            + alpha @ eps[t - len(alpha): t][::-1] ** 2
            + beta @ variance[t - len(beta): t][::-1]
        )
        eps[t] = math.sqrt(variance[t]) * shocks[t - lags]
    return eps[lags + burn:]


class ArmaGarchSignalModel:
    """Adapter giving ARMA-GARCH the fit/predict shape of the learners."""

    name = "arma_garch"

    def __init__(
        self,
        p: int = 1,
        q: int = 1,
        n: int = 1,
        m: int = 1,
        innovation: str = "student_t",
        select: bool = False,
        p_max: int = 3,
        q_max: int = 3,
        max_iter: int = 2000,
        tol: float = 1e-8,
    ):
        self.orders = (p, q, n, m)
        self.innovation = innovation
        self.select = select
        self.grid = (p_max, q_max)
        self.options = {"max_iter": max_iter, "tol": tol}
        self.fit_: Optional[GarchFit] = None
        self.selection_: Optional[OrderSelection] = None

    def fit(self, train: LabeledFrame) -> ArmaGarchSignalModel:
        returns = train.column("log_return")
        p, q, n, m = self.orders
        if self.select:
            self.selection_ = select_order(returns, *self.grid, **self.options)
            p, q = self.selection_.p, self.selection_.q
        self.fit_ = fit_arma_garch(
            returns, p, q, n, m, self.innovation, **self.options
        )
        return self

    def predict(self, frame: LabeledFrame) -> SignalSeries:
        if self.fit_ is None:
            raise OilsignalError("ARMA-GARCH model is not fitted")
        test = ReturnSeries(frame.dates, frame.column("log_return"))
        return forecast_signal(self.fit_, test).recode(Alphabet.BINARY)

    def to_dict(self) -> dict:
        if self.fit_ is None:
            return {}
        fit = self.fit_
        return {
            "orders": {
                "p": fit.arma.p,
                "q": fit.arma.q,
                "n": len(fit.garch.alpha),
                "m": len(fit.garch.beta),
            },
            "innovation": self.innovation,
            "parameters": fit.parameter_table(),
            "log_likelihood": fit.log_likelihood,
            "bic": fit.bic,
            "order_bic": (
                {f"{p},{q}": bic for (p, q), bic in self.selection_.bic_table.items()}
                if self.selection_
                else {}
            ),
        }
