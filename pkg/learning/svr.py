"""
Epsilon-insensitive support vector regression with an RBF kernel.

The dual is solved by sequential minimal optimization over the 2l
variables [alpha; alpha*], picking the maximal violating pair each
iteration. Kernel rows are computed on demand and kept in a bounded
LRU cache sized by ``cache_size`` (megabytes).
"""
from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.spatial.distance import cdist

from core.exceptions import ConvergenceError, InsufficientDataError
from learning.base import ScaledFeaturesMixin, price_signals, scaling_bounds
from market.series import LabeledFrame, SignalSeries

logger = logging.getLogger(__name__)

TAU = 1e-12


@dataclass(frozen=True)
class SvrConfig:
    C: float = 19.0
    epsilon: float = 22.4
    gamma: Union[str, float] = "auto"
    # working-set shrinking does not change the solution; accepted as a hint
    shrinking: bool = True
    cache_size: float = 41.0
    tol: float = 1e-3
    max_iter: int = 200000

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if isinstance(self.gamma, str):
            if self.gamma not in ("auto", "scale"):
                raise ValueError("gamma must be 'auto', 'scale' or a number")
        elif not self.gamma > 0:
            raise ValueError("numeric gamma must be positive")

    def resolve_gamma(self, X: np.ndarray) -> float:
        if self.gamma == "auto":
            return 1.0 / X.shape[1]
        if self.gamma == "scale":
            variance = float(X.var())
            return 1.0 / (X.shape[1] * variance) if variance > 0 else 1.0
        return float(self.gamma)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SvrModel:
    support_vectors: np.ndarray
    # alpha - alpha* for each support vector
    coefficients: np.ndarray
    bias: float
    gamma: float
    iterations: int = 0
    violation: float = 0.0
    objective_trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def n_support(self) -> int:
        return len(self.coefficients)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not self.n_support:
            return np.full(len(X), self.bias)
        kernel = rbf_kernel(X, self.support_vectors, self.gamma)
        return kernel @ self.coefficients + self.bias

    def to_dict(self) -> dict:
        return {
            "support_vectors": self.support_vectors.tolist(),
            "coefficients": self.coefficients.tolist(),
            "bias": self.bias,
            "gamma": self.gamma,
            "iterations": self.iterations,
            "violation": self.violation,
        }


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * cdist(A, B, metric="sqeuclidean"))


class KernelRows:
    """LRU cache of kernel matrix rows."""

    def __init__(self, X: np.ndarray, gamma: float, cache_size: float):
        self.X = X
        self.gamma = gamma
        row_bytes = 8 * len(X)
        self.capacity = max(2, int(cache_size * 2**20 // row_bytes))
        self.rows: OrderedDict[int, np.ndarray] = OrderedDict()

    def __getitem__(self, index: int) -> np.ndarray:
        row = self.rows.get(index)
        if row is not None:
            self.rows.move_to_end(index)
            return row
        row = rbf_kernel(self.X[index: index + 1], self.X, self.gamma)[0]
        self.rows[index] = row
        if len(self.rows) > self.capacity:
            self.rows.popitem(last=False)
        return row


def _select_pair(beta, G, signs, C):
    """Maximal violating pair (i, j) and the violation m - M."""
    score = -signs * G
    up = ((signs > 0) & (beta < C)) | ((signs < 0) & (beta > 0))
    low = ((signs > 0) & (beta > 0)) | ((signs < 0) & (beta < C))
    if not up.any() or not low.any():
        return -1, -1, 0.0
    i = int(np.flatnonzero(up)[np.argmax(score[up])])
    j = int(np.flatnonzero(low)[np.argmin(score[low])])
    return i, j, float(score[i] - score[j])


def _update_pair(beta, G, signs, C, i, j, Qi, Qj):
    old_i, old_j = beta[i], beta[j]
    if signs[i] != signs[j]:
        quad = max(Qi[i] + Qj[j] + 2 * Qi[j], TAU)
        delta = (-G[i] - G[j]) / quad
        diff = old_i - old_j
        beta[i] += delta
        beta[j] += delta
        if diff > 0:
            if beta[j] < 0:
                beta[j], beta[i] = 0.0, diff
        elif beta[i] < 0:
            beta[i], beta[j] = 0.0, -diff
        if diff > 0:
            if beta[i] > C:
                beta[i], beta[j] = C, C - diff
        elif beta[j] > C:
            beta[j], beta[i] = C, C + diff
    else:
        quad = max(Qi[i] + Qj[j] - 2 * Qi[j], TAU)
        delta = (G[i] - G[j]) / quad
        total = old_i + old_j
        beta[i] -= delta
        beta[j] += delta
        if total > C:
            if beta[i] > C:
                beta[i], beta[j] = C, total - C
        elif beta[j] < 0:
            beta[j], beta[i] = 0.0, total
        if total > C:
            if beta[j] > C:
                beta[j], beta[i] = C, total - C
        elif beta[i] < 0:
            beta[i], beta[j] = 0.0, total
    G += Qi * (beta[i] - old_i) + Qj * (beta[j] - old_j)


def _offset(beta, G, signs, C) -> float:
    """rho: mean over free variables, else the midpoint of the KKT bounds."""
    yG = signs * G
    free = (beta > 0) & (beta < C)
    if free.any():
        return float(yG[free].mean())
    at_upper = beta >= C
    at_lower = beta <= 0
    upper_bound = (at_upper & (signs < 0)) | (at_lower & (signs > 0))
    lower_bound = (at_upper & (signs > 0)) | (at_lower & (signs < 0))
    ub = yG[upper_bound].min() if upper_bound.any() else np.inf
    lb = yG[lower_bound].max() if lower_bound.any() else -np.inf
    return float((ub + lb) / 2)


def svr_fit_arrays(
    X, z, config: Optional[SvrConfig] = None, record_objective: bool = False
) -> SvrModel:
    config = config or SvrConfig()
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    n = len(z)
    if n < 2:
        raise InsufficientDataError("SVR needs at least 2 training rows")
    if not np.all(np.isfinite(z)):
        raise ValueError("SVR labels must be finite")

    gamma = config.resolve_gamma(X)
    rows = KernelRows(X, gamma, config.cache_size)
    C = config.C
    signs = np.r_[np.ones(n), -np.ones(n)]
    linear = np.r_[config.epsilon - z, config.epsilon + z]
    beta = np.zeros(2 * n)
    G = linear.copy()
    trace = []

    def column(t: int) -> np.ndarray:
        row = rows[t % n]
        return signs[t] * signs * np.r_[row, row]

    iterations = 0
    while True:
        i, j, violation = _select_pair(beta, G, signs, C)
        if violation < config.tol:
            break
        if iterations >= config.max_iter:
            raise ConvergenceError(
                f"SMO stopped after {iterations} iterations", residual=violation
            )
        _update_pair(beta, G, signs, C, i, j, column(i), column(j))
        iterations += 1
        if record_objective:
            trace.append(-0.5 * float(beta @ (G + linear)))

    rho = _offset(beta, G, signs, C)
    coefficients = beta[:n] - beta[n:]
    support = np.flatnonzero(coefficients != 0)
    logger.debug(
        "SMO converged in %d iterations, %d support vectors",
        iterations, len(support),
    )
    return SvrModel(
        support_vectors=X[support],
        coefficients=coefficients[support],
        bias=-rho,
        gamma=gamma,
        iterations=iterations,
        violation=max(violation, 0.0),
        objective_trace=tuple(trace),
    )


def svr_train(
    train: LabeledFrame,
    config: Optional[SvrConfig] = None,
    label: str = "next_close",
    record_objective: bool = False,
) -> SvrModel:
    return svr_fit_arrays(
        train.X, train.column(label), config, record_objective
    )


def svr_predict_signals(
    model: SvrModel, frame: LabeledFrame, prior_closes=None
) -> SignalSeries:
    """Predicted next close against the current close, coded 1/0."""
    if prior_closes is None:
        prior_closes = frame.column("close")
    return price_signals(frame.dates, model.predict(frame.X), prior_closes)


class SvrSignalModel(ScaledFeaturesMixin):
    name = "svr"

    def __init__(self, config: Optional[SvrConfig] = None):
        self.config = config or SvrConfig()
        self.model_: Optional[SvrModel] = None

    def fit(self, train: LabeledFrame) -> SvrSignalModel:
        self.model_ = svr_train(self._scale_fit(train), self.config)
        return self

    def predict_close(self, frame: LabeledFrame) -> np.ndarray:
        return self.model_.predict(self._scale(frame).X)

    def predict(self, frame: LabeledFrame) -> SignalSeries:
        return svr_predict_signals(self.model_, self._scale(frame))

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "scaling": scaling_bounds(self.scaling_),
            **(self.model_.to_dict() if self.model_ else {}),
        }
