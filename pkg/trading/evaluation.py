"""Prediction quality: confusion counts, class reports, CV and importances."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from core.exceptions import (
    ConstantSeriesError,
    InsufficientDataError,
    OilsignalError,
)
from core.seeding import derive_seed
from market.series import LabeledFrame, ReturnSeries, SignalSeries
from trading.backtest import StrategyKind, sharpe, simulate

logger = logging.getLogger(__name__)

CLASS_NAMES = ("Down Day", "Up Day")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with class 1 ("Up Day") as the positive class."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    def swapped(self) -> ConfusionMatrix:
        """The same counts with "Down Day" as the positive class."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, fn=self.fp, tn=self.tp)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    # metrics whose denominator was zero and were reported as 0
    undefined: tuple[str, ...] = ()


@dataclass(frozen=True)
class ClassReport:
    down: ClassMetrics
    up: ClassMetrics
    accuracy: float

    @property
    def classes(self) -> dict[str, ClassMetrics]:
        return dict(zip(CLASS_NAMES, (self.down, self.up)))


def _as_values(signals) -> np.ndarray:
    if isinstance(signals, SignalSeries):
        return signals.values
    return np.asarray(signals)


def confusion(y_true: SignalSeries, y_pred: SignalSeries) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise ValueError(
            f"truth has {len(y_true)} signals, prediction {len(y_pred)}"
        )
    if y_true.alphabet is not y_pred.alphabet:
        raise ValueError("truth and prediction use different alphabets")
    truth, guess = y_true.is_high, y_pred.is_high
    return ConfusionMatrix(
        tp=int(np.sum(truth & guess)),
        fp=int(np.sum(~truth & guess)),
        fn=int(np.sum(truth & ~guess)),
        tn=int(np.sum(~truth & ~guess)),
    )


def _class_metrics(cm: ConfusionMatrix) -> ClassMetrics:
    undefined = []

    def ratio(name: str, numerator: float, denominator: float) -> float:
        if denominator == 0:
            undefined.append(name)
            return 0.0
        return numerator / denominator

    precision = ratio("precision", cm.tp, cm.tp + cm.fp)
    recall = ratio("recall", cm.tp, cm.tp + cm.fn)
    f1 = ratio("f1", cm.tp, cm.tp + (cm.fp + cm.fn) / 2)
    return ClassMetrics(precision, recall, f1, cm.tp + cm.fn, tuple(undefined))


def classification_report(cm: ConfusionMatrix) -> ClassReport:
    """
    precision = tp/(tp+fp), recall = tp/(tp+fn), F1 = tp/(tp+(fp+fn)/2),
    for each class taken as the positive one in turn.
    """
    return ClassReport(
        down=_class_metrics(cm.swapped()),
        up=_class_metrics(cm),
        accuracy=cm.accuracy,
    )


def accuracy(y_true, y_pred) -> float:
    truth, guess = _as_values(y_true), _as_values(y_pred)
    if len(truth) != len(guess):
        raise ValueError("truth and prediction differ in length")
    if not len(truth):
        raise InsufficientDataError("accuracy of an empty sample")
    return float(np.mean(truth == guess))


@dataclass(frozen=True)
class PermutationImportance:
    baseline: float
    drops: dict[str, float]
    shares: dict[str, float]
    # every drop was zero and the shares fell back to uniform
    uniform: bool = False


def permutation_importance(
    model, test: LabeledFrame, repetitions: int = 10, seed: int = 42
) -> PermutationImportance:
    """
    Mean accuracy drop per shuffled feature (clipped at 0), normalized to
    shares summing to one.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if len(test) < 2:
        raise InsufficientDataError("permutation needs at least 2 test rows")
    truth = test.y
    baseline = accuracy(truth, model.predict(test))
    drops = {}
    for feature in test.features:
        column = test.column(feature)
        scores = []
        for repetition in range(repetitions):
            rng = np.random.default_rng(
                derive_seed(seed, f"permutation:{feature}:{repetition}")
            )
            shuffled = test.with_features({feature: rng.permutation(column)})
            scores.append(accuracy(truth, model.predict(shuffled)))
        drops[feature] = max(0.0, baseline - float(np.mean(scores)))

    total = sum(drops.values())
    if total == 0:
        share = 1.0 / len(drops)
        return PermutationImportance(
            baseline, drops, {name: share for name in drops}, uniform=True
        )
    shares = {name: drop / total for name, drop in drops.items()}
    return PermutationImportance(baseline, drops, shares)


def ordered_kfold_indices(n: int, k: int = 5) -> list[tuple[np.ndarray, np.ndarray]]:
    """
    Contiguous blocks of n // k rows, the remainder joining the last block.
    Fold i tests on block i and trains on every other block, in time order.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < 2 * k:
        raise InsufficientDataError(f"{n} rows cannot form {k} folds of 2+")
    size = n // k
    bounds = [i * size for i in range(k)] + [n]
    rows = np.arange(n)
    folds = []
    for i in range(k):
        test = rows[bounds[i]: bounds[i + 1]]
        train = np.r_[rows[: bounds[i]], rows[bounds[i + 1]:]]
        folds.append((train, test))
    return folds


def ordered_kfold(
    frame: LabeledFrame, k: int = 5
) -> list[tuple[LabeledFrame, LabeledFrame]]:
    return [
        (frame.take(train), frame.take(test))
        for train, test in ordered_kfold_indices(len(frame), k)
    ]


@dataclass(frozen=True)
class CvFold:
    index: int
    accuracy: Optional[float] = None
    sharpe_only_long: Optional[float] = None
    sharpe_long_short: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class CvResult:
    folds: tuple[CvFold, ...]
    means: dict[str, Optional[float]] = field(default_factory=dict)
    # some folds failed and the means cover completed folds only
    incomplete: bool = False

    @property
    def completed(self) -> int:
        return sum(1 for fold in self.folds if fold.error is None)


CV_COLUMNS = ("sharpe_only_long", "sharpe_long_short", "accuracy")


def _strategy_sharpe(signals, returns, kind) -> Optional[float]:
    try:
        return sharpe(simulate(signals, returns, kind))
    except (ConstantSeriesError, InsufficientDataError) as exc:
        logger.info("Fold %s Sharpe undefined: %s", kind.value, exc)
        return None


def run_cv(
    factory: Callable[[], object],
    frame: LabeledFrame,
    returns: ReturnSeries,
    k: int = 5,
) -> CvResult:
    """Retrain a fresh model per fold and score it on the held-out block."""
    folds = []
    for index, (train, test) in enumerate(ordered_kfold(frame, k), 1):
        try:
            signals = factory().fit(train).predict(test)
            truth = SignalSeries(test.dates, test.y, signals.alphabet)
            folds.append(
                CvFold(
                    index,
                    accuracy=accuracy(truth, signals),
                    sharpe_only_long=_strategy_sharpe(
                        signals, returns, StrategyKind.ONLY_LONG
                    ),
                    sharpe_long_short=_strategy_sharpe(
                        signals, returns, StrategyKind.LONG_SHORT
                    ),
                )
            )
        except (OilsignalError, ValueError) as exc:
            logger.warning("CV fold %d failed: %s", index, exc)
            folds.append(CvFold(index, error=str(exc)))

    means = {}
    for column in CV_COLUMNS:
        values = [getattr(f, column) for f in folds if getattr(f, column) is not None]
        means[column] = float(np.mean(values)) if values else None
    incomplete = any(fold.error is not None for fold in folds)
    return CvResult(tuple(folds), means, incomplete)


@dataclass(frozen=True)
class ExtremeBucket:
    level: float
    lower: float
    upper: float
    count: int
    correct: int

    @property
    def accuracy(self) -> Optional[float]:
        return self.correct / self.count if self.count else None


@dataclass(frozen=True)
class ExtremeAccuracy:
    regular: float
    total: int
    buckets: tuple[ExtremeBucket, ...]

    def bucket(self, level: float) -> ExtremeBucket:
        for bucket in self.buckets:
            if bucket.level == level:
                return bucket
        raise KeyError(level)

    @property
    def accuracy_5pct(self) -> Optional[float]:
        return self.bucket(0.95).accuracy

    @property
    def accuracy_1pct(self) -> Optional[float]:
        return self.bucket(0.99).accuracy


def extreme_accuracy(
    test_returns,
    y_true,
    y_pred,
    levels: Sequence[float] = (0.95, 0.99),
) -> ExtremeAccuracy:
    """
    Accuracy on days whose realized return lies strictly outside the
    central ``level`` quantile band of the test returns.
    """
    realized = np.asarray(getattr(test_returns, "values", test_returns), float)
    truth, guess = _as_values(y_true), _as_values(y_pred)
    if not len(realized) == len(truth) == len(guess):
        raise ValueError("returns, truth and prediction differ in length")
    hits = truth == guess
    buckets = []
    for level in levels:
        if not 0 < level < 1:
            raise ValueError("levels must lie strictly between 0 and 1")
        lower, upper = np.quantile(realized, [(1 - level) / 2, (1 + level) / 2])
        extreme = (realized < lower) | (realized > upper)
        buckets.append(
            ExtremeBucket(
                level,
                float(lower),
                float(upper),
                int(extreme.sum()),
                int(hits[extreme].sum()),
            )
        )
    return ExtremeAccuracy(
        regular=float(hits.mean()) if len(hits) else 0.0,
        total=len(hits),
        buckets=tuple(buckets),
    )


def classification_table(reports: dict[str, ClassReport]) -> pd.DataFrame:
    rows = []
    for model, report in reports.items():
        for name, metrics in report.classes.items():
            rows.append(
                {
                    "model": model,
                    "class": name,
                    "precision": metrics.precision,
                    "recall": metrics.recall,
                    "f1_score": metrics.f1,
                    "support": metrics.support,
                }
            )
    return pd.DataFrame(rows)


def extreme_table(results: dict[str, ExtremeAccuracy]) -> pd.DataFrame:
    rows = []
    for model, result in results.items():
        row = {"model": model, "regular": result.regular}
        for bucket in result.buckets:
            row[f"extreme_{round((1 - bucket.level) * 100):g}pct"] = bucket.accuracy
        rows.append(row)
    return pd.DataFrame(rows)


def cv_table(results: dict[str, CvResult]) -> pd.DataFrame:
    rows = []
    for model, result in results.items():
        for fold in result.folds:
            rows.append(
                {
                    "model": model,
                    "fold": str(fold.index),
                    **{column: getattr(fold, column) for column in CV_COLUMNS},
                }
            )
        rows.append({"model": model, "fold": "mean", **result.means})
    return pd.DataFrame(rows, columns=["model", "fold", *CV_COLUMNS])
