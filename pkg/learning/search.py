"""Randomized hyperparameter search scored by ordered k-fold CV."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional

import numpy as np

from core.exceptions import OilsignalError, SearchError
from learning.forest import ForestModel, RfConfig
from learning.knn import KnnConfig, KnnModel
from learning.svr import SvrConfig, SvrSignalModel
from market.series import LabeledFrame
from trading.evaluation import accuracy, ordered_kfold_indices

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Family:
    config: type
    model: Callable[[Any], Any]
    # "accuracy" is maximized, "mse" minimized
    scoring: str


FAMILIES = {
    "knn": Family(KnnConfig, KnnModel, "accuracy"),
    "rf": Family(RfConfig, ForestModel, "accuracy"),
    "svr": Family(SvrConfig, SvrSignalModel, "mse"),
}


@dataclass(frozen=True)
class SearchSpace:
    candidates: dict[str, tuple] = field(default_factory=dict)
    budget: int = 20
    folds: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if any(not len(values) for values in self.candidates.values()):
            raise ValueError("every hyperparameter needs at least one candidate")

    def grid(self) -> list[dict]:
        names = sorted(self.candidates)
        return [
            dict(zip(names, combination))
            for combination in itertools.product(
                *(self.candidates[name] for name in names)
            )
        ]

    def sample(self) -> list[dict]:
        """``budget`` distinct configurations drawn uniformly from the grid."""
        grid = self.grid()
        rng = np.random.default_rng(self.seed)
        count = min(self.budget, len(grid))
        return [grid[i] for i in rng.choice(len(grid), count, replace=False)]


@dataclass(frozen=True)
class SearchTrial:
    index: int
    params: dict
    score: Optional[float] = None
    fold_scores: tuple[float, ...] = ()
    error: Optional[str] = None
    # (train rows, test rows) per fold, as positions in the search frame
    folds: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = ()


@dataclass(frozen=True)
class SearchResult:
    family: str
    best_params: dict
    best_config: Any
    best_score: float
    trials: tuple[SearchTrial, ...]


def _fold_score(family: Family, model, test: LabeledFrame) -> float:
    if family.scoring == "mse":
        predicted = model.predict_close(test)
        return float(np.mean((predicted - test.column("next_close")) ** 2))
    return accuracy(test.y, model.predict(test).values)


def random_search(
    family: str,
    space: SearchSpace,
    train: LabeledFrame,
    base_config: Any = None,
) -> SearchResult:
    """
    Score each sampled configuration by ordered k-fold CV inside ``train``
    and return the best one; ties keep the earliest trial.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown model family {family!r}")
    kind = FAMILIES[family]
    base = base_config or kind.config()
    splits = ordered_kfold_indices(len(train), space.folds)
    bookkeeping = tuple(
        (tuple(int(i) for i in tr), tuple(int(i) for i in te)) for tr, te in splits
    )

    trials = []
    for index, params in enumerate(space.sample()):
        try:
            config = replace(base, **params)
            scores = []
            for fold_train, fold_test in splits:
                model = kind.model(config).fit(train.take(fold_train))
                scores.append(_fold_score(kind, model, train.take(fold_test)))
            trial = SearchTrial(
                index, params, float(np.mean(scores)), tuple(scores), folds=bookkeeping
            )
        except (OilsignalError, ValueError) as exc:
            logger.warning("Search trial %d %s failed: %s", index, params, exc)
            trial = SearchTrial(index, params, error=str(exc), folds=bookkeeping)
        trials.append(trial)

    scored = [trial for trial in trials if trial.score is not None]
    if not scored:
        raise SearchError(f"every {family} search trial failed")
    sign = 1.0 if kind.scoring == "mse" else -1.0
    best = min(scored, key=lambda trial: (sign * trial.score, trial.index))
    logger.info("Best %s configuration %s scored %.4f", family, best.params, best.score)
    return SearchResult(
        family, best.params, replace(base, **best.params), best.score, tuple(trials)
    )
