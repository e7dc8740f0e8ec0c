"""
Stages shared by the management commands: prepare the feature frame,
build each model from the run config, fit, predict and evaluate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from django.conf import settings

from core.config import RunConfig
from core.exceptions import DataError, OilsignalError
from core.seeding import derive_seed
from core.serializers import CV_MODEL_NAMES, SEARCHABLE_MODEL_NAMES
from econometrics.arma_garch import ArmaGarchSignalModel
from learning.forest import ForestModel, RfConfig
from learning.knn import KnnConfig, KnnModel
from learning.neural import LstmSignalModel, TrainConfig
from learning.search import FAMILIES, SearchResult, SearchSpace, random_search
from learning.svr import SvrConfig, SvrSignalModel
from market.data import chrono_split, load_csv, log_returns
from market.indicators import build_features
from market.series import LabeledFrame, PriceSeries, ReturnSeries, SignalSeries
from trading.backtest import (
    CrossSignalModel,
    EquityCurve,
    PerformanceReport,
    StrategyKind,
    performance,
    simulate,
)
from trading.evaluation import (
    ClassReport,
    ConfusionMatrix,
    CvResult,
    ExtremeAccuracy,
    PermutationImportance,
    classification_report,
    confusion,
    extreme_accuracy,
    permutation_importance,
    run_cv,
)

logger = logging.getLogger(__name__)

PRICES_FILE = "prices.csv"

# models that read the indicator features
FEATURE_MODEL_NAMES = ("rf", "knn", "svr")


@dataclass(frozen=True, eq=False)
class PreparedData:
    prices: PriceSeries
    returns: ReturnSeries
    frame: LabeledFrame
    train: LabeledFrame
    test: LabeledFrame


def load_prices(out_dir) -> PriceSeries:
    path = out_dir / PRICES_FILE
    if not path.is_file():
        raise DataError(f"{path} not found; run ingest first")
    return load_csv(path)


def prepare(prices: PriceSeries, config: RunConfig) -> PreparedData:
    """
    Feature rows start once every model has the history it needs, so all
    models share one test window.
    """
    frame = build_features(prices, settings.OILSIGNAL["INDICATORS"])
    needed = max(
        config.section("lstm")["lag"] - 1,
        config.section("cross_signal")["slow"] - 1,
    )
    positions = prices.dates.get_indexer(frame.dates)
    frame = frame.take(np.flatnonzero(positions >= needed))
    train, test = chrono_split(frame, config.split)
    logger.info(
        "Prepared %d feature rows: %d train, %d test", len(frame), len(train), len(test)
    )
    return PreparedData(prices, log_returns(prices), frame, train, test)


def make_model(name: str, config: RunConfig, prepared: PreparedData, base=None):
    seed = derive_seed(config.seed, name)
    if name == "arma_garch":
        section = config.section("arma_garch")
        return ArmaGarchSignalModel(
            p=section["p"],
            q=section["q"],
            n=section["n"],
            m=section["m"],
            innovation=section["innovation"],
            select=section["select_order"],
            p_max=section["p_max"],
            q_max=section["q_max"],
            max_iter=section["max_iter"],
            tol=section["tol"],
        )
    if name == "cross_signal":
        section = config.section("cross_signal")
        return CrossSignalModel(prepared.prices.close, section["fast"], section["slow"])
    if name == "lstm":
        section = config.section("lstm")
        lag = section.pop("lag")
        section["hidden_sizes"] = tuple(section["hidden_sizes"])
        section["dense_sizes"] = tuple(section["dense_sizes"])
        return LstmSignalModel(
            prepared.prices.close, TrainConfig(**section, seed=seed), lag
        )
    if name == "knn":
        return KnnModel(base or KnnConfig(**config.section("knn")))
    if name == "rf":
        return ForestModel(base or RfConfig(**config.section("rf"), seed=seed))
    if name == "svr":
        return SvrSignalModel(base or SvrConfig(**config.section("svr")))
    raise ValueError(f"unknown model {name!r}")


def base_config(name: str, config: RunConfig):
    if name == "rf":
        return RfConfig(**config.section("rf"), seed=derive_seed(config.seed, name))
    return FAMILIES[name].config(**config.section(name))


def search_model(
    name: str, config: RunConfig, prepared: PreparedData
) -> tuple[Any, SearchResult]:
    space = SearchSpace(
        candidates={
            key: tuple(values) for key, values in config.search.spaces[name].items()
        },
        budget=config.search.budget,
        folds=config.search.folds,
        seed=derive_seed(config.seed, f"search:{name}"),
    )
    result = random_search(name, space, prepared.train, base_config(name, config))
    return make_model(name, config, prepared, base=result.best_config), result


@dataclass(eq=False)
class BacktestOutcome:
    name: str
    model: Any
    signals: SignalSeries
    truth: SignalSeries
    curves: dict[str, EquityCurve]
    reports: dict[str, PerformanceReport]
    confusion: ConfusionMatrix
    report: ClassReport
    extreme: ExtremeAccuracy
    importance: Optional[PermutationImportance] = None
    search: Optional[SearchResult] = None


def strategy_kinds(config: RunConfig) -> list[StrategyKind]:
    kinds = [StrategyKind(kind) for kind in config.strategies]
    if StrategyKind.BUY_AND_HOLD not in kinds:
        kinds.append(StrategyKind.BUY_AND_HOLD)
    return kinds


def backtest_model(
    name: str, config: RunConfig, prepared: PreparedData
) -> BacktestOutcome:
    search = None
    if config.search.enabled and name in SEARCHABLE_MODEL_NAMES:
        model, search = search_model(name, config, prepared)
    else:
        model = make_model(name, config, prepared)

    test = prepared.test
    model.fit(prepared.train)
    signals = model.predict(test)
    truth = SignalSeries(test.dates, test.y, signals.alphabet)

    curves = {
        kind.value: simulate(signals, prepared.returns, kind)
        for kind in strategy_kinds(config)
    }
    matrix = confusion(truth, signals)
    importance = None
    if name in FEATURE_MODEL_NAMES:
        importance = permutation_importance(
            model,
            test,
            settings.OILSIGNAL["PERMUTATION_REPETITIONS"],
            derive_seed(config.seed, f"permutation:{name}"),
        )
    return BacktestOutcome(
        name=name,
        model=model,
        signals=signals,
        truth=truth,
        curves=curves,
        reports={kind: performance(curve) for kind, curve in curves.items()},
        confusion=matrix,
        report=classification_report(matrix),
        extreme=extreme_accuracy(
            test.column("next_return"),
            truth,
            signals,
            settings.OILSIGNAL["EXTREME_LEVELS"],
        ),
        importance=importance,
        search=search,
    )


@dataclass
class RunResults:
    outcomes: dict = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)


def run_backtests(config: RunConfig, prepared: PreparedData) -> RunResults:
    """One model's failure is logged and recorded; the others carry on."""
    results = RunResults()
    for name in config.models:
        logger.info("Backtesting %s", name)
        try:
            results.outcomes[name] = backtest_model(name, config, prepared)
        except (OilsignalError, ValueError) as exc:
            logger.error("Model %s failed: %s", name, exc)
            results.failures[name] = str(exc)
    return results


def cross_validate(config: RunConfig, prepared: PreparedData) -> RunResults:
    results = RunResults()
    for name in config.models:
        if name not in CV_MODEL_NAMES:
            if config.model != "all":
                results.failures[name] = f"{name} does not support cross-validation"
            continue
        logger.info("Cross-validating %s with k=%d", name, config.k)
        try:
            result: CvResult = run_cv(
                lambda: make_model(name, config, prepared),
                prepared.frame,
                prepared.returns,
                config.k,
            )
        except (OilsignalError, ValueError) as exc:
            logger.error("Cross-validation of %s failed: %s", name, exc)
            results.failures[name] = str(exc)
            continue
        if not result.completed:
            results.failures[name] = "every fold failed"
        results.outcomes[name] = result
    return results
