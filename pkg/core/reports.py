"""Artifact layout under the output directory."""
import logging
import math

import pandas as pd

from core.exceptions import DataError
from core.pipeline import BacktestOutcome
from core.writers import OutputDirectory
from learning.serializers import SearchResultSerializer
from trading.evaluation import cv_table
from trading.serializers import (
    ClassReportSerializer,
    ConfusionMatrixSerializer,
    CvResultSerializer,
    DrawdownProfitSerializer,
    ExtremeAccuracySerializer,
    PerformanceReportSerializer,
    PermutationImportanceSerializer,
)

logger = logging.getLogger(__name__)

BACKTEST_DIR = "backtest"
CV_DIR = "cv"
REPORT_DIR = "report"
BUY_AND_HOLD = "buy_and_hold"


def write_backtest(directory: OutputDirectory, outcome: BacktestOutcome) -> list:
    base = (BACKTEST_DIR, outcome.name)
    written = []
    for kind, curve in outcome.curves.items():
        written.append(
            directory.write_csv(curve.to_frame(), *base, f"equity_{kind}.csv")
        )

    written.append(
        directory.write_json(
            {
                "model": outcome.name,
                "strategies": {
                    kind: PerformanceReportSerializer(report).data
                    for kind, report in outcome.reports.items()
                },
            },
            *base,
            "performance.json",
        )
    )
    written.append(
        directory.write_json(
            {
                "model": outcome.name,
                "accuracy": outcome.report.accuracy,
                "confusion": ConfusionMatrixSerializer(outcome.confusion).data,
                "classification_report": ClassReportSerializer(outcome.report).data,
                "extreme_accuracy": ExtremeAccuracySerializer(outcome.extreme).data,
                "importance": (
                    PermutationImportanceSerializer(outcome.importance).data
                    if outcome.importance
                    else None
                ),
                "drawdown_profit": {
                    kind: DrawdownProfitSerializer(report).data
                    for kind, report in outcome.reports.items()
                },
            },
            *base,
            "evaluation.json",
        )
    )

    signals = pd.DataFrame(
        {"signal": outcome.signals.values, "truth": outcome.truth.values},
        index=outcome.signals.dates.strftime("%Y-%m-%d"),
    )
    signals.index.name = "date"
    written.append(directory.write_csv(signals, *base, "signals.csv"))
    written.append(directory.write_json(outcome.model.to_dict(), *base, "model.json"))
    if outcome.search is not None:
        written.append(
            directory.write_json(
                SearchResultSerializer(outcome.search).data, *base, "search.json"
            )
        )
    return written


def write_cv(directory: OutputDirectory, results: dict) -> list:
    return [
        directory.write_csv(cv_table(results), CV_DIR, "cv.csv", index=False),
        directory.write_json(
            {name: CvResultSerializer(result).data for name, result in results.items()},
            CV_DIR,
            "cv.json",
        ),
    ]


def _metric(value):
    if value == "Infinity":
        return math.inf
    if value == "-Infinity":
        return -math.inf
    return value


def backtested_models(directory: OutputDirectory) -> list[str]:
    root = directory.path(BACKTEST_DIR)
    if not root.is_dir():
        raise DataError(f"missing input: {root}")
    return sorted(path.name for path in root.iterdir() if path.is_dir())


def write_report(directory: OutputDirectory) -> list:
    """
    Consolidate every backtested model into one strategy x model table,
    with a single buy-and-hold row, plus two-column plot series.
    """
    models = backtested_models(directory)
    missing = [
        str(directory.path(BACKTEST_DIR, name, "performance.json"))
        for name in models
        if not directory.path(BACKTEST_DIR, name, "performance.json").is_file()
    ]
    if not models or missing:
        raise DataError(
            "missing inputs: "
            + (", ".join(missing) or str(directory.path(BACKTEST_DIR, "*")))
        )

    rows, written, benchmark = [], [], None
    for name in models:
        strategies = directory.read_json(BACKTEST_DIR, name, "performance.json")[
            "strategies"
        ]
        for kind, metrics in strategies.items():
            row = {
                "strategy": kind,
                "model": name,
                "sharpe_ratio": _metric(metrics["sharpe_ratio"]),
                "profit_factor": _metric(metrics["profit_factor"]),
                "max_drawdown": metrics["max_drawdown"],
            }
            if kind == BUY_AND_HOLD:
                if benchmark is None:
                    benchmark = {**row, "model": BUY_AND_HOLD}
                continue
            rows.append(row)

            equity = directory.read_csv(BACKTEST_DIR, name, f"equity_{kind}.csv")
            written.append(
                directory.write_csv(
                    equity[["date", "cumulative"]].rename(
                        columns={"cumulative": "value"}
                    ),
                    REPORT_DIR,
                    f"{name}_equity_{kind}.csv",
                    index=False,
                )
            )
            monthly = pd.DataFrame(
                {
                    "date": list(metrics["monthly_returns"]),
                    "value": [_metric(v) for v in metrics["monthly_returns"].values()],
                }
            )
            written.append(
                directory.write_csv(
                    monthly, REPORT_DIR, f"{name}_monthly_{kind}.csv", index=False
                )
            )
    if benchmark is not None:
        rows.append(benchmark)
    table = pd.DataFrame(
        rows,
        columns=["strategy", "model", "sharpe_ratio", "profit_factor", "max_drawdown"],
    )
    written.insert(
        0, directory.write_csv(table, REPORT_DIR, "performance.csv", index=False)
    )
    logger.info("Report covers %d models", len(models))
    return written
