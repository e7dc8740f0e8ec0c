import numpy as np
import pandas as pd

from market.series import Alphabet, ReturnSeries, SignalSeries


def sample_returns(**params) -> ReturnSeries:
    defaults = {"n": 100, "seed": 0, "scale": 0.01, "start": "2020-01-01"}
    defaults.update(params)
    rng = np.random.default_rng(defaults["seed"])
    values = rng.normal(0.0, defaults["scale"], defaults["n"])
    return returns_from(values, defaults["start"])


def returns_from(values, start="2020-01-01") -> ReturnSeries:
    return ReturnSeries(pd.bdate_range(start, periods=len(values)), values)


def signals_for(returns: ReturnSeries, values, alphabet=Alphabet.BINARY):
    """Signals dated one trading day before each of ``returns``' days."""
    dates = returns.dates[:-1]
    return SignalSeries(dates, np.asarray(values)[: len(dates)], alphabet)


def perfect_signals(returns: ReturnSeries) -> SignalSeries:
    """Signals knowing the sign of the following day's return."""
    return signals_for(returns, (returns.values[1:] > 0).astype(int))
