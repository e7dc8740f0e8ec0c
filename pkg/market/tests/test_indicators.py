import numpy as np
import pandas as pd
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from core.exceptions import InsufficientDataError
from market.indicators import (
    FEATURES,
    build_features,
    ema,
    macd,
    roc,
    rsi,
    sma,
    stochastic_k,
)
from market.tests.samples import prices_from_closes, sample_prices


def direct_rsi(prices, period):
    out = np.full(len(prices), np.nan)
    for t in range(period, len(prices)):
        moves = np.diff(prices[t - period: t + 1])
        up = moves[moves > 0].sum() / period
        down = -moves[moves < 0].sum() / period
        if down == 0:
            out[t] = 100.0
        else:
            out[t] = 100.0 - 100.0 / (1.0 + up / down)
    return out


def direct_ema(prices, window):
    k = 2.0 / (window + 1)
    out = np.full(len(prices), np.nan)
    out[window - 1] = np.mean(prices[:window])
    for t in range(window, len(prices)):
        out[t] = k * prices[t] + (1 - k) * out[t - 1]
    return out


def direct_k(high, low, close, period):
    out = np.full(len(close), np.nan)
    for t in range(period - 1, len(close)):
        hi = max(high[t - period + 1: t + 1])
        lo = min(low[t - period + 1: t + 1])
        out[t] = 50.0 if hi == lo else 100.0 * (close[t] - lo) / (hi - lo)
    return out


class MovingAverageTests(SimpleTestCase):
    def test_sma_pairs(self):
        values = sma([1, 2, 3, 4], 2).values

        self.assertTrue(np.isnan(values[0]))
        self.assertEqual(values[1:].tolist(), [1.5, 2.5, 3.5])

    def test_sma_full_window(self):
        values = sma([2, 4, 6, 8, 10], 5).values

        self.assertTrue(np.isnan(values[:4]).all())
        self.assertEqual(values[4], 6.0)

    def test_constant_series(self):
        for indicator in (sma, ema):
            result = indicator([7.0] * 10, 4)

            np.testing.assert_allclose(result.defined, 7.0)

    def test_ema_unit_window(self):
        self.assertEqual(ema([1, 2, 3], 1).values.tolist(), [1.0, 2.0, 3.0])

    def test_ema_recursion_by_hand(self):
        values = ema([22, 24, 26, 28], 3).values

        self.assertEqual(values[2], 24.0)
        self.assertEqual(values[3], 26.0)

    def test_window_longer_than_series(self):
        with self.assertRaises(InsufficientDataError):
            sma([1, 2], 3)


class RsiTests(SimpleTestCase):
    def test_rising_prices(self):
        np.testing.assert_allclose(rsi(np.arange(1.0, 31.0)).defined, 100.0)

    def test_falling_prices(self):
        np.testing.assert_allclose(rsi(np.arange(30.0, 0.0, -1.0)).defined, 0.0)

    def test_matches_direct_definition(self):
        prices = np.random.default_rng(3).uniform(50, 60, 30)

        np.testing.assert_allclose(
            rsi(prices, 14).values, direct_rsi(prices, 14), atol=1e-9
        )

    def test_bounds(self):
        values = rsi(sample_prices(n=200).close).defined

        self.assertTrue(((values >= 0) & (values <= 100)).all())


class StochasticTests(SimpleTestCase):
    def test_close_at_high_and_low(self):
        rising = prices_from_closes(np.arange(1.0, 21.0))
        frame = rising.frame.copy()
        frame["high"] = frame["close"]
        frame["low"] = frame["close"] - 0.5

        values = stochastic_k(type(rising)(frame), 5).defined
        np.testing.assert_allclose(values, 100.0)

        frame["low"] = frame["close"][::-1].to_numpy()
        frame["close"] = frame["low"]
        frame["high"] = frame["close"] + 0.5
        values = stochastic_k(type(rising)(frame), 5).defined
        np.testing.assert_allclose(values, 0.0)

    def test_flat_bars(self):
        flat = prices_from_closes([10.0] * 20)
        frame = flat.frame.copy()
        frame["high"] = frame["low"] = frame["close"]

        np.testing.assert_allclose(stochastic_k(type(flat)(frame), 14).defined, 50.0)

    def test_matches_direct_definition(self):
        series = sample_prices(n=1000, seed=11)

        np.testing.assert_allclose(
            stochastic_k(series, 14).values,
            direct_k(
                series.high.to_numpy(),
                series.low.to_numpy(),
                series.close.to_numpy(),
                14,
            ),
            atol=1e-9,
        )


class MacdTests(SimpleTestCase):
    def test_constant_prices(self):
        np.testing.assert_allclose(macd([5.0] * 40).defined, 0.0, atol=1e-12)

    def test_uptrend_positive(self):
        self.assertTrue((macd(np.arange(1.0, 61.0)).defined > 0).all())

    def test_matches_ema_difference(self):
        prices = np.random.default_rng(5).uniform(40, 80, 40)

        expected = direct_ema(prices, 12) - direct_ema(prices, 26)
        np.testing.assert_allclose(macd(prices).values, expected, atol=1e-9)

    def test_short_series(self):
        with self.assertRaises(InsufficientDataError):
            macd(np.arange(1.0, 27.0))


class RocTests(SimpleTestCase):
    def test_ten_percent(self):
        self.assertAlmostEqual(roc(np.linspace(100, 110, 10), 9).values[-1], 10.0)

    def test_constant_prices(self):
        np.testing.assert_allclose(roc([3.0] * 12, 9).defined, 0.0)

    def test_by_hand(self):
        self.assertEqual(roc([50, 60, 75], 2).values[-1], 50.0)


class IndicatorOracleTests(SimpleTestCase):
    def test_thousand_random_prices(self):
        series = sample_prices(n=1000, seed=21)
        close = series.close.to_numpy()

        np.testing.assert_allclose(
            rsi(close).values, direct_rsi(close, 14), atol=1e-9
        )
        np.testing.assert_allclose(
            macd(close).values,
            direct_ema(close, 12) - direct_ema(close, 26),
            atol=1e-9,
        )
        expected_roc = np.full(len(close), np.nan)
        expected_roc[9:] = 100 * (close[9:] - close[:-9]) / close[:-9]
        np.testing.assert_allclose(roc(close).values, expected_roc, atol=1e-9)

    @given(st.lists(st.floats(1, 500), min_size=30, max_size=60))
    @settings(max_examples=40, deadline=None)
    def test_indicators_are_causal(self, closes):
        closes = np.asarray(closes)
        full = rsi(closes).values
        cut = rsi(closes[:-1]).values

        np.testing.assert_array_equal(full[:-1], cut)


class BuildFeaturesTests(SimpleTestCase):
    def test_short_series(self):
        with self.assertRaises(InsufficientDataError):
            build_features(sample_prices(n=26))

    def test_rows_are_complete(self):
        frame = build_features(sample_prices(n=200))

        self.assertEqual(frame.features, FEATURES)
        self.assertFalse(frame.data.isna().any().any())
        self.assertTrue(set(frame.y) <= {0, 1})
        self.assertEqual(len(frame), 200 - 26)

    def test_roc_column_matches_default_period(self):
        series = sample_prices(n=200)
        frame = build_features(series)

        expected = roc(series.close, 9).to_series().reindex(frame.dates)
        np.testing.assert_allclose(frame.column("roc"), expected.to_numpy())

    def test_label_is_next_day_direction(self):
        series = sample_prices(n=100)
        frame = build_features(series)

        closes = series.close
        following = closes.shift(-1).reindex(frame.dates)
        expected = (following > closes.reindex(frame.dates)).astype(int)
        np.testing.assert_array_equal(frame.y, expected.to_numpy())
        self.assertIsInstance(frame.dates, pd.DatetimeIndex)
