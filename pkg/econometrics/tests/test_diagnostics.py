from django.test import SimpleTestCase

from econometrics.diagnostics import diagnose
from econometrics.serializers import (
    DescriptiveSummarySerializer,
    GarchFitSerializer,
)
from econometrics.tests.samples import sample_garch_prices
from market.tests.samples import sample_prices
from trading.backtest import max_drawdown


class DiagnoseTests(SimpleTestCase):
    def setUp(self):
        self.prices = sample_garch_prices(n=700, seed=1)

    def test_tables(self):
        result = diagnose(
            self.prices, max_lag=20, garch_options={"q": 0, "innovation": "normal"}
        )

        self.assertEqual(result.close.count, 700)
        self.assertEqual(result.log_return.count, 699)
        self.assertEqual(list(result.correlogram["lag"]), list(range(1, 21)))
        self.assertEqual(set(result.qq), {"normal", "student_t"})
        self.assertEqual(set(result.adf), {"close", "log_return"})
        self.assertTrue(result.adf["log_return"].unit_root_rejected)
        self.assertIsNotNone(result.garch)
        self.assertEqual([box.lag for box in result.ljung_box], [10, 20, 30])

    def test_drawdown_and_overlay(self):
        result = diagnose(self.prices, garch_options={"q": 0})

        self.assertTrue((result.drawdown["drawdown"] <= 0).all())
        self.assertEqual(result.drawdown.index[0], "2015-01-01")
        self.assertAlmostEqual(
            result.drawdown["drawdown"].min(), max_drawdown(self.prices.close)[0]
        )
        self.assertEqual(result.drawdown["drawdown"].iloc[0], 0.0)
        overlay = result.overlay["sma"]
        self.assertTrue(overlay.iloc[:199].isna().all())
        self.assertAlmostEqual(
            overlay.iloc[199], self.prices.close.iloc[:200].mean()
        )

    def test_failed_fit_is_skipped(self):
        prices = sample_prices(n=120)

        with self.assertLogs("econometrics.diagnostics", "WARNING"):
            result = diagnose(prices, max_lag=10)

        self.assertIsNone(result.garch)
        self.assertEqual(result.ljung_box, ())

    def test_serialized_summary(self):
        result = diagnose(self.prices, garch_options={"q": 0})

        summary = DescriptiveSummarySerializer(result.close).data
        self.assertEqual(summary["count"], 700)
        self.assertIn("kurtosis", summary)
        garch = GarchFitSerializer(result.garch).data
        self.assertLess(garch["persistence"], 1)
