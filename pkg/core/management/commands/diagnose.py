from django.conf import settings

from core.commands import OilsignalCommand
from core.pipeline import load_prices
from econometrics.diagnostics import diagnose
from econometrics.serializers import (
    AdfResultSerializer,
    DescriptiveSummarySerializer,
    GarchFitSerializer,
    JarqueBeraSerializer,
    LjungBoxSerializer,
)

DIAGNOSTICS_DIR = "diagnostics"


class Command(OilsignalCommand):
    help = "Descriptive statistics, unit-root and residual checks on the prices"

    def run(self, config, directory, options):
        section = settings.OILSIGNAL["DIAGNOSTICS"]
        garch = config.section("arma_garch")
        result = diagnose(
            load_prices(config.out),
            max_lag=section["max_lag"],
            ljung_box_lags=section["ljung_box_lags"],
            qq_df=section["qq_df"],
            overlay_window=section["sma_overlay"],
            garch_options={
                key: garch[key]
                for key in ("p", "q", "n", "m", "innovation", "max_iter", "tol")
            },
        )
        summary = {
            "describe": {
                "close": DescriptiveSummarySerializer(result.close).data,
                "log_return": DescriptiveSummarySerializer(result.log_return).data,
            },
            "jarque_bera": {
                name: JarqueBeraSerializer(test).data
                for name, test in result.jarque_bera.items()
            },
            "adf": {
                name: AdfResultSerializer(test).data
                for name, test in result.adf.items()
            },
            "arma_garch": (
                GarchFitSerializer(result.garch).data if result.garch else None
            ),
            "ljung_box": LjungBoxSerializer(result.ljung_box, many=True).data,
        }
        written = [
            directory.write_json(summary, DIAGNOSTICS_DIR, "summary.json"),
            directory.write_csv(
                result.correlogram, DIAGNOSTICS_DIR, "correlogram.csv", index=False
            ),
            directory.write_csv(result.drawdown, DIAGNOSTICS_DIR, "drawdown.csv"),
            directory.write_csv(result.overlay, DIAGNOSTICS_DIR, "sma_overlay.csv"),
        ]
        for reference, points in result.qq.items():
            written.append(
                directory.write_csv(
                    points, DIAGNOSTICS_DIR, f"qq_{reference}.csv", index=False
                )
            )
        self.stdout.write(self.style.SUCCESS("Diagnostics written"))
        self.report_written(written)
