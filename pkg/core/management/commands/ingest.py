from django.conf import settings
from django.core.management import CommandError

from core.commands import OilsignalCommand
from core.pipeline import PRICES_FILE
from market.data import clean, load_source


class Command(OilsignalCommand):
    help = "Load OHLCV prices from a CSV path or URL and write a cleaned copy"

    config_flags = ("out", "source")

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--source", help="CSV file path or http(s) URL")

    def run(self, config, directory, options):
        if not config.source:
            raise CommandError("no price source given (--source or config)")
        raw = load_source(config.source, settings.OILSIGNAL["FETCH_TIMEOUT"])
        cleaned = clean(raw)
        dropped = len(raw) - len(cleaned)
        written = [
            directory.write_csv(cleaned.to_csv_frame(), PRICES_FILE),
            directory.write_json(
                {
                    "rows_read": len(raw),
                    "rows_dropped": dropped,
                    "rows_written": len(cleaned),
                    "first_date": cleaned.dates[0].strftime("%Y-%m-%d"),
                    "last_date": cleaned.dates[-1].strftime("%Y-%m-%d"),
                },
                "ingest.json",
            ),
        ]
        self.stdout.write(
            self.style.SUCCESS(
                f"Ingested {len(cleaned)} rows ({dropped} dropped)"
            )
        )
        self.report_written(written)
