from dataclasses import replace

from django.core.management import CommandError

from core.commands import OilsignalCommand
from core.pipeline import load_prices, prepare, run_backtests
from core.reports import write_backtest


class Command(OilsignalCommand):
    help = "Train on the early block, trade the late block, write reports"

    config_flags = ("out", "model", "seed", "split")

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--model", help="model name or 'all'")
        parser.add_argument("--seed", type=int)
        parser.add_argument("--split", type=float, help="training fraction")
        parser.add_argument(
            "--search",
            action="store_true",
            help="tune kNN/RF/SVR by randomized search first",
        )

    def run_config(self, options):
        config = super().run_config(options)
        if options.get("search") and not config.search.enabled:
            config = replace(config, search=replace(config.search, enabled=True))
        return config

    def run(self, config, directory, options):
        prepared = prepare(load_prices(config.out), config)
        results = run_backtests(config, prepared)
        for name, outcome in results.outcomes.items():
            self.stdout.write(self.style.SUCCESS(f"Backtested {name}"))
            self.report_written(write_backtest(directory, outcome))
        for name, message in results.failures.items():
            self.stderr.write(f"{name} failed: {message}")
        if not results.outcomes:
            raise CommandError("every requested model failed")
