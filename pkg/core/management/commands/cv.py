from django.core.management import CommandError

from core.commands import OilsignalCommand
from core.pipeline import cross_validate, load_prices, prepare
from core.reports import write_cv


class Command(OilsignalCommand):
    help = "Ordered k-fold cross-validation of the learned models"

    config_flags = ("out", "model", "seed", "k")

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--model", help="rf, knn, svr, lstm or 'all'")
        parser.add_argument("--k", type=int, help="number of folds")
        parser.add_argument("--seed", type=int)

    def run(self, config, directory, options):
        prepared = prepare(load_prices(config.out), config)
        results = cross_validate(config, prepared)
        for name, message in results.failures.items():
            self.stderr.write(f"{name} failed: {message}")
        if not results.outcomes:
            raise CommandError("no model could be cross-validated")
        self.stdout.write(
            self.style.SUCCESS(f"Cross-validated {', '.join(results.outcomes)}")
        )
        self.report_written(write_cv(directory, results.outcomes))
