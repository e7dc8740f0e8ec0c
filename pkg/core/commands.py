from django.core.management import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from core.config import RunConfig, load_run_config
from core.exceptions import OilsignalError
from core.writers import OutputDirectory


class OilsignalCommand(BaseCommand):
    """Shared flags and error translation for the pipeline commands."""

    # run-config keys this command accepts as flags
    config_flags = ("out",)

    def add_arguments(self, parser):
        parser.add_argument("--config", help="JSON run config (schema_version 1)")
        parser.add_argument("--out", help="output directory")

    def run_config(self, options) -> RunConfig:
        overrides = {key: options.get(key) for key in self.config_flags}
        return load_run_config(options.get("config"), **overrides)

    def handle(self, *args, **options):
        try:
            config = self.run_config(options)
            self.run(config, OutputDirectory(config.out), options)
        except ValidationError as exc:
            raise CommandError(f"invalid configuration: {exc.detail}") from exc
        except OilsignalError as exc:
            raise CommandError(str(exc)) from exc

    def run(self, config: RunConfig, directory: OutputDirectory, options):
        raise NotImplementedError

    def report_written(self, paths):
        for path in paths:
            self.stdout.write(f"  {path}")
