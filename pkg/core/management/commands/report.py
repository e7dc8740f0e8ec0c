from core.commands import OilsignalCommand
from core.reports import write_report


class Command(OilsignalCommand):
    help = "Consolidate backtest results into one comparison table"

    def run(self, config, directory, options):
        written = write_report(directory)
        self.stdout.write(self.style.SUCCESS("Report written"))
        self.report_written(written)
