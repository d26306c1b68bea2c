"""Summarize a results CSV."""

from mesh_qoe_scheduler.commands import BaseCommand, CommandError
from mesh_qoe_scheduler.errors import EmptyInput
from mesh_qoe_scheduler.harness import read_results, summarize


class Command(BaseCommand):
    """Per-(sweep value, scheduler) means with 95% half-widths."""

    help = "Summarize a results CSV."

    def add_arguments(self, parser):
        """Add the input and output arguments."""
        parser.add_argument("--results", required=True, help="Results CSV written by `sweep`.")
        parser.add_argument("--out", help="Write the summary CSV here instead of stdout.")

    def handle(self, *args, **options):
        """Handle the execution of the command."""
        try:
            summary = summarize(read_results(options["results"]))
        except FileNotFoundError as ex:
            # pylint: disable=raise-missing-from
            raise CommandError(str(ex))
        except EmptyInput as ex:
            # pylint: disable=raise-missing-from
            raise CommandError(str(ex))
        if options.get("out"):
            summary.to_csv(options["out"], index=False)
        else:
            self.stdout.write(summary.to_csv(index=False))
