"""Run an experiment sweep and write the results CSV."""

from mesh_qoe_scheduler.commands import BaseCommand, CommandError, load_config
from mesh_qoe_scheduler.harness import run_experiment, summarize


class Command(BaseCommand):
    """Every sweep value times every seed times every scheduler."""

    help = "Run a sweep and write one CSV row per (sweep value, scheduler, seed)."

    def add_arguments(self, parser):
        """Add the config, output and parallelism arguments."""
        parser.add_argument("--config", required=True, help="Experiment configuration (YAML or JSON).")
        parser.add_argument("--out", required=True, help="Results CSV.")
        parser.add_argument("--timings", help="Optional wall-clock and work-count CSV.")
        parser.add_argument("--summary", help="Optional per-(sweep value, scheduler) summary CSV.")
        parser.add_argument("--workers", type=int, help="Worker processes (default: from the configuration).")

    def handle(self, *args, **options):
        """Handle the execution of the command."""
        cfg = load_config(options["config"])
        workers = options.get("workers")
        if workers is not None and workers < 1:
            raise CommandError("--workers must be at least 1")
        rows = run_experiment(cfg, out=options["out"], timings=options.get("timings"), workers=workers)
        failed = sum(1 for row in rows if row.failed)
        self.stdout.write(f"Wrote {len(rows)} rows to {options['out']} ({failed} failed)")
        if options.get("summary"):
            summarize(rows).to_csv(options["summary"], index=False)
            self.stdout.write(f"Wrote summary to {options['summary']}")
