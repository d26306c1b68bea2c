"""Run one scheduler on one instance and print its metrics."""

from dataclasses import asdict

from mesh_qoe_scheduler.baselines import get_scheduler, scheduler_names
from mesh_qoe_scheduler.commands import BaseCommand, load_config, load_instance, write_json
from mesh_qoe_scheduler.engine import evaluate
from mesh_qoe_scheduler.instance import build_instance
from mesh_qoe_scheduler.logging import RunLog


class Command(BaseCommand):
    """Schedule, evaluate and report a single run."""

    help = "Run one scheduler and print the metrics JSON."

    def add_arguments(self, parser):
        """Add the scheduler, instance source and output arguments."""
        parser.add_argument("--scheduler", required=True, choices=scheduler_names())
        parser.add_argument("--config", help="Experiment configuration (YAML or JSON).")
        parser.add_argument("--seed", type=int, default=0, help="Replication seed (default: 0).")
        parser.add_argument("--instance", help="Schedule this instance JSON instead of generating one.")
        parser.add_argument("--out", help="Write the assignment JSON here.")
        parser.add_argument("--trace", help="Write the per-round trace JSON here.")

    def handle(self, *args, **options):
        """Handle the execution of the command."""
        cfg = load_config(options.get("config"))
        if options.get("instance"):
            instance = load_instance(options["instance"])
        else:
            instance = build_instance(cfg, options["seed"])

        run_log = RunLog() if options.get("trace") else None
        scheduler = get_scheduler(options["scheduler"])(cfg.scheduler, run_log=run_log)
        assignment = scheduler.schedule(instance.apps, instance.network)
        results, record = evaluate(assignment, instance.network, instance.apps, cfg.cost)

        if options.get("out"):
            write_json(assignment.to_dict(), options["out"], self.stdout)
        if run_log is not None:
            write_json(run_log.as_dict(), options["trace"], self.stdout)
        write_json(
            {
                "scheduler": scheduler.name,
                "seed": options["seed"],
                "metrics": record.to_dict(),
                "rounds": scheduler.rounds,
                "candidate_evaluations": scheduler.candidate_evaluations,
                "work": scheduler.work,
                "apps": [asdict(results[app_id]) for app_id in sorted(results)],
            },
            None,
            self.stdout,
        )
