"""Exhaustively solve a tiny instance."""

from dataclasses import asdict

from mesh_qoe_scheduler.commands import BaseCommand, load_config, load_instance, write_json
from mesh_qoe_scheduler.oracle import oracle_gaps, oracle_optimum


class Command(BaseCommand):
    """Print the optimum average QoE cost and one optimal assignment."""

    help = "Find the optimal schedule of a tiny instance by exhaustive search."

    def add_arguments(self, parser):
        """Add the instance, config and comparison arguments."""
        parser.add_argument("--instance", required=True, help="Instance JSON.")
        parser.add_argument("--config", help="Configuration supplying cost parameters and oracle limits.")
        parser.add_argument("--compare", action="store_true", help="Also run every scheduler and report its gap.")
        parser.add_argument("--workers", type=int, default=1, help="Worker processes (default: 1).")

    def handle(self, *args, **options):
        """Handle the execution of the command."""
        cfg = load_config(options.get("config"))
        instance = load_instance(options["instance"])
        if options.get("compare"):
            optimum, gaps = oracle_gaps(instance, cfg.scheduler, cfg.oracle)
            document = optimum.to_dict()
            document["schedulers"] = [asdict(gap) for gap in gaps]
        else:
            document = oracle_optimum(
                instance.apps, instance.network, cfg.cost, cfg.oracle, workers=options.get("workers") or 1
            ).to_dict()
        write_json(document, None, self.stdout)
