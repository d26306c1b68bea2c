"""Generate a random mesh topology."""

from mesh_qoe_scheduler.commands import BaseCommand, load_config, write_json
from mesh_qoe_scheduler.instance import build_network


class Command(BaseCommand):
    """Write the topology JSON of one replication's network."""

    help = "Generate a random connected mesh network."

    def add_arguments(self, parser):
        """Add the config, seed and output arguments."""
        parser.add_argument("--config", help="Experiment configuration (YAML or JSON).")
        parser.add_argument("--seed", type=int, default=0, help="Replication seed (default: 0).")
        parser.add_argument("--out", help="Write the topology here instead of stdout.")

    def handle(self, *args, **options):
        """Handle the execution of the command."""
        cfg = load_config(options.get("config"))
        network = build_network(cfg, options["seed"])
        write_json(network.to_dict(), options.get("out"), self.stdout)
