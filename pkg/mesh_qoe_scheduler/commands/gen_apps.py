"""Generate a problem instance: network plus applications."""

from mesh_qoe_scheduler.commands import BaseCommand, CommandError, load_config, write_json
from mesh_qoe_scheduler.instance import build_instance
from mesh_qoe_scheduler.network import NetworkGraph


class Command(BaseCommand):
    """Sample App Nodes and generate one DAG application per App Node."""

    help = "Generate applications (and a network unless --topology is given)."

    def add_arguments(self, parser):
        """Add the config, seed, topology and output arguments."""
        parser.add_argument("--config", help="Experiment configuration (YAML or JSON).")
        parser.add_argument("--seed", type=int, default=0, help="Replication seed (default: 0).")
        parser.add_argument("--topology", help="Use this topology JSON instead of generating a network.")
        parser.add_argument("--out", help="Write the instance here instead of stdout.")

    def handle(self, *args, **options):
        """Handle the execution of the command."""
        cfg = load_config(options.get("config"))
        network = None
        if options.get("topology"):
            try:
                with open(options["topology"], encoding="UTF-8") as file:
                    network = NetworkGraph.from_json(file.read())
            except FileNotFoundError as ex:
                # pylint: disable=raise-missing-from
                raise CommandError(str(ex))
            except (KeyError, ValueError) as ex:
                # pylint: disable=raise-missing-from
                raise CommandError(f"{options['topology']} is not a topology document: {ex}")
        instance = build_instance(cfg, options["seed"], network=network)
        write_json(instance.to_dict(), options.get("out"), self.stdout)
