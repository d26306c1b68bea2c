"""Entry point of the `mesh-qoe` command line."""

import argparse
import sys
from typing import Optional, Sequence

from mesh_qoe_scheduler import __version__
from mesh_qoe_scheduler.commands import CommandError, commands
from mesh_qoe_scheduler.errors import MeshSchedulerError
from mesh_qoe_scheduler.logging import configure_logging


def build_parser(stdout=None, stderr=None) -> argparse.ArgumentParser:
    """Parser with one sub-parser per command class."""
    parser = argparse.ArgumentParser(prog="mesh-qoe", description="Mesh network DAG scheduling experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="Log level; overrides MESH_QOE_LOG_LEVEL.")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name, command_class in commands().items():
        command = command_class(stdout=stdout, stderr=stderr)
        subparser = subparsers.add_parser(name, help=command.help, description=command.help)
        command.add_arguments(subparser)
        subparser.set_defaults(command=command)
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Parse `argv`, run the selected command and return the exit status."""
    options = vars(build_parser(stdout, stderr).parse_args(argv))
    configure_logging(options.pop("log_level", None))
    command = options.pop("command")
    options.pop("subcommand", None)
    try:
        command.handle(**options)
    except (CommandError, MeshSchedulerError) as ex:
        message = str(ex).splitlines() or [ex.__class__.__name__]
        command.stderr.write(f"Error: {message[0]}")
        for line in message[1:]:
            command.stderr.write(line)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
