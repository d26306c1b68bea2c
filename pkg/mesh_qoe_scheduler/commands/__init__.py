"""Command classes behind the `mesh-qoe` sub-commands.

Each module in this package defines a `Command` class; the module name with
underscores replaced by dashes is the sub-command name.
"""

import importlib
import json
import pkgutil
import sys
from typing import Dict, Optional, TextIO

from mesh_qoe_scheduler.config import ExperimentConfig, load_experiment_config
from mesh_qoe_scheduler.errors import InvalidConfig, InvalidInstance
from mesh_qoe_scheduler.instance import Instance


class CommandError(Exception):
    """Raised by a command to stop with a one-line message and a non-zero exit status."""


class OutputWrapper:
    """Write lines to a text stream."""

    def __init__(self, out: TextIO):
        """Wrap `out`."""
        self._out = out

    def write(self, message: str = "", ending: str = "\n"):
        """Write `message` followed by `ending` unless it already ends with it."""
        if ending and not message.endswith(ending):
            message += ending
        self._out.write(message)


class BaseCommand:
    """Base class of the sub-commands."""

    help = ""

    def __init__(self, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None):
        """Create the command with optional output streams."""
        self.stdout = OutputWrapper(stdout or sys.stdout)
        self.stderr = OutputWrapper(stderr or sys.stderr)

    def add_arguments(self, parser):
        """Add the command's arguments to its argparse sub-parser."""

    def handle(self, *args, **options):
        """Run the command."""
        raise NotImplementedError("subclasses of BaseCommand must provide a handle() method")


def commands() -> Dict[str, type]:
    """Sub-command name to command class, in name order."""
    found = {}
    for module_info in pkgutil.iter_modules(__path__):
        module = importlib.import_module(f"{__name__}.{module_info.name}")
        command = getattr(module, "Command", None)
        if command is not None:
            found[module_info.name.replace("_", "-")] = command
    return dict(sorted(found.items()))


def load_config(filename: Optional[str]) -> ExperimentConfig:
    """Experiment configuration from a file, or the packaged defaults."""
    try:
        if not filename:
            return load_experiment_config({})
        if filename == "-":
            return load_experiment_config(sys.stdin.read())
        return load_experiment_config(filename)
    except FileNotFoundError as ex:
        # pylint: disable=raise-missing-from
        raise CommandError(str(ex))
    except InvalidConfig as ex:
        # pylint: disable=raise-missing-from
        raise CommandError(str(ex))


def load_instance(filename: str) -> Instance:
    """Instance from a JSON file."""
    try:
        return Instance.load(filename)
    except FileNotFoundError as ex:
        # pylint: disable=raise-missing-from
        raise CommandError(str(ex))
    except (KeyError, ValueError, InvalidInstance) as ex:
        # pylint: disable=raise-missing-from
        raise CommandError(f"{filename} is not an instance document: {ex}")


def write_json(document, filename: Optional[str], stdout: OutputWrapper):
    """Write a JSON document to `filename`, or to the command's stdout."""
    text = json.dumps(document, indent=2)
    if filename:
        with open(filename, "w", encoding="UTF-8") as file:
            file.write(text + "\n")
    else:
        stdout.write(text)
