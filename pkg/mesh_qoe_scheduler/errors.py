"""Module containing error Exception classes specific to the mesh QoE scheduler."""

from typing import Iterable, Optional


class MeshSchedulerError(Exception):
    """Base class for every error raised by the scheduler package."""


class InvalidConfig(MeshSchedulerError):
    """Exception indicating a configuration failed validation checks.

    An `InvalidConfig` can be raised by a single `validate_` method of an
    `ExperimentContext`, or by `Context.validate` which collects all of the
    individual errors into one exception listing every problem.
    """

    def __init__(self, message: str = "", problems: Optional[Iterable[str]] = None):
        """Initialize the error with a message and an optional list of problems.

        Args:
            message (str): Summary of the failure.
            problems (Iterable[str], optional): Individual validation messages.
        """
        super().__init__(message)
        self.message = message
        self.problems = list(problems or [])

    def __str__(self) -> str:
        """One line per problem, preceded by the summary message."""
        msg = []
        if self.message:
            msg.append(self.message)
        for problem in self.problems:
            msg.append(f"  - {problem}")
        return "\n".join(msg)


class ConnectivityFailure(MeshSchedulerError):
    """Raised when no connected placement was found within the retry bound."""


class Unreachable(MeshSchedulerError):
    """Raised when a route between two nodes cannot be found."""


class CycleDetected(MeshSchedulerError):
    """Raised when a task graph that must be acyclic contains a cycle."""


class BudgetExceeded(MeshSchedulerError):
    """Raised when an exhaustive search would exceed its configured limits."""


class EmptyInput(MeshSchedulerError):
    """Raised when an aggregation receives no rows."""


class InvalidInstance(MeshSchedulerError):
    """Raised when an instance document does not describe a usable problem."""


class UnknownScheduler(MeshSchedulerError):
    """Raised when a scheduler name is not registered."""


class PlacementError(MeshSchedulerError):
    """Parent class for all errors tied to placing a task on a node."""

    def __init__(self, message: str, app_id: Optional[int] = None, task: Optional[int] = None, node=None):
        """Initialize a PlacementError with the placement that generated it.

        Args:
            message (str): What went wrong.
            app_id (int, optional): Application of the offending task.
            task (int, optional): Index of the offending task within its application.
            node (int, optional): Node the task was being placed on.
        """
        super().__init__(message)
        self.message = message
        self.app_id = app_id
        self.task = task
        self.node = node

    @property
    def placement_str(self) -> str:
        """User-friendly description of the placement."""
        parts = []
        if self.app_id is not None:
            parts.append(f"App {self.app_id}")
        if self.task is not None:
            parts.append(f"task {self.task}")
        if self.node is not None:
            parts.append(f"on node {self.node}")
        return " ".join(parts)

    def __str__(self) -> str:
        """Error message with placement context."""
        placement = self.placement_str
        if placement:
            return f"{placement}: {self.message}"
        return self.message


class InvalidAssignment(PlacementError):
    """Raised when an assignment violates exactly-once, precedence or owner pinning."""


class PredecessorUnplaced(InvalidAssignment):
    """Raised when a task is placed before one of its predecessors."""


class OwnerViolation(InvalidAssignment):
    """Raised when a source task is placed away from its owner node."""
