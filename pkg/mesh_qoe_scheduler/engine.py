"""Placement engine: FCFS lanes, task outcomes and schedule metrics.

Every node runs three lanes, one per resource type. Tasks of different
types run concurrently on a node while tasks of the same type queue in the
order they were placed. A queued task whose input data has not arrived
holds up the tasks behind it. Zero-work tasks take their turn like any other.
"""

import json
from dataclasses import asdict, dataclass, fields
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from mesh_qoe_scheduler.apps import AppDag, ResourceType
from mesh_qoe_scheduler.config import CostParams
from mesh_qoe_scheduler.errors import InvalidAssignment, OwnerViolation, PredecessorUnplaced
from mesh_qoe_scheduler.network import NetworkGraph
from mesh_qoe_scheduler.qoe import accuracy_cost, latency_cost, qoe_cost

TaskKey = Tuple[int, int]


@dataclass(frozen=True)
class Placement:
    """Task `task` of application `app_id` runs on node `node`."""

    app_id: int
    task: int
    node: int


class Assignment:
    """Ordered placement records; the order is the dispatch (and lane) order."""

    def __init__(self, placements: Iterable[Placement] = ()):
        """Store the placements in order."""
        self.placements: Tuple[Placement, ...] = tuple(placements)

    def __iter__(self) -> Iterator[Placement]:
        """Iterate over placements in dispatch order."""
        return iter(self.placements)

    def __len__(self):
        """Number of placements."""
        return len(self.placements)

    def __eq__(self, other):
        """Assignments are equal when their placement sequences are."""
        return isinstance(other, Assignment) and self.placements == other.placements

    def __hash__(self):
        """Hash of the placement sequence."""
        return hash(self.placements)

    def __repr__(self):
        """Short representation."""
        return f"Assignment({len(self.placements)} placements)"

    def nodes(self) -> Dict[TaskKey, int]:
        """Node chosen for every (app, task)."""
        return {(p.app_id, p.task): p.node for p in self.placements}

    def to_dict(self) -> Dict:
        """JSON-ready document."""
        return {"placements": [{"app": p.app_id, "task": p.task, "node": p.node} for p in self.placements]}

    def to_json(self, indent: Optional[int] = None) -> str:
        """Serialize the assignment."""
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Mapping) -> "Assignment":
        """Rebuild an assignment from its document."""
        return cls(Placement(int(p["app"]), int(p["task"]), int(p["node"])) for p in data["placements"])


@dataclass(frozen=True)
class TaskOutcome:
    """Where and when a task ran and the error rate of its output."""

    node: int
    start: float
    finish: float
    error: float


class LaneState:
    """Per node, per resource type FCFS lanes."""

    def __init__(self):
        """Start with every lane idle."""
        self.available_time: Dict[Tuple[int, ResourceType], float] = {}
        self.queues: Dict[Tuple[int, ResourceType], List[TaskKey]] = {}

    def available(self, node: int, kind: ResourceType) -> float:
        """Time at which the lane frees up."""
        return self.available_time.get((node, kind), 0.0)

    def push(self, node: int, kind: ResourceType, key: TaskKey, finish: float):
        """Append a task to the lane; the lane is busy until `finish`."""
        self.queues.setdefault((node, kind), []).append(key)
        self.available_time[(node, kind)] = finish

    def queue(self, node: int, kind: ResourceType) -> List[TaskKey]:
        """Tasks dispatched to the lane, in order."""
        return list(self.queues.get((node, kind), []))


@dataclass(frozen=True)
class AppResult:
    """Sink outcome of one application and its costs."""

    app_id: int
    completion: float
    error: float
    latency_cost: float
    accuracy_cost: float
    qoe_cost: float


@dataclass(frozen=True)
class MetricsRecord:
    """The six schedule metrics averaged over App Nodes."""

    avg_completion_s: float
    deadline_ratio: float
    accuracy_ratio: float
    avg_latency_cost: float
    avg_accuracy_cost: float
    avg_qoe_cost: float

    @classmethod
    def columns(cls) -> List[str]:
        """Metric names in output order."""
        return [item.name for item in fields(cls)]

    @classmethod
    def missing(cls) -> "MetricsRecord":
        """Placeholder for a run that produced no schedule."""
        return cls(*([float("nan")] * len(fields(cls))))

    def to_dict(self) -> Dict[str, float]:
        """Metric name to value."""
        return asdict(self)


class ScheduleState:
    """Placements applied so far, with lane timelines and task outcomes.

    A state belongs to exactly one scheduling run or evaluation.
    """

    def __init__(self, network: NetworkGraph, apps: Iterable[AppDag]):
        """Create an empty state for the given instance."""
        self.network = network
        self.apps: Dict[int, AppDag] = {dag.app_id: dag for dag in apps}
        self.capacity = {node.id: node.capacity for node in network.nodes}
        self.lanes = LaneState()
        self.outcomes: Dict[TaskKey, TaskOutcome] = {}
        self.sequence: List[Placement] = []
        self.candidate_evaluations = 0

    def is_placed(self, app_id: int, task: int) -> bool:
        """Whether the task already has an outcome."""
        return (app_id, task) in self.outcomes

    def is_ready(self, app_id: int, task: int) -> bool:
        """Whether every predecessor of an unplaced task has been placed."""
        if self.is_placed(app_id, task):
            return False
        return all((app_id, pred) in self.outcomes for pred in self.apps[app_id].predecessors[task])

    def _outcome(self, app_id: int, task: int, node: int) -> TaskOutcome:
        dag = self.apps.get(app_id)
        if dag is None:
            raise InvalidAssignment("unknown application", app_id=app_id, task=task, node=node)
        if not 0 <= task < dag.task_count:
            raise InvalidAssignment("unknown task", app_id=app_id, task=task, node=node)
        if node not in self.capacity:
            raise InvalidAssignment("unknown node", app_id=app_id, task=task, node=node)
        if (app_id, task) in self.outcomes:
            raise InvalidAssignment("task is placed twice", app_id=app_id, task=task, node=node)
        if task == dag.source and node != dag.owner:
            raise OwnerViolation(
                f"source task must run on owner node {dag.owner}", app_id=app_id, task=task, node=node
            )

        ready = 0.0
        survival = 1.0
        for pred in dag.predecessors[task]:
            before = self.outcomes.get((app_id, pred))
            if before is None:
                raise PredecessorUnplaced(f"predecessor {pred} is not placed", app_id=app_id, task=task, node=node)
            arrival = before.finish + self.network.transmission_time(before.node, node, dag.edge_mb[(pred, task)])
            ready = max(ready, arrival)
            survival *= (1.0 - before.error) * (1.0 - self.network.path_ber(before.node, node))
        error = 1.0 - survival if dag.predecessors[task] else 0.0

        spec = dag.tasks[task]
        start = max(self.lanes.available(node, spec.resource_type), ready)
        return TaskOutcome(node=node, start=start, finish=start + spec.exec_time(self.capacity[node]), error=error)

    def candidate_outcome(self, app_id: int, task: int, node: int) -> TaskOutcome:
        """Outcome the task would have on `node`, without changing the state.

        Raises:
            PredecessorUnplaced: if a predecessor has not been placed.
            OwnerViolation: if a source task is tried away from its owner.
            InvalidAssignment: for unknown or already placed tasks.
        """
        self.candidate_evaluations += 1
        return self._outcome(app_id, task, node)

    def place_task(self, app_id: int, task: int, node: int) -> TaskOutcome:
        """Place the task on `node`, append it to its lane and record the outcome.

        Raises:
            PredecessorUnplaced: if a predecessor has not been placed.
            OwnerViolation: if a source task is placed away from its owner.
            InvalidAssignment: for unknown or already placed tasks.
        """
        outcome = self._outcome(app_id, task, node)
        spec = self.apps[app_id].tasks[task]
        self.lanes.push(node, spec.resource_type, (app_id, task), outcome.finish)
        self.outcomes[(app_id, task)] = outcome
        self.sequence.append(Placement(app_id, task, node))
        return outcome

    def assignment(self) -> Assignment:
        """Placements applied so far."""
        return Assignment(self.sequence)

    def source_finish(self, app_id: int) -> float:
        """Finish time the application's source would get on its owner if placed now."""
        dag = self.apps[app_id]
        spec = dag.tasks[dag.source]
        return self.lanes.available(dag.owner, spec.resource_type) + spec.exec_time(self.capacity[dag.owner])

    def app_outcomes(self, app_id: int) -> Dict[int, TaskOutcome]:
        """Outcomes of the application's placed tasks, keyed by task index."""
        return {task: outcome for (app, task), outcome in self.outcomes.items() if app == app_id}

    def unplaced(self) -> List[TaskKey]:
        """Tasks without an outcome, by app id and task index."""
        return [
            (app_id, task.index)
            for app_id in sorted(self.apps)
            for task in self.apps[app_id].tasks
            if (app_id, task.index) not in self.outcomes
        ]

    def results(self, params: CostParams) -> Dict[int, AppResult]:
        """Costs of every application at its sink.

        Raises:
            InvalidAssignment: if some task has not been placed.
        """
        missing = self.unplaced()
        if missing:
            app_id, task = missing[0]
            raise InvalidAssignment(f"{len(missing)} task(s) were never placed", app_id=app_id, task=task)
        results = {}
        for app_id in sorted(self.apps):
            dag = self.apps[app_id]
            sink = self.outcomes[(app_id, dag.sink)]
            qos = dag.qos
            q_d = latency_cost(sink.finish, qos.deadline, qos.h_d, params)
            q_e = accuracy_cost(sink.error, qos.error_limit, qos.h_e, params)
            results[app_id] = AppResult(
                app_id=app_id,
                completion=sink.finish,
                error=sink.error,
                latency_cost=q_d,
                accuracy_cost=q_e,
                qoe_cost=qoe_cost((qos.w_d, qos.w_e), q_d, q_e),
            )
        return results


def _ratio(flags: Sequence[bool]) -> float:
    if not flags:
        return 1.0
    return sum(flags) / len(flags)


def metrics(results: Mapping[int, AppResult], apps: Mapping[int, AppDag]) -> MetricsRecord:
    """Average the per-application results into the six metrics."""
    rows = [results[app_id] for app_id in sorted(results)]
    on_time = [row.completion <= apps[row.app_id].qos.deadline for row in rows if apps[row.app_id].qos.h_d]
    accurate = [row.error <= apps[row.app_id].qos.error_limit for row in rows if apps[row.app_id].qos.h_e]
    return MetricsRecord(
        avg_completion_s=float(np.mean([row.completion for row in rows])),
        deadline_ratio=_ratio(on_time),
        accuracy_ratio=_ratio(accurate),
        avg_latency_cost=float(np.mean([row.latency_cost for row in rows])),
        avg_accuracy_cost=float(np.mean([row.accuracy_cost for row in rows])),
        avg_qoe_cost=float(np.mean([row.qoe_cost for row in rows])),
    )


def replay(assignment: Iterable[Placement], network: NetworkGraph, apps: Iterable[AppDag]) -> ScheduleState:
    """Apply every placement in order to a fresh state."""
    state = ScheduleState(network, apps)
    for placement in assignment:
        state.place_task(placement.app_id, placement.task, placement.node)
    return state


def evaluate(
    assignment: Iterable[Placement], network: NetworkGraph, apps: Iterable[AppDag], params: CostParams
) -> Tuple[Dict[int, AppResult], MetricsRecord]:
    """Replay an assignment and score it.

    Returns:
        The per-application results keyed by app id, and the metrics record.

    Raises:
        InvalidAssignment: if there are no applications, or the assignment
            does not place every task exactly once after its predecessors
            with each source task on its owner.
    """
    apps = list(apps)
    if not apps:
        raise InvalidAssignment("no applications to evaluate")
    state = replay(assignment, network, apps)
    results = state.results(params)
    return results, metrics(results, state.apps)
