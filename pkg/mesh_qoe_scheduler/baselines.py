"""Comparison schedulers and the scheduler registry."""

import enum
import inspect
import sys
from typing import Dict, Iterable, List, Optional, Type

from mesh_qoe_scheduler import hmtsa
from mesh_qoe_scheduler.apps import AppDag
from mesh_qoe_scheduler.config import SchedulerParams
from mesh_qoe_scheduler.engine import Assignment, ScheduleState
from mesh_qoe_scheduler.errors import MeshSchedulerError, UnknownScheduler
from mesh_qoe_scheduler.hmtsa import HmtsaScheduler, Scheduler, is_scheduler
from mesh_qoe_scheduler.network import NetworkGraph
from mesh_qoe_scheduler.qoe import PriorityState


class BaselineKind(str, enum.Enum):
    """The comparison schedulers."""

    COFE = "cofe"
    DAAS = "daas"
    WHOLE = "whole"
    OURS1 = "ours1"


class CofeScheduler(Scheduler):
    """Event-driven list scheduling, deadline first.

    Scheduling happens whenever a task completes on the simulated clock of
    the schedule built so far. At each event every unplaced task whose
    predecessors have all finished is placed, earliest application deadline
    first, then by descending QoE priority.
    """

    name = BaselineKind.COFE.value

    def run(self, state: ScheduleState, priorities: PriorityState):
        """Advance the clock from completion to completion until every task is placed."""
        clock = 0.0
        remaining = len(state.unplaced())
        while remaining:
            ready = [
                (app_id, task)
                for app_id, task in state.unplaced()
                if state.is_ready(app_id, task)
                and all(
                    state.outcomes[(app_id, pred)].finish <= clock for pred in state.apps[app_id].predecessors[task]
                )
            ]
            if not ready:
                upcoming = [outcome.finish for outcome in state.outcomes.values() if outcome.finish > clock]
                if not upcoming:
                    raise MeshSchedulerError("no task completes after the current event")
                clock = min(upcoming)
                continue
            self.rounds += 1
            ready.sort(
                key=lambda item: (
                    state.apps[item[0]].qos.deadline,
                    -priorities[item[0]].combined(item[1]),
                    item[0],
                    state.apps[item[0]].position[item[1]],
                )
            )
            for app_id, task in ready:
                self.assign(state, priorities, app_id, task)
            remaining -= len(ready)
            self.log_debug(f"cofe event at {clock:.3f}s placed {len(ready)} task(s)")


class DaasScheduler(Scheduler):
    """One pass over all tasks in descending initial QoE priority, never refreshed."""

    name = BaselineKind.DAAS.value

    def run(self, state: ScheduleState, priorities: PriorityState):
        """Place tasks in global priority order."""
        self.rounds = 1
        order = [(app_id, task) for app_id, dag in state.apps.items() for task in dag.order]
        order.sort(
            key=lambda item: (
                -priorities[item[0]].combined(item[1]),
                item[0],
                state.apps[item[0]].position[item[1]],
            )
        )
        for app_id, task in order:
            self.assign(state, priorities, app_id, task)


class WholeScheduler(Scheduler):
    """Each application runs entirely on one node, apps in descending latency urgency.

    The node is the one with the shortest computation duration for the
    application: the sum of its tasks' execution times there plus the
    backlog of the lanes those tasks use. Source tasks stay on the owner.
    """

    name = BaselineKind.WHOLE.value

    def run(self, state: ScheduleState, priorities: PriorityState):
        """Place applications one at a time."""
        apps = sorted(state.apps, key=lambda app_id: (-priorities[app_id].latency[state.apps[app_id].source], app_id))
        for app_id in apps:
            self.rounds += 1
            dag = state.apps[app_id]
            node = self.shortest_duration_node(state, dag)
            for task in dag.order:
                state.place_task(app_id, task, dag.owner if task == dag.source else node)

    @staticmethod
    def shortest_duration_node(state: ScheduleState, dag: AppDag) -> int:
        """Node minimizing total execution time plus lane backlog; ties to the lower id."""
        work = [spec for spec in dag.tasks if spec.index != dag.source and spec.work > 0]
        kinds = sorted({spec.resource_type for spec in work})
        best_key = None
        best_node = None
        for node in sorted(state.capacity):
            state.candidate_evaluations += 1
            duration = sum(spec.exec_time(state.capacity[node]) for spec in work)
            backlog = max((state.lanes.available(node, kind) for kind in kinds), default=0.0)
            key = (duration + backlog, node)
            if best_key is None or key < best_key:
                best_key = key
                best_node = node
        return best_node


class Ours1Scheduler(HmtsaScheduler):
    """The round-based scheduler with both queue levels ranked by QoE priority."""

    name = BaselineKind.OURS1.value

    def app_priority(self, priorities: PriorityState, app_id: int, remaining) -> float:
        """Rank of an application: its highest remaining QoE priority."""
        return max(priorities[app_id].combined(task) for task in remaining)


def schedulers() -> Dict[str, Type[Scheduler]]:
    """All registered schedulers by name."""
    found = {}
    for module in (hmtsa, sys.modules[__name__]):
        for _, member in inspect.getmembers(module, is_scheduler):
            found[member.name] = member
    return dict(sorted(found.items()))


def scheduler_names() -> List[str]:
    """Registered scheduler names in alphabetical order."""
    return list(schedulers())


def get_scheduler(name: str) -> Type[Scheduler]:
    """Look up a scheduler class by name.

    Raises:
        UnknownScheduler: if no scheduler is registered under `name`.
    """
    registry = schedulers()
    try:
        return registry[name]
    except KeyError:
        # pylint: disable=raise-missing-from
        raise UnknownScheduler(f"Unknown scheduler {name!r}; expected one of {', '.join(registry)}")


def run_scheduler(
    name: str, apps: Iterable[AppDag], network: NetworkGraph, params: Optional[SchedulerParams] = None
) -> Assignment:
    """Schedule with the named scheduler."""
    return get_scheduler(name)(params).schedule(apps, network)


def cofe_schedule(apps: Iterable[AppDag], network: NetworkGraph, params: Optional[SchedulerParams] = None):
    """Schedule with the deadline-first event-driven baseline."""
    return CofeScheduler(params).schedule(apps, network)


def daas_schedule(apps: Iterable[AppDag], network: NetworkGraph, params: Optional[SchedulerParams] = None):
    """Schedule with the static global-priority baseline."""
    return DaasScheduler(params).schedule(apps, network)


def whole_schedule(apps: Iterable[AppDag], network: NetworkGraph, params: Optional[SchedulerParams] = None):
    """Schedule with the one-node-per-application baseline."""
    return WholeScheduler(params).schedule(apps, network)


def ours1_schedule(apps: Iterable[AppDag], network: NetworkGraph, params: Optional[SchedulerParams] = None):
    """Schedule with the single-key variant of the round-based scheduler."""
    return Ours1Scheduler(params).schedule(apps, network)
