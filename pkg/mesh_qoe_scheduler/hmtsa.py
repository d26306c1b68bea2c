"""Hierarchical multi-queue task scheduling.

Scheduling runs in rounds. Each round admits the most latency-urgent
applications, lets every admitted application enqueue a quota of its
highest-priority remaining tasks, orders the enqueued tasks by QoE priority
and places each one on the node with the lowest estimated application
cost. Once the round is placed, the progress and task priorities of every
unfinished application are refreshed from the schedule built so far.
"""

import math
from abc import ABC, abstractmethod
from typing import Dict, Iterable, List, Optional, Sequence

from mesh_qoe_scheduler.apps import AppDag
from mesh_qoe_scheduler.config import SchedulerParams
from mesh_qoe_scheduler.engine import Assignment, ScheduleState, TaskOutcome
from mesh_qoe_scheduler.errors import InvalidAssignment, PredecessorUnplaced
from mesh_qoe_scheduler.logging import LoggingMixin, RunLog
from mesh_qoe_scheduler.network import NetworkGraph
from mesh_qoe_scheduler.qoe import PriorityState, task_quota


def is_scheduler(cls) -> bool:
    """Determine if a class is a concrete, named Scheduler."""
    return isinstance(cls, type) and issubclass(cls, Scheduler) and cls.name is not None


class Scheduler(LoggingMixin, ABC):
    """Base class of every scheduler.

    Subclasses set `name` (the registry key used on the command line) and
    implement `run`, which must place every task of `state`. After
    `schedule` returns, `rounds`, `candidate_evaluations`, `work` and `state`
    describe the run. `work` adds the link relaxations spent building the
    route table to the candidate evaluations.
    """

    name: Optional[str] = None

    def __init__(self, params: Optional[SchedulerParams] = None, run_log: Optional[RunLog] = None):
        """Create a scheduler.

        Args:
            params (SchedulerParams, optional): queue ratios and cost parameters.
            run_log (RunLog, optional): receives log messages and per-round records.
        """
        self.params = params or SchedulerParams()
        self.run_log = run_log
        self.rounds = 0
        self.candidate_evaluations = 0
        self.work = 0
        self.state: Optional[ScheduleState] = None

    def schedule(self, apps: Iterable[AppDag], network: NetworkGraph) -> Assignment:
        """Place every task of `apps` on `network` and return the placement sequence.

        Raises:
            InvalidAssignment: if there is no application to schedule.
        """
        apps = sorted(apps, key=lambda dag: dag.app_id)
        if not apps:
            raise InvalidAssignment("no applications to schedule")
        self.rounds = 0
        self.state = ScheduleState(network, apps)
        priorities = PriorityState.initial(apps, network, self.params.cost)
        self.run(self.state, priorities)
        self.candidate_evaluations = self.state.candidate_evaluations
        self.work = self.candidate_evaluations + network.route_relaxations
        self.log_info(message=f"{self.name}: placed {len(self.state.sequence)} tasks in {self.rounds} round(s)")
        return self.state.assignment()

    @abstractmethod
    def run(self, state: ScheduleState, priorities: PriorityState):
        """Place every task of `state`."""

    def select_node(self, state: ScheduleState, priorities: PriorityState, app_id: int, task: int) -> int:
        """Node with the lowest estimated application cost for the task.

        Source tasks stay on their owner. Ties go to the earlier finish,
        then to the lower node id.
        """
        dag = state.apps[app_id]
        if task == dag.source:
            return dag.owner
        app = priorities[app_id]
        best_key = None
        best_node = None
        for node in sorted(state.capacity):
            outcome = state.candidate_outcome(app_id, task, node)
            key = (app.placement_score(task, outcome.finish, outcome.error), outcome.finish, node)
            if best_key is None or key < best_key:
                best_key = key
                best_node = node
        return best_node

    def assign(self, state: ScheduleState, priorities: PriorityState, app_id: int, task: int) -> TaskOutcome:
        """Select a node for the task and place it there."""
        return state.place_task(app_id, task, self.select_node(state, priorities, app_id, task))


class HmtsaScheduler(Scheduler):
    """Round-based scheduler with a latency-ranked application queue and QoE-ranked task queue."""

    name = "hmtsa"

    def app_priority(self, priorities: PriorityState, app_id: int, remaining: Sequence[int]) -> float:
        """Rank of an application in the application queue: its most urgent remaining task."""
        return max(priorities[app_id].latency[task] for task in remaining)

    @staticmethod
    def quota_priority(priorities: PriorityState, app_id: int, remaining: Sequence[int]) -> float:
        """Weight of an application when the task quota is shared out."""
        return max(priorities[app_id].latency[task] for task in remaining)

    @staticmethod
    def rank_tasks(priorities: PriorityState, app_id: int, tasks: Iterable[int]) -> List[int]:
        """Tasks by descending QoE priority, ties in topological order."""
        app = priorities[app_id]
        return sorted(tasks, key=lambda task: (-app.combined(task), app.dag.position[task]))

    def initial_ranking(self, state: ScheduleState, priorities: PriorityState):
        """Build the task pool and the application queue from the initial priorities."""
        pool = {app_id: self.rank_tasks(priorities, app_id, state.apps[app_id].order) for app_id in state.apps}
        return pool, self.rank_apps(priorities, pool)

    def rank_apps(self, priorities: PriorityState, pool: Dict[int, List[int]]) -> List[int]:
        """Applications with remaining tasks by descending priority, ties by app id."""
        active = [app_id for app_id, tasks in pool.items() if tasks]
        return sorted(active, key=lambda app_id: (-self.app_priority(priorities, app_id, pool[app_id]), app_id))

    def quotas(self, priorities: PriorityState, pool: Dict[int, List[int]], selected: Sequence[int]) -> Dict[int, int]:
        """Tasks each selected application may enqueue this round."""
        weights = {app_id: self.quota_priority(priorities, app_id, pool[app_id]) for app_id in selected}
        total = sum(weights.values())
        quotas = {}
        for app_id in selected:
            if total > 0:
                quotas[app_id] = task_quota(self.params.o, len(pool[app_id]), weights[app_id], total)
            else:
                quotas[app_id] = task_quota(self.params.o, len(pool[app_id]), 1.0, len(selected))
        return quotas

    @staticmethod
    def update_progress(state: ScheduleState, priorities: PriorityState, app_id: int):
        """Set an application's progress from the schedule built so far.

        A started application has progressed to the latest finish and the
        largest error among its placed tasks. One not yet started has
        progressed to the finish its source would get on the owner now, so
        a busy owner makes it more urgent.
        """
        outcomes = state.app_outcomes(app_id)
        if not outcomes:
            priorities.await_source(app_id, state.source_finish(app_id))
            return
        priorities.update_progress(
            app_id,
            {task: outcome.finish for task, outcome in outcomes.items()},
            {task: outcome.error for task, outcome in outcomes.items()},
        )

    def run_round(self, state: ScheduleState, priorities: PriorityState, pool: Dict[int, List[int]], queue):
        """Admit applications, enqueue their quotas, place the tasks and refresh priorities.

        Returns:
            The re-ranked application queue.
        """
        self.rounds += 1
        admitted = max(1, math.floor(self.params.k * len(queue)))
        selected = list(queue[:admitted])
        quotas = self.quotas(priorities, pool, selected)

        enqueued = []
        for app_id in selected:
            batch = pool[app_id][: quotas[app_id]]
            pool[app_id] = pool[app_id][quotas[app_id] :]
            enqueued.extend((app_id, task) for task in batch)
        # stable: each application's tasks keep their relative order
        enqueued.sort(key=lambda item: -priorities[item[0]].combined(item[1]))

        placements = []
        for app_id, task in enqueued:
            if not state.is_ready(app_id, task):
                raise PredecessorUnplaced("enqueued before its predecessors", app_id=app_id, task=task)
            outcome = self.assign(state, priorities, app_id, task)
            placements.append([app_id, task, outcome.node])

        for app_id in sorted(pool):
            if not pool[app_id]:
                continue
            self.update_progress(state, priorities, app_id)
            priorities[app_id].refresh(pool[app_id])
            pool[app_id] = self.rank_tasks(priorities, app_id, pool[app_id])

        record = {"round": self.rounds, "apps": selected, "quotas": quotas, "placements": placements}
        self.log_debug(f"{self.name} round {self.rounds}: apps {selected} quotas {quotas}")
        if self.run_log is not None:
            self.run_log.add_round(record)
        return self.rank_apps(priorities, pool)

    def run(self, state: ScheduleState, priorities: PriorityState):
        """Run rounds until the task pool is empty."""
        pool, queue = self.initial_ranking(state, priorities)
        while queue:
            queue = self.run_round(state, priorities, pool, queue)


def hmtsa_schedule(apps: Iterable[AppDag], network: NetworkGraph, params: Optional[SchedulerParams] = None):
    """Schedule `apps` with the hierarchical multi-queue scheduler."""
    return HmtsaScheduler(params).schedule(apps, network)
