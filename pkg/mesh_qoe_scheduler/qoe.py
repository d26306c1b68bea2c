"""QoS degradation costs, priority estimators and per-round task quotas.

Costs are sigmoid functions of how far an application's completion time
(or data error rate) lies past its threshold. Hard thresholds add a penalty
factor once crossed. Priorities apply the same functions to estimates: the
time still needed to reach the sink (bottom level) and the error still to
be accumulated on the way (downstream error), both computed with network
averages.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Tuple

from scipy.special import expit

from mesh_qoe_scheduler.apps import AppDag
from mesh_qoe_scheduler.config import CostParams
from mesh_qoe_scheduler.network import NetworkGraph


def _sigmoid(value: float) -> float:
    return float(expit(value))


def latency_cost(completion: float, deadline: float, hard: bool, params: CostParams) -> float:
    """Latency degradation cost of finishing at `completion` against `deadline`."""
    excess = completion - deadline
    cost = _sigmoid(excess / params.beta_d)
    if hard and excess > 0:
        cost += params.penalty_d
    return cost


def accuracy_cost(error: float, error_limit: float, hard: bool, params: CostParams) -> float:
    """Accuracy degradation cost of delivering data with `error` against `error_limit`."""
    excess = error - error_limit
    cost = _sigmoid(excess / params.beta_e_for(error_limit))
    if hard and excess > 0:
        cost += params.penalty_e
    return cost


def qoe_cost(weights: Tuple[float, float], latency: float, accuracy: float) -> float:
    """Preference-weighted sum of the latency and accuracy costs."""
    return weights[0] * latency + weights[1] * accuracy


def bottom_level_time(dag: AppDag, mean_rate: float, mean_capacity: Tuple[float, float, float]) -> Dict[int, float]:
    """Estimated time from each task to the sink along the longest path.

    Transfers use the network's average link rate and executions the
    average capacity vector. Sink tasks have a bottom level of 0.
    """
    levels = {}
    for task in reversed(dag.order):
        successors = dag.successors[task]
        if not successors:
            levels[task] = 0.0
            continue
        levels[task] = max(
            levels[succ] + dag.edge_mb[(task, succ)] / mean_rate + dag.tasks[succ].exec_time(mean_capacity)
            for succ in successors
        )
    return levels


def downstream_error(dag: AppDag, mean_ber: float) -> Dict[int, float]:
    """Estimated error accumulated from each task to the sink over average-BER hops."""
    errors = {}
    for task in reversed(dag.order):
        successors = dag.successors[task]
        if not successors:
            errors[task] = 0.0
            continue
        errors[task] = 1.0 - math.prod((1.0 - errors[succ]) * (1.0 - mean_ber) for succ in successors)
    return errors


def latency_priority(
    bottom_level: float, progress: float, deadline: float, w_d: float, hard: bool, params: CostParams
) -> float:
    """Latency priority of a task whose application has progressed to time `progress`.

    The remaining deadline is `deadline - progress`; the priority grows as
    the task's bottom level overruns it.
    """
    excess = bottom_level - (deadline - progress)
    priority = w_d * _sigmoid(excess / params.beta_d)
    if hard and excess > 0:
        priority += w_d * params.penalty_d
    return priority


def estimated_error(progress_error: float, downstream: float) -> float:
    """Error expected at the sink given the error so far and the downstream estimate."""
    return 1.0 - (1.0 - progress_error) * (1.0 - downstream)


def accuracy_priority(
    progress_error: float, downstream: float, error_limit: float, w_e: float, hard: bool, params: CostParams
) -> float:
    """Accuracy priority of a task given its application's error so far."""
    excess = estimated_error(progress_error, downstream) - error_limit
    priority = w_e * _sigmoid(excess / params.beta_e_for(error_limit))
    if hard and excess > 0:
        priority += w_e * params.penalty_e
    return priority


def task_quota(o: float, remaining: int, priority: float, total: float) -> int:
    """Number of tasks an application may enqueue this round.

    The share of `o * remaining` is proportional to the application's
    priority within the selected applications, floored and clamped to
    `[1, remaining]`.
    """
    quota = math.floor(o * remaining * priority / total)
    return max(1, min(remaining, quota))


@dataclass
class AppPriorities:  # pylint: disable=too-many-instance-attributes
    """Priority bookkeeping of one application.

    `progress_time` and `progress_error` hold the latest finish time and the
    largest error among the application's assigned tasks.
    """

    dag: AppDag
    params: CostParams
    bottom_level: Dict[int, float]
    downstream: Dict[int, float]
    progress_time: float = 0.0
    progress_error: float = 0.0
    latency: Dict[int, float] = field(default_factory=dict)
    accuracy: Dict[int, float] = field(default_factory=dict)

    def refresh(self, tasks: Optional[Iterable[int]] = None):
        """Recompute the latency and accuracy priorities of `tasks` (all tasks by default)."""
        qos = self.dag.qos
        for task in self.dag.order if tasks is None else tasks:
            self.latency[task] = latency_priority(
                self.bottom_level[task], self.progress_time, qos.deadline, qos.w_d, qos.h_d, self.params
            )
            self.accuracy[task] = accuracy_priority(
                self.progress_error, self.downstream[task], qos.error_limit, qos.w_e, qos.h_e, self.params
            )

    def combined(self, task: int) -> float:
        """QoE priority of a task: latency plus accuracy priority."""
        return self.latency[task] + self.accuracy[task]

    def placement_score(self, task: int, finish: float, error: float) -> float:
        """Estimated application-level cost of `task` finishing at `finish` with data error `error`."""
        qos = self.dag.qos
        return latency_priority(
            self.bottom_level[task], finish, qos.deadline, qos.w_d, qos.h_d, self.params
        ) + accuracy_priority(error, self.downstream[task], qos.error_limit, qos.w_e, qos.h_e, self.params)


@dataclass
class PriorityState:
    """Priorities of every application in a scheduling run, keyed by app id."""

    apps: Dict[int, AppPriorities]

    @classmethod
    def initial(cls, apps: Iterable[AppDag], network: NetworkGraph, params: CostParams) -> "PriorityState":
        """Bottom levels and downstream errors from network averages, with zero progress."""
        mean_rate = network.mean_rate
        mean_capacity = network.mean_capacity
        mean_ber = network.mean_ber
        priorities = {}
        for dag in apps:
            app = AppPriorities(
                dag=dag,
                params=params,
                bottom_level=bottom_level_time(dag, mean_rate, mean_capacity),
                downstream=downstream_error(dag, mean_ber),
            )
            app.refresh()
            priorities[dag.app_id] = app
        return cls(apps=priorities)

    def __getitem__(self, app_id: int) -> AppPriorities:
        """Priorities of one application."""
        return self.apps[app_id]

    def update_progress(self, app_id: int, finishes: Mapping[int, float], errors: Mapping[int, float]):
        """Set an application's progress from its assigned tasks' outcomes."""
        app = self.apps[app_id]
        if finishes:
            app.progress_time = max(finishes.values())
        if errors:
            app.progress_error = max(errors.values())

    def await_source(self, app_id: int, source_finish: float):
        """Progress of an application with nothing placed: its source finishing at `source_finish`."""
        app = self.apps[app_id]
        app.progress_time = source_finish
        app.progress_error = 0.0
