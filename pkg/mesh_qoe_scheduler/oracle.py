"""Exhaustive search for the minimum average QoE cost on tiny instances.

The search enumerates every node assignment (source tasks pinned to their
owners) and, for each, every precedence-respecting global placement order,
since the order decides FCFS lane order. Each candidate is scored with
`engine.evaluate`, so the optimum is exact for the engine's semantics.
"""

import itertools
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from mesh_qoe_scheduler.apps import AppDag
from mesh_qoe_scheduler.baselines import get_scheduler, scheduler_names
from mesh_qoe_scheduler.config import CostParams, OracleLimits, SchedulerParams
from mesh_qoe_scheduler.engine import Assignment, Placement, evaluate
from mesh_qoe_scheduler.errors import BudgetExceeded
from mesh_qoe_scheduler.instance import Instance
from mesh_qoe_scheduler.network import NetworkGraph

logger = logging.getLogger(__name__)

TaskKey = Tuple[int, int]


@dataclass(frozen=True)
class OracleResult:
    """Optimum found by the search."""

    assignment: Assignment
    value: float
    evaluations: int

    def to_dict(self) -> Dict:
        """JSON-ready view."""
        return {"value": self.value, "evaluations": self.evaluations, "assignment": self.assignment.to_dict()}


@dataclass(frozen=True)
class OracleGap:
    """One scheduler's average QoE cost against the optimum."""

    scheduler: str
    value: float
    optimum: float
    gap: float


def _tasks(apps: Sequence[AppDag]) -> List[TaskKey]:
    return [(dag.app_id, task.index) for dag in apps for task in dag.tasks]


def _predecessor_masks(apps: Sequence[AppDag], tasks: Sequence[TaskKey]) -> List[int]:
    position = {key: i for i, key in enumerate(tasks)}
    by_id = {dag.app_id: dag for dag in apps}
    masks = []
    for app_id, task in tasks:
        mask = 0
        for pred in by_id[app_id].predecessors[task]:
            mask |= 1 << position[(app_id, pred)]
        masks.append(mask)
    return masks


def count_orders(apps: Sequence[AppDag]) -> int:
    """Number of precedence-respecting global orders of all tasks."""
    tasks = _tasks(apps)
    masks = _predecessor_masks(apps, tasks)
    ways = {0: 1}
    for _ in range(len(tasks)):
        following = {}
        for mask, count in ways.items():
            for i, pred_mask in enumerate(masks):
                if not mask & (1 << i) and pred_mask & mask == pred_mask:
                    nxt = mask | (1 << i)
                    following[nxt] = following.get(nxt, 0) + count
        ways = following
    return sum(ways.values())


def placement_orders(apps: Sequence[AppDag]) -> Iterator[Tuple[TaskKey, ...]]:
    """Every precedence-respecting global order, in lexicographic order of (app id, task)."""
    tasks = _tasks(apps)
    masks = _predecessor_masks(apps, tasks)
    full = (1 << len(tasks)) - 1

    def extend(mask: int, prefix: Tuple[int, ...]):
        if mask == full:
            yield tuple(tasks[i] for i in prefix)
            return
        for i, pred_mask in enumerate(masks):
            if not mask & (1 << i) and pred_mask & mask == pred_mask:
                yield from extend(mask | (1 << i), prefix + (i,))

    yield from extend(0, ())


def lane_width(apps: Sequence[AppDag]) -> int:
    """Largest number of tasks sharing one resource type."""
    kinds = Counter(spec.resource_type for dag in apps for spec in dag.tasks)
    return max(kinds.values(), default=0)


def check_limits(apps: Sequence[AppDag], network: NetworkGraph, limits: OracleLimits) -> int:
    """Return the number of candidates the search would evaluate.

    Raises:
        BudgetExceeded: if the instance is outside the limits or the candidate count exceeds the budget.
    """
    problems = []
    task_count = sum(dag.task_count for dag in apps)
    if task_count > limits.max_tasks:
        problems.append(f"{task_count} tasks (limit {limits.max_tasks})")
    if network.node_count > limits.max_nodes:
        problems.append(f"{network.node_count} nodes (limit {limits.max_nodes})")
    width = lane_width(apps)
    if width > limits.max_lane_width:
        problems.append(f"lane width {width} (limit {limits.max_lane_width})")
    if problems:
        raise BudgetExceeded(f"Instance too large for exhaustive search: {', '.join(problems)}")
    free = task_count - len(apps)
    candidates = network.node_count**free * count_orders(apps)
    if candidates > limits.max_evaluations:
        raise BudgetExceeded(f"Exhaustive search needs {candidates} evaluations (limit {limits.max_evaluations})")
    return candidates


def _search(
    apps: Sequence[AppDag],
    network: NetworkGraph,
    params: CostParams,
    first_nodes: Sequence[int],
) -> Tuple[Optional[Assignment], float, int]:
    """Best candidate among node assignments whose first free task uses one of `first_nodes`."""
    owners = {dag.app_id: dag.owner for dag in apps}
    free = [(dag.app_id, task.index) for dag in apps for task in dag.tasks if task.index != dag.source]
    nodes = sorted(node.id for node in network.nodes)
    orders = list(placement_orders(apps))
    choices = [first_nodes] + [nodes] * (len(free) - 1) if free else []

    best_assignment = None
    best_value = float("inf")
    evaluations = 0
    for chosen in itertools.product(*choices):
        where = dict(zip(free, chosen))
        for order in orders:
            assignment = Assignment(
                Placement(app_id, task, where.get((app_id, task), owners[app_id])) for app_id, task in order
            )
            _, record = evaluate(assignment, network, apps, params)
            evaluations += 1
            if record.avg_qoe_cost < best_value:
                best_value = record.avg_qoe_cost
                best_assignment = assignment
    return best_assignment, best_value, evaluations


def oracle_optimum(
    apps: Sequence[AppDag],
    network: NetworkGraph,
    params: Optional[CostParams] = None,
    limits: Optional[OracleLimits] = None,
    workers: int = 1,
) -> OracleResult:
    """Minimum average QoE cost over every assignment and placement order.

    The first minimum in enumeration order is returned. With `workers > 1`
    the node choices of the first free task are split across processes and
    the partial optima are reduced in partition order, giving the same
    result as a sequential search.

    Raises:
        BudgetExceeded: if the instance is outside `limits`.
    """
    params = params or CostParams()
    limits = limits or OracleLimits()
    apps = sorted(apps, key=lambda dag: dag.app_id)
    candidates = check_limits(apps, network, limits)
    logger.info("Oracle search over %d candidates", candidates)

    nodes = sorted(node.id for node in network.nodes)
    has_free = any(dag.task_count > 1 for dag in apps)
    if workers > 1 and has_free:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            partials = list(
                executor.map(
                    _search,
                    itertools.repeat(apps),
                    itertools.repeat(network),
                    itertools.repeat(params),
                    [[node] for node in nodes],
                )
            )
    else:
        partials = [_search(apps, network, params, nodes)]

    best_assignment, best_value, evaluations = None, float("inf"), 0
    for assignment, value, count in partials:
        evaluations += count
        if value < best_value:
            best_assignment, best_value = assignment, value
    return OracleResult(assignment=best_assignment, value=best_value, evaluations=evaluations)


def oracle_gaps(
    instance: Instance,
    params: Optional[SchedulerParams] = None,
    limits: Optional[OracleLimits] = None,
    names: Optional[Sequence[str]] = None,
) -> Tuple[OracleResult, List[OracleGap]]:
    """Run each scheduler on the instance and compare it with the optimum.

    The gap is relative to the optimum value.
    """
    params = params or SchedulerParams()
    optimum = oracle_optimum(instance.apps, instance.network, params.cost, limits)
    gaps = []
    for name in names or scheduler_names():
        assignment = get_scheduler(name)(params).schedule(instance.apps, instance.network)
        _, record = evaluate(assignment, instance.network, instance.apps, params.cost)
        gap = (record.avg_qoe_cost - optimum.value) / optimum.value if optimum.value > 0 else 0.0
        gaps.append(OracleGap(scheduler=name, value=record.avg_qoe_cost, optimum=optimum.value, gap=gap))
    return optimum, gaps
