"""Unit tests for mesh_qoe_scheduler."""

import logging
import unittest
from typing import Optional, Sequence, Tuple

from mesh_qoe_scheduler.apps import AppDag, DagEdge, QosProfile, ResourceType, TaskSpec
from mesh_qoe_scheduler.config import AppConfig, CostParams, ExperimentConfig, NetworkConfig, SweepSpec
from mesh_qoe_scheduler.network import NetworkGraph

logging.disable(logging.CRITICAL)

# (f_cpu, f_gpu, io) per node and (a, b, rate, ber) per link
NodeSpec = Tuple[float, float, float]
LinkSpec = Tuple[int, int, float, float]
# resource type and workload of a task; None marks a virtual task
TaskDef = Optional[Tuple[ResourceType, float]]


def make_network(nodes: Sequence[NodeSpec], links: Sequence[LinkSpec], app_nodes: Sequence[int] = ()) -> NetworkGraph:
    """Build a network with routes from plain capacity and link tuples."""
    return NetworkGraph.from_dict(
        {
            "nodes": [
                {
                    "id": i,
                    "x": float(i),
                    "y": 0.0,
                    "f_cpu": cpu,
                    "f_gpu": gpu,
                    "io": io,
                    "is_app_node": i in app_nodes,
                }
                for i, (cpu, gpu, io) in enumerate(nodes)
            ],
            "links": [{"a": a, "b": b, "rate_mbps": rate, "ber": ber} for a, b, rate, ber in links],
        }
    )


def make_app(  # pylint: disable=too-many-arguments
    tasks: Sequence[TaskDef],
    edges: Sequence[Tuple[int, int, float]] = (),
    app_id: int = 0,
    owner: int = 0,
    deadline: float = 20.0,
    error_limit: float = 1e-2,
    w_d: float = 0.5,
    hard: Tuple[bool, bool] = (False, False),
) -> AppDag:
    """Build an application from (type, workload) pairs and (src, dst, mb) edges."""
    specs = []
    for index, task in enumerate(tasks):
        if task is None:
            specs.append(TaskSpec(app_id, index, ResourceType.CPU.one_hot, (0.0, 0.0, 0.0), virtual=True))
            continue
        kind, work = task
        requirement = [0.0, 0.0, 0.0]
        requirement[kind.value] = work
        specs.append(TaskSpec(app_id, index, kind.one_hot, tuple(requirement)))
    return AppDag(
        app_id=app_id,
        owner=owner,
        tasks=tuple(specs),
        edges=tuple(DagEdge(src, dst, mb) for src, dst, mb in edges),
        qos=QosProfile(deadline, error_limit, w_d, 1.0 - w_d, hard[0], hard[1]),
    )


def chain(length: int, work: float = 8.0, mb: float = 0.2, kind: ResourceType = ResourceType.CPU, **kwargs) -> AppDag:
    """A chain application 0 -> 1 -> ... of equal tasks."""
    return make_app(
        [(kind, work)] * length,
        [(i, i + 1, mb) for i in range(length - 1)],
        **kwargs,
    )


def diamond(**kwargs) -> AppDag:
    """0 -> {1 (GPU), 2 (IO)} -> 3 with unequal branch workloads."""
    return make_app(
        [(ResourceType.CPU, 8.0), (ResourceType.GPU, 16.0), (ResourceType.IO, 8.0), (ResourceType.CPU, 8.0)],
        [(0, 1, 0.2), (0, 2, 0.4), (1, 3, 0.2), (2, 3, 0.2)],
        **kwargs,
    )


def tiny_config(**overrides) -> ExperimentConfig:
    """A small experiment that runs in well under a second per cell."""
    values = {
        "network": NetworkConfig(node_count=6, area_m=300.0, comm_range_m=250.0),
        "apps": AppConfig(app_count=3, task_counts=(3, 4, 5), branch_set=(2, 3)),
        "seeds": (0, 1),
        "schedulers": ("hmtsa", "cofe", "daas", "whole", "ours1"),
        "sweep": SweepSpec(axis="app_count", values=(2, 3)),
    }
    values.update(overrides)
    return ExperimentConfig(**values)


class SchedulerTestCase(unittest.TestCase):
    """Shared fixtures: a three-node line network and default cost parameters."""

    def setUp(self):
        """Create the line network 0 - 1 - 2 and default parameters."""
        super().setUp()
        self.params = CostParams()
        self.network = make_network(
            [(8.0, 8.0, 8.0), (16.0, 4.0, 8.0), (4.0, 16.0, 8.0)],
            [(0, 1, 10.0, 1e-4), (1, 2, 20.0, 1e-6)],
            app_nodes=(0, 2),
        )

    def assertFeasible(self, assignment, apps):  # pylint: disable=invalid-name
        """Every task placed once, after its predecessors, with sources on their owners."""
        seen = set()
        by_id = {dag.app_id: dag for dag in apps}
        for placement in assignment:
            key = (placement.app_id, placement.task)
            self.assertNotIn(key, seen)
            dag = by_id[placement.app_id]
            for pred in dag.predecessors[placement.task]:
                self.assertIn((placement.app_id, pred), seen)
            if placement.task == dag.source:
                self.assertEqual(dag.owner, placement.node)
            seen.add(key)
        self.assertEqual(sum(dag.task_count for dag in apps), len(seen))
