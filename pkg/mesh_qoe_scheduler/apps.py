"""DAG applications: typed tasks, data edges, QoS thresholds and the random generator."""

import enum
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from mesh_qoe_scheduler.config import AppConfig
from mesh_qoe_scheduler.errors import CycleDetected, InvalidConfig

Vector = Tuple[float, float, float]


class ResourceType(enum.IntEnum):
    """Resource a task consumes; the value indexes capacity and requirement vectors."""

    CPU = 0
    GPU = 1
    IO = 2

    @property
    def one_hot(self) -> Tuple[int, int, int]:
        """Type vector with a single 1 at this type's position."""
        vector = [0, 0, 0]
        vector[self.value] = 1
        return tuple(vector)


@dataclass(frozen=True)
class TaskSpec:
    """One task of an application.

    `type_vector` is the one-hot type selector and `requirement` holds
    (CPU Gcycles, GPU Gcycles, IO MB). Virtual tasks carry no work.
    """

    app_id: int
    index: int
    type_vector: Tuple[int, int, int]
    requirement: Vector
    virtual: bool = False

    @property
    def resource_type(self) -> ResourceType:
        """The resource selected by the type vector."""
        return ResourceType([i for i, flag in enumerate(self.type_vector) if flag][0])

    @property
    def work(self) -> float:
        """Projected requirement on the task's own resource type."""
        return sum(q * r for q, r in zip(self.type_vector, self.requirement))

    def exec_time(self, capacity: Vector) -> float:
        """Execution time on a node with the given capacity vector."""
        work = self.work
        if work == 0:
            return 0.0
        return abs(work / sum(q * f for q, f in zip(self.type_vector, capacity)))


@dataclass(frozen=True)
class DagEdge:
    """Data dependency carrying `mb` megabytes from `src` to `dst`."""

    src: int
    dst: int
    mb: float


@dataclass(frozen=True)
class QosProfile:
    """Deadline and error limit with the application's preferences and hardness flags."""

    deadline: float
    error_limit: float
    w_d: float
    w_e: float
    h_d: bool
    h_e: bool


@dataclass(frozen=True)
class AppDag:
    """A DAG application generated at (and owned by) one App Node."""

    app_id: int
    owner: int
    tasks: Tuple[TaskSpec, ...]
    edges: Tuple[DagEdge, ...]
    qos: QosProfile

    @property
    def task_count(self) -> int:
        """Number of tasks including virtual ones."""
        return len(self.tasks)

    @property
    def source(self) -> int:
        """Index of the entry task."""
        return 0

    @property
    def sink(self) -> int:
        """Index of the exit task."""
        return len(self.tasks) - 1

    @cached_property
    def predecessors(self) -> Dict[int, Tuple[int, ...]]:
        """Sorted predecessor indices per task."""
        preds = {task.index: [] for task in self.tasks}
        for edge in self.edges:
            preds.setdefault(edge.dst, []).append(edge.src)
        return {index: tuple(sorted(items)) for index, items in preds.items()}

    @cached_property
    def successors(self) -> Dict[int, Tuple[int, ...]]:
        """Sorted successor indices per task."""
        succs = {task.index: [] for task in self.tasks}
        for edge in self.edges:
            succs.setdefault(edge.src, []).append(edge.dst)
        return {index: tuple(sorted(items)) for index, items in succs.items()}

    @cached_property
    def edge_mb(self) -> Dict[Tuple[int, int], float]:
        """Megabytes per (src, dst) pair."""
        return {(edge.src, edge.dst): edge.mb for edge in self.edges}

    @cached_property
    def order(self) -> Tuple[int, ...]:
        """Cached `topological_order` of this application."""
        return tuple(topological_order(self))

    @cached_property
    def position(self) -> Dict[int, int]:
        """Position of each task in `order`."""
        return {task: i for i, task in enumerate(self.order)}

    def to_digraph(self) -> nx.DiGraph:
        """networkx view with an `mb` attribute on every edge."""
        graph = nx.DiGraph()
        graph.add_nodes_from(task.index for task in self.tasks)
        for edge in self.edges:
            graph.add_edge(edge.src, edge.dst, mb=edge.mb)
        return graph

    def to_dict(self) -> Dict:
        """JSON-ready application document."""
        qos = self.qos
        return {
            "app_id": self.app_id,
            "owner": self.owner,
            "qos": {
                "d": qos.deadline,
                "e": qos.error_limit,
                "wd": qos.w_d,
                "we": qos.w_e,
                "hd": int(qos.h_d),
                "he": int(qos.h_e),
            },
            "tasks": [
                {
                    "j": task.index,
                    "type": list(task.type_vector),
                    "req": list(task.requirement),
                    "virtual": task.virtual,
                }
                for task in self.tasks
            ],
            "edges": [{"from": edge.src, "to": edge.dst, "mb": edge.mb} for edge in self.edges],
        }

    def to_json(self, indent: Optional[int] = None) -> str:
        """Serialize the application."""
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Mapping, app_id: int = 0) -> "AppDag":
        """Rebuild an application from its document; `app_id` applies when the document has none."""
        app_id = int(data.get("app_id", app_id))
        qos = data["qos"]
        return cls(
            app_id=app_id,
            owner=int(data["owner"]),
            tasks=tuple(
                TaskSpec(
                    app_id=app_id,
                    index=int(item["j"]),
                    type_vector=tuple(int(flag) for flag in item["type"]),
                    requirement=tuple(float(req) for req in item["req"]),
                    virtual=bool(item.get("virtual", False)),
                )
                for item in data["tasks"]
            ),
            edges=tuple(
                DagEdge(src=int(item["from"]), dst=int(item["to"]), mb=float(item["mb"])) for item in data["edges"]
            ),
            qos=QosProfile(
                deadline=float(qos["d"]),
                error_limit=float(qos["e"]),
                w_d=float(qos["wd"]),
                w_e=float(qos["we"]),
                h_d=bool(qos["hd"]),
                h_e=bool(qos["he"]),
            ),
        )

    @classmethod
    def from_json(cls, document: str) -> "AppDag":
        """Parse an application document."""
        return cls.from_dict(json.loads(document))


def topological_order(dag: AppDag) -> List[int]:
    """Task indices with every edge pointing forward; ties go to the lower index.

    Raises:
        CycleDetected: if the edges contain a cycle.
    """
    try:
        return list(nx.lexicographical_topological_sort(dag.to_digraph()))
    except nx.NetworkXUnfeasible as ex:
        raise CycleDetected(f"App {dag.app_id} contains a cycle") from ex


@dataclass(frozen=True)
class DagViolation:
    """One problem found by `validate_dag`."""

    code: str
    message: str
    task: Optional[int] = None

    def __str__(self):
        """Code and message."""
        return f"{self.code}: {self.message}"


def validate_dag(dag: AppDag) -> List[DagViolation]:  # pylint: disable=too-many-branches
    """Check an application's structure; an empty list means the DAG is valid."""
    violations = []
    if not dag.tasks:
        return [DagViolation("EmptyDag", f"App {dag.app_id} has no tasks")]

    indices = [task.index for task in dag.tasks]
    known = set(indices)
    if indices != list(range(len(indices))):
        violations.append(DagViolation("DanglingEdge", "task indices must be 0..J in order"))

    for task in dag.tasks:
        flags = [flag for flag in task.type_vector if flag]
        if len(task.type_vector) != 3 or len(flags) != 1 or flags[0] != 1:
            violations.append(DagViolation("TypeNotOneHot", f"task {task.index} type {task.type_vector}", task.index))
        elif not task.virtual and task.work <= 0:
            violations.append(
                DagViolation("NonPositiveRequirement", f"task {task.index} requires {task.requirement}", task.index)
            )

    edges_ok = True
    for edge in dag.edges:
        if edge.src == edge.dst:
            violations.append(DagViolation("SelfLoop", f"edge {edge.src}->{edge.dst}", edge.src))
            edges_ok = False
        if edge.mb < 0:
            violations.append(DagViolation("NegativeBytes", f"edge {edge.src}->{edge.dst} carries {edge.mb} MB"))
        if edge.src not in known or edge.dst not in known:
            violations.append(DagViolation("DanglingEdge", f"edge {edge.src}->{edge.dst} references a missing task"))
            edges_ok = False
    if not edges_ok:
        return violations

    graph = dag.to_digraph()
    if not nx.is_directed_acyclic_graph(graph):
        violations.append(DagViolation("CycleDetected", f"App {dag.app_id} contains a cycle"))
        return violations

    sources = [node for node in graph if graph.in_degree(node) == 0]
    sinks = [node for node in graph if graph.out_degree(node) == 0]
    if sources != [dag.source]:
        violations.append(DagViolation("SourceViolation", f"entry tasks {sources}, expected [{dag.source}]"))
    if sinks != [dag.sink]:
        violations.append(DagViolation("SinkViolation", f"exit tasks {sinks}, expected [{dag.sink}]"))
    if dag.source in graph and dag.sink in graph:
        reachable = nx.descendants(graph, dag.source) | {dag.source}
        reaching = nx.ancestors(graph, dag.sink) | {dag.sink}
        for node in sorted(graph):
            if node not in reachable or node not in reaching:
                violations.append(DagViolation("Unreachable", f"task {node} is off every source-sink path", node))
    return violations


def _layer_widths(rng: np.random.Generator, task_count: int, branch: int) -> List[int]:
    widths = []
    remaining = task_count
    while remaining > 0:
        limit = branch if not widths else min(branch, widths[-1] * branch)
        width = min(int(rng.integers(1, limit + 1)), remaining)
        widths.append(width)
        remaining -= width
    return widths


def _layered_edges(rng: np.random.Generator, layers: Sequence[Sequence[int]], branch: int) -> List[Tuple[int, int]]:
    """Random edges between consecutive layers with out-degree at most `branch`."""
    out_degree = {task: 0 for layer in layers for task in layer}
    edges = []
    for upper, lower in zip(layers, layers[1:]):
        for task in lower:
            eligible = [parent for parent in upper if out_degree[parent] < branch]
            parent = eligible[int(rng.integers(len(eligible)))]
            edges.append((parent, task))
            out_degree[parent] += 1
        # every task of an inner layer needs a successor
        for parent in upper:
            if out_degree[parent] == 0:
                child = lower[int(rng.integers(len(lower)))]
                edges.append((parent, child))
                out_degree[parent] += 1
    return edges


def generate_app(cfg: AppConfig, seed, owner: int, app_id: int = 0) -> AppDag:
    """Generate a random layered DAG application owned by `owner`.

    `seed` may be an integer, a `numpy.random.SeedSequence` or a
    `numpy.random.Generator`. When the random layering has several entry
    or exit tasks, a zero-work virtual source or sink is added.

    Raises:
        InvalidConfig: if the configuration is unusable.
    """
    problems = cfg.problems()
    if problems:
        raise InvalidConfig("Invalid application configuration", problems)

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    task_count = int(cfg.task_counts[int(rng.integers(len(cfg.task_counts)))])
    branch = int(cfg.branch_set[int(rng.integers(len(cfg.branch_set)))])

    widths = _layer_widths(rng, task_count, branch)
    virtual_source = widths[0] > 1
    virtual_sink = widths[-1] > 1
    offset = 1 if virtual_source else 0

    layers = []
    next_index = offset
    for width in widths:
        layers.append(list(range(next_index, next_index + width)))
        next_index += width
    edges = _layered_edges(rng, layers, branch)

    tasks = []
    if virtual_source:
        tasks.append(TaskSpec(app_id, 0, ResourceType.CPU.one_hot, (0.0, 0.0, 0.0), virtual=True))
    for index in range(offset, offset + task_count):
        kind = ResourceType(int(rng.integers(3)))
        requirement = [0.0, 0.0, 0.0]
        requirement[kind.value] = float(rng.uniform(cfg.workload_range[0], cfg.workload_range[1]))
        tasks.append(TaskSpec(app_id, index, kind.one_hot, tuple(requirement)))

    dag_edges = [
        DagEdge(src, dst, float(rng.uniform(cfg.edge_mb_range[0], cfg.edge_mb_range[1]))) for src, dst in edges
    ]
    if virtual_source:
        dag_edges = [DagEdge(0, task, 0.0) for task in layers[0]] + dag_edges
    if virtual_sink:
        sink = offset + task_count
        tasks.append(TaskSpec(app_id, sink, ResourceType.CPU.one_hot, (0.0, 0.0, 0.0), virtual=True))
        dag_edges.extend(DagEdge(task, sink, 0.0) for task in layers[-1])

    w_d = float(rng.uniform(cfg.weight_d_range[0], cfg.weight_d_range[1]))
    qos = QosProfile(
        deadline=float(rng.uniform(cfg.deadline_range_s[0], cfg.deadline_range_s[1])),
        error_limit=float(cfg.error_set[int(rng.integers(len(cfg.error_set)))]),
        w_d=w_d,
        w_e=1.0 - w_d,
        h_d=bool(rng.random() < cfg.hard_ratio),
        h_e=bool(rng.random() < cfg.hard_ratio),
    )
    dag_edges.sort(key=lambda edge: (edge.src, edge.dst))
    return AppDag(app_id=app_id, owner=owner, tasks=tuple(tasks), edges=tuple(dag_edges), qos=qos)
