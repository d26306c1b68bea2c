"""Typed experiment configuration built from the configuration tree."""

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

from mesh_qoe_scheduler.context import Context, context_file
from mesh_qoe_scheduler.errors import InvalidConfig

SWEEP_AXES = ("app_count", "node_count", "soft_ratio", "k", "o")


def _range_problems(name: str, value: Sequence[float], positive: bool = True) -> List[str]:
    if value is None or len(value) != 2:
        return [f"{name} must be a [low, high] pair"]
    low, high = value
    problems = []
    if low > high:
        problems.append(f"{name} is empty: {low} > {high}")
    if positive and low <= 0:
        problems.append(f"{name} must be positive, got {low}")
    return problems


def _set_problems(name: str, value: Sequence, positive: bool = True) -> List[str]:
    if not value:
        return [f"{name} must not be empty"]
    if positive and any(item <= 0 for item in value):
        return [f"{name} must only hold positive values"]
    return []


@dataclass(frozen=True)
class NetworkConfig:
    """Parameters of the random mesh network."""

    node_count: int = 40
    area_m: float = 1000.0
    comm_range_m: float = 500.0
    capacity_range: Tuple[float, float] = (5.0, 10.0)
    rate_range_mbps: Tuple[float, float] = (1.0, 20.0)
    ber_set: Tuple[float, ...] = (1e-4, 1e-5, 1e-6, 1e-7)
    max_attempts: int = 100

    def problems(self) -> List[str]:
        """Return every reason this configuration cannot build a network."""
        problems = []
        if self.node_count < 2:
            problems.append(f"network.node_count must be at least 2, got {self.node_count}")
        if self.area_m <= 0:
            problems.append("network.area_m must be positive")
        if self.comm_range_m <= 0:
            problems.append("network.comm_range_m must be positive")
        if self.max_attempts < 1:
            problems.append("network.max_attempts must be at least 1")
        problems.extend(_range_problems("network.capacity_range", self.capacity_range))
        problems.extend(_range_problems("network.rate_range_mbps", self.rate_range_mbps))
        problems.extend(_set_problems("network.ber_set", self.ber_set))
        if self.ber_set and any(ber >= 1 for ber in self.ber_set):
            problems.append("network.ber_set values must be below 1")
        return problems


@dataclass(frozen=True)
class AppConfig:
    """Parameters of the random DAG applications."""

    app_count: int = 30
    hard_ratio: float = 0.5
    task_counts: Tuple[int, ...] = (16, 17, 18, 19, 20)
    branch_set: Tuple[int, ...] = (2, 3, 4, 5)
    workload_range: Tuple[float, float] = (5.0, 10.0)
    edge_mb_range: Tuple[float, float] = (0.1, 0.5)
    deadline_range_s: Tuple[float, float] = (15.0, 20.0)
    error_set: Tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    weight_d_range: Tuple[float, float] = (0.3, 0.7)

    def problems(self) -> List[str]:
        """Return every reason this configuration cannot generate applications."""
        problems = []
        if self.app_count < 1:
            problems.append(f"apps.app_count must be at least 1, got {self.app_count}")
        if not 0 <= self.hard_ratio <= 1:
            problems.append(f"apps.hard_ratio must be within [0, 1], got {self.hard_ratio}")
        problems.extend(_set_problems("apps.task_counts", self.task_counts))
        problems.extend(_set_problems("apps.branch_set", self.branch_set))
        problems.extend(_range_problems("apps.workload_range", self.workload_range))
        problems.extend(_range_problems("apps.edge_mb_range", self.edge_mb_range, positive=False))
        problems.extend(_range_problems("apps.deadline_range_s", self.deadline_range_s))
        problems.extend(_set_problems("apps.error_set", self.error_set))
        if self.error_set and any(err >= 1 for err in self.error_set):
            problems.append("apps.error_set values must be below 1")
        problems.extend(_range_problems("apps.weight_d_range", self.weight_d_range, positive=False))
        if self.weight_d_range and len(self.weight_d_range) == 2:
            if self.weight_d_range[0] < 0 or self.weight_d_range[1] > 1:
                problems.append("apps.weight_d_range must lie within [0, 1]")
        if self.edge_mb_range and len(self.edge_mb_range) == 2 and self.edge_mb_range[0] < 0:
            problems.append("apps.edge_mb_range must not be negative")
        return problems


@dataclass(frozen=True)
class CostParams:
    """Sigmoid scales and penalty factors of the QoS degradation costs.

    `beta_e_abs` fixes the accuracy scale for every application; when it is
    left unset the scale is `beta_e_rel` times the application's error limit.
    """

    beta_d: float = 1.0
    beta_e_rel: float = 0.2
    beta_e_abs: Optional[float] = None
    penalty_d: float = 10.0
    penalty_e: float = 10.0

    def beta_e_for(self, error_limit: float) -> float:
        """Accuracy sigmoid scale for an application with the given error limit."""
        if self.beta_e_abs is not None:
            return self.beta_e_abs
        return self.beta_e_rel * error_limit

    def problems(self) -> List[str]:
        """Return every non-positive parameter."""
        problems = []
        for name in ("beta_d", "beta_e_rel", "penalty_d", "penalty_e"):
            if getattr(self, name) <= 0:
                problems.append(f"cost.{name} must be positive")
        if self.beta_e_abs is not None and self.beta_e_abs <= 0:
            problems.append("cost.beta_e_abs must be positive when set")
        return problems


@dataclass(frozen=True)
class SchedulerParams:
    """Queue ratios of the hierarchical scheduler and the cost parameters it scores with."""

    k: float = 0.25
    o: float = 1.0
    cost: CostParams = field(default_factory=CostParams)

    def problems(self) -> List[str]:
        """Return every ratio outside (0, 1] plus any cost problems."""
        problems = []
        if not 0 < self.k <= 1:
            problems.append(f"scheduler.k must be within (0, 1], got {self.k}")
        if not 0 < self.o <= 1:
            problems.append(f"scheduler.o must be within (0, 1], got {self.o}")
        return problems + self.cost.problems()


@dataclass(frozen=True)
class OracleLimits:
    """Size limits of the exhaustive search."""

    max_tasks: int = 8
    max_nodes: int = 4
    max_lane_width: int = 5
    max_evaluations: int = 10_000_000

    def problems(self) -> List[str]:
        """Return every non-positive limit."""
        return [f"oracle.{name} must be positive" for name in self.__dataclass_fields__ if getattr(self, name) < 1]


@dataclass(frozen=True)
class SweepSpec:
    """The swept parameter and its values."""

    axis: str = "app_count"
    values: Tuple[float, ...] = (15, 20, 25, 30, 35)


@dataclass(frozen=True)
class ExperimentConfig:  # pylint: disable=too-many-instance-attributes
    """Everything a sweep needs: instance generation, scheduling, seeds and the swept axis."""

    network: NetworkConfig = field(default_factory=NetworkConfig)
    apps: AppConfig = field(default_factory=AppConfig)
    scheduler: SchedulerParams = field(default_factory=SchedulerParams)
    oracle: OracleLimits = field(default_factory=OracleLimits)
    master_seed: int = 2024
    seeds: Tuple[int, ...] = tuple(range(20))
    schedulers: Tuple[str, ...] = ("hmtsa", "cofe", "daas", "whole", "ours1")
    sweep: SweepSpec = field(default_factory=SweepSpec)
    workers: int = 1

    @property
    def cost(self) -> CostParams:
        """Cost parameters shared by scheduling and evaluation."""
        return self.scheduler.cost

    def at(self, value) -> "ExperimentConfig":
        """Return the configuration with the sweep axis set to `value`."""
        axis = self.sweep.axis
        if axis == "app_count":
            return replace(self, apps=replace(self.apps, app_count=int(value)))
        if axis == "node_count":
            return replace(self, network=replace(self.network, node_count=int(value)))
        if axis == "soft_ratio":
            return replace(self, apps=replace(self.apps, hard_ratio=1.0 - float(value)))
        if axis == "k":
            return replace(self, scheduler=replace(self.scheduler, k=float(value)))
        if axis == "o":
            return replace(self, scheduler=replace(self.scheduler, o=float(value)))
        raise InvalidConfig(f"Unknown sweep axis {axis!r}")


def _pair(value) -> Tuple[float, float]:
    return tuple(float(item) for item in value)


@context_file("defaults.yaml")
class ExperimentContext(Context):
    """Experiment configuration tree, merged over the packaged defaults."""

    def network_config(self) -> NetworkConfig:
        """Typed network section."""
        net = self.network
        return NetworkConfig(
            node_count=int(net.node_count),
            area_m=float(net.area_m),
            comm_range_m=float(net.comm_range_m),
            capacity_range=_pair(net.capacity_range),
            rate_range_mbps=_pair(net.rate_range_mbps),
            ber_set=tuple(float(ber) for ber in net.ber_set),
            max_attempts=int(net.max_attempts),
        )

    def app_config(self) -> AppConfig:
        """Typed applications section."""
        apps = self.apps
        return AppConfig(
            app_count=int(apps.app_count),
            hard_ratio=float(apps.hard_ratio),
            task_counts=tuple(int(count) for count in apps.task_counts),
            branch_set=tuple(int(branch) for branch in apps.branch_set),
            workload_range=_pair(apps.workload_range),
            edge_mb_range=_pair(apps.edge_mb_range),
            deadline_range_s=_pair(apps.deadline_range_s),
            error_set=tuple(float(err) for err in apps.error_set),
            weight_d_range=_pair(apps.weight_d_range),
        )

    def cost_params(self) -> CostParams:
        """Typed cost section."""
        cost = self.cost
        beta_e_abs = cost.get("beta_e_abs")
        return CostParams(
            beta_d=float(cost.beta_d_s),
            beta_e_rel=float(cost.beta_e_rel),
            beta_e_abs=None if beta_e_abs is None else float(beta_e_abs),
            penalty_d=float(cost.penalty_d),
            penalty_e=float(cost.penalty_e),
        )

    def scheduler_params(self) -> SchedulerParams:
        """Typed scheduler section, carrying the cost parameters."""
        return SchedulerParams(k=float(self.scheduler.k), o=float(self.scheduler.o), cost=self.cost_params())

    def oracle_limits(self) -> OracleLimits:
        """Typed oracle section."""
        oracle = self.oracle
        return OracleLimits(
            max_tasks=int(oracle.max_tasks),
            max_nodes=int(oracle.max_nodes),
            max_lane_width=int(oracle.max_lane_width),
            max_evaluations=int(float(oracle.max_evaluations)),
        )

    def seeds(self) -> Tuple[int, ...]:
        """Explicit seed list, or `range(seed_count)`."""
        experiment = self.experiment
        seeds = experiment.get("seeds")
        if seeds is None:
            return tuple(range(int(experiment.seed_count)))
        return tuple(int(seed) for seed in seeds)

    def sweep_spec(self) -> SweepSpec:
        """Typed sweep section."""
        sweep = self.experiment.sweep
        return SweepSpec(axis=str(sweep.axis), values=tuple(sweep["values"]))

    def validate_network(self):
        """Check the network section."""
        problems = self.network_config().problems()
        if problems:
            raise InvalidConfig("Invalid network section", problems)

    def validate_apps(self):
        """Check the applications section."""
        problems = self.app_config().problems()
        if problems:
            raise InvalidConfig("Invalid apps section", problems)

    def validate_scheduler(self):
        """Check queue ratios and cost parameters."""
        problems = self.scheduler_params().problems()
        if problems:
            raise InvalidConfig("Invalid scheduler section", problems)

    def validate_oracle(self):
        """Check oracle limits."""
        problems = self.oracle_limits().problems()
        if problems:
            raise InvalidConfig("Invalid oracle section", problems)

    def validate_experiment(self):
        """Check seeds, scheduler names and the sweep definition."""
        # this prevents a circular import
        from mesh_qoe_scheduler.baselines import scheduler_names  # pylint: disable=import-outside-toplevel

        problems = []
        seeds = self.seeds()
        if not seeds:
            problems.append("experiment seeds must not be empty")
        if len(set(seeds)) != len(seeds):
            problems.append("experiment seeds must be distinct")
        if any(seed < 0 for seed in seeds) or int(self.experiment.master_seed) < 0:
            problems.append("experiment seeds must not be negative")
        known = scheduler_names()
        for name in self.experiment.schedulers:
            if name not in known:
                problems.append(f"unknown scheduler {name!r}; expected one of {', '.join(known)}")
        sweep = self.sweep_spec()
        if sweep.axis not in SWEEP_AXES:
            problems.append(f"sweep axis must be one of {', '.join(SWEEP_AXES)}, got {sweep.axis!r}")
        if not sweep.values:
            problems.append("sweep values must not be empty")
        if sweep.axis == "soft_ratio" and any(not 0 <= float(v) <= 1 for v in sweep.values):
            problems.append("soft_ratio sweep values must lie within [0, 1]")
        if sweep.axis in ("k", "o") and any(not 0 < float(v) <= 1 for v in sweep.values):
            problems.append(f"{sweep.axis} sweep values must lie within (0, 1]")
        if sweep.axis in ("app_count", "node_count") and any(
            float(v) < 1 or not math.isclose(float(v), round(float(v))) for v in sweep.values
        ):
            problems.append(f"{sweep.axis} sweep values must be positive integers")
        elif sweep.values:
            app_counts = (
                [float(v) for v in sweep.values] if sweep.axis == "app_count" else [self.app_config().app_count]
            )
            node_counts = (
                [float(v) for v in sweep.values] if sweep.axis == "node_count" else [self.network_config().node_count]
            )
            if max(app_counts) > min(node_counts):
                problems.append("every application needs its own App Node: app_count must not exceed node_count")
        if int(self.experiment.workers) < 1:
            problems.append("experiment.workers must be at least 1")
        if problems:
            raise InvalidConfig("Invalid experiment section", problems)

    def experiment_config(self) -> ExperimentConfig:
        """Validate the tree and return the typed configuration."""
        self.validate()
        return ExperimentConfig(
            network=self.network_config(),
            apps=self.app_config(),
            scheduler=self.scheduler_params(),
            oracle=self.oracle_limits(),
            master_seed=int(self.experiment.master_seed),
            seeds=self.seeds(),
            schedulers=tuple(self.experiment.schedulers),
            sweep=self.sweep_spec(),
            workers=int(self.experiment.workers),
        )


def load_experiment_config(source) -> ExperimentConfig:
    """Load, validate and type a configuration from a file path, document string or mapping."""
    if isinstance(source, dict):
        return ExperimentContext.load(source).experiment_config()
    if isinstance(source, str) and "\n" not in source and source.endswith((".json", ".yaml", ".yml")):
        return ExperimentContext.load_file(source).experiment_config()
    return ExperimentContext.load(source).experiment_config()
