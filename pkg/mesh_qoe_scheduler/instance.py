"""Problem instances: a network plus the applications generated at its App Nodes."""

import json
from collections import Counter
from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from mesh_qoe_scheduler.apps import AppDag, generate_app
from mesh_qoe_scheduler.config import ExperimentConfig
from mesh_qoe_scheduler.errors import InvalidConfig, InvalidInstance
from mesh_qoe_scheduler.network import NetworkGraph, build_random_network

PURPOSE_NETWORK = 0
PURPOSE_APP_NODES = 1
PURPOSE_APPS = 2


def derive_seed(master_seed: int, seed: int, purpose: int, *keys: int) -> np.random.SeedSequence:
    """Independent seed for one purpose of one replication.

    Every stream is keyed by (master seed, replication seed, purpose, keys)
    so adding schedulers or sweep points never shifts another stream.
    """
    return np.random.SeedSequence([master_seed, seed, purpose, *keys])


def _as_int(sequence: np.random.SeedSequence) -> int:
    return int(sequence.generate_state(1)[0])


@dataclass(frozen=True)
class Instance:
    """A network and its applications, one application per App Node."""

    network: NetworkGraph
    apps: Tuple[AppDag, ...]

    @property
    def task_count(self) -> int:
        """Total number of tasks over all applications."""
        return sum(dag.task_count for dag in self.apps)

    def to_dict(self) -> Dict:
        """JSON-ready instance document."""
        return {"network": self.network.to_dict(), "apps": [dag.to_dict() for dag in self.apps]}

    def to_json(self, indent: Optional[int] = None) -> str:
        """Serialize the instance."""
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Mapping) -> "Instance":
        """Rebuild an instance from its document.

        Applications without an `app_id` take their position in the list.

        Raises:
            InvalidInstance: if two applications share an app id.
        """
        apps = tuple(AppDag.from_dict(item, app_id=index) for index, item in enumerate(data["apps"]))
        seen = Counter(dag.app_id for dag in apps)
        duplicates = sorted(app_id for app_id, count in seen.items() if count > 1)
        if duplicates:
            raise InvalidInstance(f"Duplicate app ids {duplicates}")
        return cls(network=NetworkGraph.from_dict(data["network"]), apps=apps)

    @classmethod
    def load(cls, filename: str) -> "Instance":
        """Read an instance JSON file."""
        with open(filename, encoding="UTF-8") as file:
            return cls.from_dict(json.load(file))

    def save(self, filename: str):
        """Write the instance as JSON."""
        with open(filename, "w", encoding="UTF-8") as file:
            file.write(self.to_json(indent=2))


def app_node_draw(cfg: ExperimentConfig, seed: int) -> List[int]:
    """Every node id in the order App Nodes are drawn for this replication.

    The draw depends on the network size only, so a larger application
    count extends the App Nodes of a smaller one.
    """
    rng = np.random.default_rng(derive_seed(cfg.master_seed, seed, PURPOSE_APP_NODES, cfg.network.node_count))
    return [int(node) for node in rng.permutation(cfg.network.node_count)]


def sample_app_nodes(cfg: ExperimentConfig, seed: int) -> List[int]:
    """App Node ids drawn uniformly without replacement, ascending.

    Raises:
        InvalidConfig: if there are more applications than nodes.
    """
    if cfg.apps.app_count > cfg.network.node_count:
        raise InvalidConfig(
            f"{cfg.apps.app_count} applications need as many App Nodes, the network has {cfg.network.node_count}"
        )
    return sorted(app_node_draw(cfg, seed)[: cfg.apps.app_count])


def generate_apps(cfg: ExperimentConfig, seed: int, app_nodes: List[int]) -> Tuple[AppDag, ...]:
    """One application per App Node, app ids following the node order.

    An application's tasks and QoS come from the stream of its owner's draw
    rank, so the k-th drawn App Node carries the same application at every
    application count and network size.
    """
    rank = {node: index for index, node in enumerate(app_node_draw(cfg, seed))}
    return tuple(
        generate_app(
            cfg.apps,
            derive_seed(cfg.master_seed, seed, PURPOSE_APPS, rank[owner]),
            owner=owner,
            app_id=app_id,
        )
        for app_id, owner in enumerate(app_nodes)
    )


def build_network(cfg: ExperimentConfig, seed: int) -> NetworkGraph:
    """Random network of one replication, shared by every sweep point with the same node count."""
    return build_random_network(
        cfg.network, _as_int(derive_seed(cfg.master_seed, seed, PURPOSE_NETWORK, cfg.network.node_count))
    )


def build_instance(cfg: ExperimentConfig, seed: int, network: Optional[NetworkGraph] = None) -> Instance:
    """Generate the network, pick the App Nodes and generate their applications.

    A prebuilt `network` replaces the generated one; App Nodes are still
    sampled from it.
    """
    if network is None:
        network = build_network(cfg, seed)
    elif network.node_count != cfg.network.node_count:
        cfg = replace(cfg, network=replace(cfg.network, node_count=network.node_count))
    app_nodes = sample_app_nodes(cfg, seed)
    return Instance(network=network.with_app_nodes(app_nodes), apps=generate_apps(cfg, seed, app_nodes))
