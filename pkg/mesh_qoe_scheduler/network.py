"""Random mesh network: nodes, symmetric links, static routes and per-route delay and BER."""

import heapq
import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import networkx as nx
import numpy as np

from mesh_qoe_scheduler.config import NetworkConfig
from mesh_qoe_scheduler.errors import ConnectivityFailure, InvalidConfig, Unreachable

logger = logging.getLogger(__name__)

Capacity = Tuple[float, float, float]


@dataclass(frozen=True)
class ComputeNode:
    """A mesh node with CPU, GPU (Gcycles/s) and IO (MB/s) capacity."""

    id: int
    x: float
    y: float
    f_cpu: float
    f_gpu: float
    io: float
    is_app_node: bool = False

    @property
    def capacity(self) -> Capacity:
        """Capacity vector ordered (CPU, GPU, IO)."""
        return (self.f_cpu, self.f_gpu, self.io)


@dataclass(frozen=True)
class Link:
    """An undirected link; endpoints are stored with `a < b`."""

    a: int
    b: int
    rate: float
    ber: float

    @property
    def key(self) -> Tuple[int, int]:
        """Canonical endpoint pair."""
        return (self.a, self.b)

    def other(self, node: int) -> int:
        """Endpoint opposite to `node`."""
        return self.b if node == self.a else self.a


def link_key(node_a: int, node_b: int) -> Tuple[int, int]:
    """Canonical (low, high) key of the link between two nodes."""
    return (node_a, node_b) if node_a < node_b else (node_b, node_a)


@dataclass(frozen=True)
class Route:
    """Ordered hops from `nodes[0]` to `nodes[-1]`; a single node means no hops."""

    nodes: Tuple[int, ...]
    hops: Tuple[Link, ...] = ()

    @property
    def source(self) -> int:
        """First node of the route."""
        return self.nodes[0]

    @property
    def destination(self) -> int:
        """Last node of the route."""
        return self.nodes[-1]

    def reversed(self) -> "Route":
        """The same path walked from the destination back to the source."""
        return Route(nodes=tuple(reversed(self.nodes)), hops=tuple(reversed(self.hops)))


def transmission_time(route: Route, megabytes: float) -> float:
    """Seconds needed to push `megabytes` along `route`, hop by hop.

    No hops costs nothing, one hop costs `megabytes / rate`, and a multi-hop
    route costs the sum over its hops.
    """
    if not route.hops:
        return 0.0
    if len(route.hops) == 1:
        return megabytes / route.hops[0].rate
    return math.fsum(megabytes / hop.rate for hop in route.hops)


def path_ber(route: Route) -> float:
    """Bit error rate of a route: the worst hop, or 0 without hops."""
    if not route.hops:
        return 0.0
    return max(hop.ber for hop in route.hops)


@dataclass(frozen=True)
class NetworkGraph:
    """Immutable mesh network with precomputed routes and network-wide averages."""

    nodes: Tuple[ComputeNode, ...]
    links: Mapping[Tuple[int, int], Link]
    routes: Mapping[Tuple[int, int], Route] = field(default_factory=dict, compare=False, repr=False)
    route_relaxations: int = field(default=0, compare=False, repr=False)

    @property
    def node_count(self) -> int:
        """Number of nodes."""
        return len(self.nodes)

    @property
    def app_nodes(self) -> List[int]:
        """Ids of the nodes flagged as App Nodes."""
        return [node.id for node in self.nodes if node.is_app_node]

    @property
    def mean_rate(self) -> float:
        """Average link rate in MB/s; infinite without links, so transfers cost nothing."""
        if not self.links:
            return math.inf
        return float(np.mean([link.rate for link in self.sorted_links()]))

    @property
    def mean_capacity(self) -> Capacity:
        """Average capacity vector over all nodes."""
        means = np.mean(np.array([node.capacity for node in self.nodes]), axis=0)
        return (float(means[0]), float(means[1]), float(means[2]))

    @property
    def mean_ber(self) -> float:
        """Average link BER; 0 without links."""
        if not self.links:
            return 0.0
        return float(np.mean([link.ber for link in self.sorted_links()]))

    def sorted_links(self) -> List[Link]:
        """Links ordered by endpoint pair."""
        return [self.links[key] for key in sorted(self.links)]

    def link(self, node_a: int, node_b: int) -> Link:
        """The link between two nodes."""
        return self.links[link_key(node_a, node_b)]

    def neighbors(self, node: int) -> List[int]:
        """Adjacent node ids in ascending order."""
        return sorted(link.other(node) for link in self.links.values() if node in (link.a, link.b))

    def route(self, source: int, destination: int) -> Route:
        """The stored route between two nodes."""
        try:
            return self.routes[(source, destination)]
        except KeyError:
            # pylint: disable=raise-missing-from
            raise Unreachable(f"No route from node {source} to node {destination}")

    def transmission_time(self, source: int, destination: int, megabytes: float) -> float:
        """Transfer time between two nodes along the stored route."""
        if source == destination:
            return 0.0
        return transmission_time(self.route(source, destination), megabytes)

    def path_ber(self, source: int, destination: int) -> float:
        """BER between two nodes along the stored route."""
        if source == destination:
            return 0.0
        return path_ber(self.route(source, destination))

    def to_networkx(self) -> nx.Graph:
        """Undirected networkx view with `rate` and `ber` edge attributes."""
        graph = nx.Graph()
        for node in self.nodes:
            graph.add_node(node.id, pos=(node.x, node.y), capacity=node.capacity)
        for link in self.sorted_links():
            graph.add_edge(link.a, link.b, rate=link.rate, ber=link.ber)
        return graph

    def with_app_nodes(self, app_nodes: Iterable[int]) -> "NetworkGraph":
        """A copy whose App Node flags are exactly `app_nodes`."""
        flagged = set(app_nodes)
        nodes = tuple(replace(node, is_app_node=node.id in flagged) for node in self.nodes)
        return replace(self, nodes=nodes)

    def to_dict(self) -> Dict:
        """JSON-ready topology document."""
        return {
            "nodes": [
                {
                    "id": node.id,
                    "x": node.x,
                    "y": node.y,
                    "f_cpu": node.f_cpu,
                    "f_gpu": node.f_gpu,
                    "io": node.io,
                    "is_app_node": node.is_app_node,
                }
                for node in self.nodes
            ],
            "links": [
                {"a": link.a, "b": link.b, "rate_mbps": link.rate, "ber": link.ber} for link in self.sorted_links()
            ],
        }

    def to_json(self, indent: Optional[int] = None) -> str:
        """Serialize the topology; floats keep full precision."""
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Mapping) -> "NetworkGraph":
        """Rebuild a graph (and its routes) from a topology document."""
        nodes = tuple(
            ComputeNode(
                id=int(item["id"]),
                x=float(item["x"]),
                y=float(item["y"]),
                f_cpu=float(item["f_cpu"]),
                f_gpu=float(item["f_gpu"]),
                io=float(item["io"]),
                is_app_node=bool(item.get("is_app_node", False)),
            )
            for item in data["nodes"]
        )
        links = {}
        for item in data["links"]:
            key = link_key(int(item["a"]), int(item["b"]))
            links[key] = Link(a=key[0], b=key[1], rate=float(item["rate_mbps"]), ber=float(item["ber"]))
        return with_routes(cls(nodes=nodes, links=links))

    @classmethod
    def from_json(cls, document: str) -> "NetworkGraph":
        """Parse a topology document."""
        return cls.from_dict(json.loads(document))


def _adjacency(graph: NetworkGraph) -> Dict[int, List[Tuple[int, Link]]]:
    adjacency = {node.id: [] for node in graph.nodes}
    for link in graph.sorted_links():
        adjacency[link.a].append((link.b, link))
        adjacency[link.b].append((link.a, link))
    return adjacency


def _best_paths_from(source: int, adjacency: Mapping[int, List[Tuple[int, Link]]]) -> Tuple[Dict[int, Route], int]:
    """Label-setting search ordered by (per-MB time, hops, path BER, node sequence).

    Returns the best route to every reachable node and the number of links
    scanned from settled nodes.
    """
    best = {}
    relaxations = 0
    heap = [(0.0, 0, 0.0, (source,), ())]
    while heap:
        per_mb, hop_count, ber, path, hops = heapq.heappop(heap)
        node = path[-1]
        if node in best:
            continue
        best[node] = Route(nodes=path, hops=hops)
        relaxations += len(adjacency[node])
        for neighbor, link in adjacency[node]:
            if neighbor in best:
                continue
            heapq.heappush(
                heap,
                (per_mb + 1.0 / link.rate, hop_count + 1, max(ber, link.ber), path + (neighbor,), hops + (link,)),
            )
    return best, relaxations


def compute_routes(graph: NetworkGraph) -> Dict[Tuple[int, int], Route]:
    """Route table for every ordered node pair.

    Each route minimizes the per-MB transmission time (sum of 1/rate over
    hops); ties fall to fewer hops, then lower path BER, then the
    lexicographically smaller node sequence. Routes are computed from the
    lower node id and reversed for the opposite direction, so both
    directions share one path.

    Raises:
        Unreachable: if some pair has no path.
    """
    return _search_routes(graph)[0]


def _search_routes(graph: NetworkGraph) -> Tuple[Dict[Tuple[int, int], Route], int]:
    adjacency = _adjacency(graph)
    ids = sorted(node.id for node in graph.nodes)
    routes = {}
    relaxations = 0
    for source in ids:
        routes[(source, source)] = Route(nodes=(source,))
        best, scanned = _best_paths_from(source, adjacency)
        relaxations += scanned
        for destination in ids:
            if destination <= source:
                continue
            if destination not in best:
                raise Unreachable(f"No route from node {source} to node {destination}")
            route = best[destination]
            routes[(source, destination)] = route
            routes[(destination, source)] = route.reversed()
    return routes, relaxations


def with_routes(graph: NetworkGraph) -> NetworkGraph:
    """Return `graph` with its route table populated and the route search effort recorded."""
    routes, relaxations = _search_routes(graph)
    return replace(graph, routes=routes, route_relaxations=relaxations)


def build_random_network(cfg: NetworkConfig, seed: int) -> NetworkGraph:
    """Place nodes uniformly in the square area and link every pair within range.

    Placement is redrawn from a derived sub-seed until the graph is
    connected, at most `cfg.max_attempts` times.

    Raises:
        InvalidConfig: if the configuration is unusable.
        ConnectivityFailure: if no connected placement was found.
    """
    problems = cfg.problems()
    if problems:
        raise InvalidConfig("Invalid network configuration", problems)

    for attempt in range(cfg.max_attempts):
        rng = np.random.default_rng([seed, attempt])
        positions = rng.uniform(0.0, cfg.area_m, size=(cfg.node_count, 2))
        capacities = rng.uniform(cfg.capacity_range[0], cfg.capacity_range[1], size=(cfg.node_count, 3))
        nodes = tuple(
            ComputeNode(
                id=i,
                x=float(positions[i, 0]),
                y=float(positions[i, 1]),
                f_cpu=float(capacities[i, 0]),
                f_gpu=float(capacities[i, 1]),
                io=float(capacities[i, 2]),
            )
            for i in range(cfg.node_count)
        )
        links = {}
        for a in range(cfg.node_count):
            for b in range(a + 1, cfg.node_count):
                distance = math.hypot(positions[a, 0] - positions[b, 0], positions[a, 1] - positions[b, 1])
                if distance > cfg.comm_range_m:
                    continue
                rate = float(rng.uniform(cfg.rate_range_mbps[0], cfg.rate_range_mbps[1]))
                ber = float(cfg.ber_set[int(rng.integers(len(cfg.ber_set)))])
                links[(a, b)] = Link(a=a, b=b, rate=rate, ber=ber)

        graph = NetworkGraph(nodes=nodes, links=links)
        if nx.is_connected(graph.to_networkx()):
            logger.debug("Connected %d-node network after %d attempt(s)", cfg.node_count, attempt + 1)
            return with_routes(graph)

    raise ConnectivityFailure(
        f"No connected placement of {cfg.node_count} nodes within {cfg.max_attempts} attempts (seed {seed})"
    )
