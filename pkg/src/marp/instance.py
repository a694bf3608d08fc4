"""Synthetic road networks, vehicle routes and the instance JSON format.

Routes are ordered node lists; every downstream computation treats a route
as the *set* of nodes it visits.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial.distance import pdist, squareform

from marp.errors import InvalidParameterError, NoPathError, ParseError, ValidationError

__all__ = [
    "RoadNetwork",
    "Vehicle",
    "MarpInstance",
    "generate_network",
    "generate_instance",
    "shortest_route",
    "save_instance",
    "load_instance",
    "instance_to_json",
    "instance_from_json",
]

NETWORK_KINDS = ("grid", "random_geometric")
GRID_JITTER = 0.10
RADIUS_TOL = 1e-3


def _sig9(value: float) -> float:
    # everything stored in an instance is pre-rounded so that JSON round trips are exact
    return float(f"{value:.9g}")


@dataclass(frozen=True)
class RoadNetwork:
    """Undirected road graph.

    ``nodes`` holds ``(node_id, x, y)`` triples, ``edges`` holds
    ``(u, v, length)`` triples with ``u < v``.
    """

    nodes: tuple[tuple[int, float, float], ...]
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        for k, node in enumerate(self.nodes):
            if node[0] != k:
                raise ValidationError(f"network.nodes[{k}]: node ids must be contiguous from 0, got {node[0]}")
        n = len(self.nodes)
        seen = set()
        for k, (u, v, length) in enumerate(self.edges):
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"network.edges[{k}]: endpoint out of range ({u}, {v})")
            if u == v:
                raise ValidationError(f"network.edges[{k}]: self-loop on node {u}")
            if length < 0 or not math.isfinite(length):
                raise ValidationError(f"network.edges[{k}]: invalid length {length}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValidationError(f"network.edges[{k}]: duplicate edge {key}")
            seen.add(key)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @cached_property
    def neighbors(self) -> tuple[frozenset, ...]:
        adj = [set() for _ in range(self.n_nodes)]
        for u, v, _ in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(frozenset(a) for a in adj)

    @cached_property
    def edge_lengths(self) -> dict[tuple[int, int], float]:
        out = {}
        for u, v, length in self.edges:
            out[(u, v)] = length
            out[(v, u)] = length
        return out

    @cached_property
    def csr(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency; explicit zeros are kept as edges."""
        n = self.n_nodes
        if not self.edges:
            return sp.csr_matrix((n, n))
        e = np.asarray(self.edges, dtype=float)
        u = e[:, 0].astype(np.int64)
        v = e[:, 1].astype(np.int64)
        w = e[:, 2]
        return sp.csr_matrix(
            (np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(n, n),
        )

    def is_connected(self) -> bool:
        if self.n_nodes == 0:
            return False
        n_comp, _ = connected_components(self.csr, directed=False)
        return n_comp == 1


@dataclass(frozen=True)
class Vehicle:
    vehicle_id: int
    origin: int
    destination: int
    route: tuple[int, ...]

    @property
    def node_set(self) -> frozenset:
        return frozenset(self.route)


@dataclass(frozen=True)
class MarpInstance:
    network: RoadNetwork
    vehicles: tuple[Vehicle, ...]
    seed: int = 0
    radius_label: str = ""

    def __post_init__(self):
        validate_vehicles(self.network, self.vehicles)

    @property
    def n_vehicles(self) -> int:
        return len(self.vehicles)

    @cached_property
    def route_sets(self) -> tuple[frozenset, ...]:
        return tuple(v.node_set for v in self.vehicles)

    def with_vehicles(self, k: int) -> "MarpInstance":
        """Instance restricted to the first ``k`` vehicles."""
        return MarpInstance(self.network, self.vehicles[:k], self.seed, self.radius_label)


def validate_vehicles(network: RoadNetwork, vehicles: Sequence[Vehicle]) -> None:
    n = network.n_nodes
    adj = network.neighbors
    for k, veh in enumerate(vehicles):
        where = f"vehicles[{k}]"
        if veh.vehicle_id != k:
            raise ValidationError(f"{where}.id: vehicle ids must be contiguous from 0, got {veh.vehicle_id}")
        if not veh.route:
            raise ValidationError(f"{where}.route: empty route")
        for node in veh.route:
            if not 0 <= node < n:
                raise ValidationError(f"{where}.route: node {node} not in network of {n} nodes")
        if veh.route[0] != veh.origin or veh.route[-1] != veh.destination:
            raise ValidationError(f"{where}.route: must start at origin and end at destination")
        for a, b in zip(veh.route, veh.route[1:]):
            if b not in adj[a]:
                raise ValidationError(f"{where}.route: nodes {a} and {b} are not adjacent")


# ---------------------------------------------------------------------------
# generation


def generate_network(kind: str, size_param: int, seed: int) -> RoadNetwork:
    """Build a connected synthetic road network.

    ``grid`` gives a ``size_param x size_param`` lattice whose unit edge
    lengths carry +-10 % jitter drawn from ``seed``. ``random_geometric``
    scatters ``size_param`` points in the unit square and links every pair
    closer than the smallest radius that makes the graph connected.
    """
    if kind not in NETWORK_KINDS:
        raise InvalidParameterError(f"unknown network kind {kind!r}; expected one of {NETWORK_KINDS}")
    if int(size_param) < 2:
        raise InvalidParameterError(f"size_param must be >= 2, got {size_param}")
    rng = np.random.default_rng(seed)
    if kind == "grid":
        return _grid_network(int(size_param), rng)
    return _random_geometric_network(int(size_param), rng)


def _grid_network(side: int, rng: np.random.Generator) -> RoadNetwork:
    nodes = tuple((r * side + c, float(c), float(r)) for r in range(side) for c in range(side))
    pairs = []
    for r in range(side):
        for c in range(side):
            k = r * side + c
            if c + 1 < side:
                pairs.append((k, k + 1))
            if r + 1 < side:
                pairs.append((k, k + side))
    jitter = rng.uniform(-GRID_JITTER, GRID_JITTER, size=len(pairs))
    edges = tuple((u, v, _sig9(1.0 + j)) for (u, v), j in zip(pairs, jitter))
    return RoadNetwork(nodes, edges)


def _random_geometric_network(n: int, rng: np.random.Generator) -> RoadNetwork:
    pts = np.vectorize(_sig9)(rng.random((n, 2)))
    dist = squareform(pdist(pts))

    def connected(radius: float) -> bool:
        adj = sp.csr_matrix(dist <= radius)
        return connected_components(adj, directed=False)[0] == 1

    lo, hi = 0.0, math.sqrt(2.0)
    while hi - lo > RADIUS_TOL:
        mid = 0.5 * (lo + hi)
        if connected(mid):
            hi = mid
        else:
            lo = mid
    iu, ju = np.nonzero(np.triu(dist <= hi, k=1))
    nodes = tuple((k, float(pts[k, 0]), float(pts[k, 1])) for k in range(n))
    edges = tuple((int(u), int(v), _sig9(dist[u, v])) for u, v in zip(iu, ju))
    return RoadNetwork(nodes, edges)


def shortest_route(network: RoadNetwork, origin: int, destination: int,
                   dist_from: np.ndarray | None = None,
                   dist_to: np.ndarray | None = None) -> tuple[int, ...]:
    """Shortest path by edge length; among equal-length paths the
    lexicographically smallest node sequence wins."""
    if dist_from is None or dist_to is None:
        dist_from, dist_to = dijkstra(network.csr, directed=False, indices=[origin, destination])
    total = dist_from[destination]
    if not np.isfinite(total):
        raise NoPathError(f"no path from node {origin} to node {destination}")
    tol = 1e-9 * max(1.0, total)
    lengths = network.edge_lengths
    route = [origin]
    visited = {origin}
    node = origin
    while node != destination:
        nxt = None
        for v in sorted(network.neighbors[node]):
            if v in visited:
                continue
            if abs(dist_from[node] + lengths[(node, v)] - dist_from[v]) > tol:
                continue
            if abs(dist_from[v] + dist_to[v] - total) > tol:
                continue
            nxt = v
            break
        if nxt is None:
            raise NoPathError(f"could not trace a shortest path from {origin} to {destination}")
        route.append(nxt)
        visited.add(nxt)
        node = nxt
    return tuple(route)


def generate_instance(network: RoadNetwork, n_vehicles: int, seed: int,
                      radius_label: str = "") -> MarpInstance:
    """Sample ``n_vehicles`` origin/destination pairs uniformly (origin !=
    destination, repeats across vehicles allowed) and route each one along
    its shortest path."""
    if int(n_vehicles) < 1:
        raise InvalidParameterError(f"n_vehicles must be >= 1, got {n_vehicles}")
    n = network.n_nodes
    if n < 2:
        raise InvalidParameterError("network needs at least two nodes")
    if not network.is_connected():
        raise NoPathError("network is not connected")
    rng = np.random.default_rng(seed)
    origins = rng.integers(0, n, size=n_vehicles)
    dest = rng.integers(0, n - 1, size=n_vehicles)
    dest = dest + (dest >= origins)

    sources = np.unique(np.concatenate([origins, dest]))
    row_of = {int(s): k for k, s in enumerate(sources)}
    dist = dijkstra(network.csr, directed=False, indices=sources)

    vehicles = []
    for vid, (o, d) in enumerate(zip(origins.tolist(), dest.tolist())):
        route = shortest_route(network, o, d, dist[row_of[o]], dist[row_of[d]])
        vehicles.append(Vehicle(vid, o, d, route))
    return MarpInstance(network, tuple(vehicles), int(seed), radius_label)


# ---------------------------------------------------------------------------
# JSON schema


def instance_to_json(instance: MarpInstance) -> str:
    doc = {
        "seed": instance.seed,
        "radius_label": instance.radius_label,
        "network": {
            "nodes": [[i, _sig9(x), _sig9(y)] for i, x, y in instance.network.nodes],
            "edges": [[u, v, _sig9(w)] for u, v, w in instance.network.edges],
        },
        "vehicles": [
            {"id": v.vehicle_id, "origin": v.origin, "destination": v.destination, "route": list(v.route)}
            for v in instance.vehicles
        ],
    }
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False) + "\n"


def save_instance(instance: MarpInstance, path) -> None:
    Path(path).write_text(instance_to_json(instance), encoding="utf-8")


def _need(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"missing field '{where}{key}'")
    value = obj[key]
    if kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise ParseError(f"field '{where}{key}' has wrong type {type(value).__name__}")
    return value


def _triple(item, types, where):
    if not isinstance(item, list) or len(item) != 3:
        raise ParseError(f"field '{where}' must be a 3-element list")
    out = []
    for k, (value, kind) in enumerate(zip(item, types)):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or (kind is int and not isinstance(value, int)):
            raise ParseError(f"field '{where}[{k}]' has wrong type {type(value).__name__}")
        out.append(kind(value))
    return tuple(out)


def instance_from_json(text: str) -> MarpInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    seed = _need(doc, "seed", int, "")
    label = _need(doc, "radius_label", str, "")
    net = _need(doc, "network", dict, "")
    raw_nodes = _need(net, "nodes", list, "network.")
    raw_edges = _need(net, "edges", list, "network.")
    nodes = tuple(_triple(item, (int, float, float), f"network.nodes[{k}]") for k, item in enumerate(raw_nodes))
    edges = tuple(_triple(item, (int, int, float), f"network.edges[{k}]") for k, item in enumerate(raw_edges))
    network = RoadNetwork(nodes, edges)
    vehicles = []
    for k, raw in enumerate(_need(doc, "vehicles", list, "")):
        where = f"vehicles[{k}]."
        route = _need(raw, "route", list, where)
        for node in route:
            if isinstance(node, bool) or not isinstance(node, int):
                raise ParseError(f"field '{where}route' must contain integers")
        vehicles.append(Vehicle(
            _need(raw, "id", int, where),
            _need(raw, "origin", int, where),
            _need(raw, "destination", int, where),
            tuple(route),
        ))
    return MarpInstance(network, tuple(vehicles), seed, label)


def load_instance(path) -> MarpInstance:
    return instance_from_json(Path(path).read_text(encoding="utf-8"))
