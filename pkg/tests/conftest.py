import itertools

import numpy as np
import pytest

from marp.instance import MarpInstance, RoadNetwork, Vehicle, generate_instance, generate_network


def path_network(n):
    nodes = tuple((i, float(i), 0.0) for i in range(n))
    edges = tuple((i, i + 1, 1.0) for i in range(n - 1))
    return RoadNetwork(nodes, edges)


def instance_from_routes(routes, n_nodes=None):
    """Instance on a path graph whose vehicles follow the given contiguous routes."""
    n_nodes = n_nodes or (max(max(r) for r in routes) + 1)
    vehicles = tuple(Vehicle(k, r[0], r[-1], tuple(r)) for k, r in enumerate(routes))
    return MarpInstance(path_network(n_nodes), vehicles, 0, "test")


@pytest.fixture
def demo_instance():
    # S1 = {a, b, c}, S2 = {c, d} with a..d = nodes 0..3
    return instance_from_routes([[0, 1, 2], [2, 3]])


def random_instance(n_vehicles, side, seed):
    net = generate_network("grid", side, seed)
    return generate_instance(net, n_vehicles, seed)


def naive_coverage(route_sets):
    n = len(route_sets)
    u = []
    for i in range(n):
        others = set().union(*(route_sets[j] for j in range(n) if j != i)) if n > 1 else set()
        u.append(len(set(route_sets[i]) - others))
    c = {}
    for i, j in itertools.combinations(range(n), 2):
        k = len(set(route_sets[i]) & set(route_sets[j]))
        if k:
            c[(i, j)] = k
    return u, c


def objective_from_sets(route_sets, lam, x):
    """Coverage-minus-penalty objective evaluated straight from route sets."""
    u, _ = naive_coverage(route_sets)
    n = len(route_sets)
    reward = sum(u[i] * x[i] for i in range(n))
    penalty = 0
    for i in range(n):
        for j in range(i + 1, n):
            if x[i] and x[j]:
                penalty += len(set(route_sets[i]) & set(route_sets[j]))
    return reward - lam * penalty


def brute_force_minimum(model):
    """Plain itertools enumeration, independent of the solver module."""
    best = None
    for bits in itertools.product((0, 1), repeat=model.n):
        e = float(model.linear @ np.array(bits, dtype=float))
        e += sum(q for (i, j), q in model.quadratic.items() if bits[i] and bits[j])
        if best is None or e < best[0] - 1e-9 * max(1, abs(e)):
            best = (e, bits)
    return best
