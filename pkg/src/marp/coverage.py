"""Unique-coverage rewards and pairwise route overlaps."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from marp.errors import InvalidParameterError

__all__ = ["CoverageStats", "compute_coverage", "coverage_of_selection", "write_coverage_csv"]


@dataclass(frozen=True)
class CoverageStats:
    """Static per-fleet coverage data.

    unique_counts
        ``u_i``: nodes of route ``i`` that no other route in the full fleet visits.
    overlaps
        ``{(i, j): c_ij}`` for ``i < j`` and ``c_ij > 0`` only.
    node_usage
        node id -> number of routes (full fleet) that visit it.
    """

    unique_counts: tuple[int, ...]
    overlaps: Mapping[tuple[int, int], int]
    node_usage: Mapping[int, int] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.unique_counts)

    def overlap_sums(self) -> np.ndarray:
        """``s_i``: total overlap of vehicle ``i`` with all other vehicles."""
        s = np.zeros(self.n, dtype=np.int64)
        for (i, j), c in self.overlaps.items():
            s[i] += c
            s[j] += c
        return s


def compute_coverage(instance) -> CoverageStats:
    """Build :class:`CoverageStats` through a node -> vehicles inverted index.

    Pairs are generated per shared node, so the cost is the sum over nodes
    of (usage choose 2) rather than one intersection per vehicle pair.
    """
    n = instance.n_vehicles
    routes = instance.route_sets
    if n == 0:
        return CoverageStats((), {}, {})
    sizes = np.fromiter((len(r) for r in routes), dtype=np.int64, count=n)
    owners = np.repeat(np.arange(n, dtype=np.int64), sizes)
    nodes = np.fromiter((node for r in routes for node in sorted(r)), dtype=np.int64, count=int(sizes.sum()))

    order = np.lexsort((owners, nodes))
    nodes, owners = nodes[order], owners[order]
    uniq_nodes, starts, usage = np.unique(nodes, return_index=True, return_counts=True)

    unique = np.zeros(n, dtype=np.int64)
    solo = usage == 1
    np.add.at(unique, owners[starts[solo]], 1)

    keys = []
    for start, k in zip(starts[~solo], usage[~solo]):
        members = owners[start:start + k]
        a, b = np.triu_indices(k, 1)
        keys.append(members[a] * n + members[b])
    overlaps: dict[tuple[int, int], int] = {}
    if keys:
        pair_keys, counts = np.unique(np.concatenate(keys), return_counts=True)
        ii, jj = np.divmod(pair_keys, n)
        overlaps = {(int(i), int(j)): int(c) for i, j, c in zip(ii, jj, counts)}

    node_usage = {int(a): int(b) for a, b in zip(uniq_nodes, usage)}
    return CoverageStats(tuple(int(u) for u in unique), overlaps, node_usage)


def _as_selection(x, n: int) -> np.ndarray:
    arr = np.asarray(x, dtype=np.int8).ravel()
    if arr.shape[0] != n:
        raise InvalidParameterError(f"selection has length {arr.shape[0]}, expected {n}")
    if np.any((arr != 0) & (arr != 1)):
        raise InvalidParameterError("selection must be binary")
    return arr


def coverage_of_selection(instance, stats: CoverageStats, x) -> tuple[int, int]:
    """Return ``(covered_nodes, total_overlap)`` of the selected vehicles."""
    sel = _as_selection(x, instance.n_vehicles)
    covered = set()
    for i in np.flatnonzero(sel):
        covered |= instance.route_sets[i]
    overlap = sum(c for (i, j), c in stats.overlaps.items() if sel[i] and sel[j])
    return len(covered), int(overlap)


def write_coverage_csv(stats: CoverageStats, path) -> None:
    """Dump ``i,u_i`` rows followed by ``i,j,c_ij`` rows."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for i, u in enumerate(stats.unique_counts):
            w.writerow([i, u])
        for (i, j), c in sorted(stats.overlaps.items()):
            w.writerow([i, j, c])
