"""Post-optimisation metrics computed from node-level route usage."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping

import numpy as np

from marp.coverage import CoverageStats, _as_selection
from marp.errors import EmptySelectionError
from marp.qubo import QuboModel, energy

__all__ = [
    "MetricsReport",
    "METRICS_HEADER",
    "node_usage_selected",
    "avg_node_overlap",
    "top10_share",
    "overlap_graph",
    "entropy_and_hhi",
    "percentage_metrics",
    "full_report",
    "report_row",
    "format_metrics_csv",
]

METRICS_HEADER = (
    "n_vehicles", "lambda", "regime", "solver", "energy", "pct_cov", "pct_ov", "pct_veh",
    "avg_overlap", "s10", "density", "avg_degree", "entropy", "hhi", "wall_time_s",
)


@dataclass(frozen=True)
class MetricsReport:
    avg_node_overlap: float
    top10_share: float
    overlap_graph_density: float
    overlap_graph_avg_degree: float
    entropy_norm: float
    hhi: float
    pct_coverage: float
    pct_overlap: float
    pct_vehicles: float
    objective_energy: float
    n_selected: int = 0
    n_vehicles: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def node_usage_selected(instance, x) -> dict[int, int]:
    """Node -> number of *selected* routes through it; unused nodes are omitted."""
    sel = _as_selection(x, instance.n_vehicles)
    usage: dict[int, int] = {}
    for i in np.flatnonzero(sel):
        for node in instance.route_sets[i]:
            usage[node] = usage.get(node, 0) + 1
    return dict(sorted(usage.items()))


def _require(usage: Mapping[int, int]) -> None:
    if not usage:
        raise EmptySelectionError("no node is visited by the selection")


def avg_node_overlap(usage: Mapping[int, int]) -> float:
    _require(usage)
    return sum(usage.values()) / len(usage)


def top10_share(usage: Mapping[int, int]) -> float:
    """Share of total usage held by the top ceil(10 %) of nodes.

    Ties at the cut are resolved by ascending node id.
    """
    _require(usage)
    k = -(-len(usage) // 10)
    ranked = sorted(usage.items(), key=lambda kv: (-kv[1], kv[0]))
    return sum(v for _, v in ranked[:k]) / sum(usage.values())


def overlap_graph(instance, stats: CoverageStats, x) -> tuple[int, int, float, float]:
    """``(vertices, edges, density, average degree)`` of the overlap graph on selected vehicles.

    Density is 0 for fewer than two vertices; average degree is 0 for none.
    """
    sel = _as_selection(x, instance.n_vehicles)
    n = int(sel.sum())
    m = sum(1 for (i, j), c in stats.overlaps.items() if c > 0 and sel[i] and sel[j])
    density = 2.0 * m / (n * (n - 1)) if n > 1 else 0.0
    degree = 2.0 * m / n if n > 0 else 0.0
    return n, m, density, degree


def entropy_and_hhi(usage: Mapping[int, int]) -> tuple[float, float]:
    _require(usage)
    counts = np.fromiter(usage.values(), dtype=np.float64)
    p = counts / counts.sum()
    hhi = float(np.sum(p * p))
    if len(p) == 1:
        return 1.0, hhi
    h = float(-np.sum(p * np.log(p)))
    return h / math.log(len(p)), hhi


def percentage_metrics(instance, stats: CoverageStats, x) -> tuple[float, float, float]:
    """Coverage, overlap and fleet percentages relative to selecting every vehicle."""
    sel = _as_selection(x, instance.n_vehicles)
    n_total = instance.n_vehicles
    covered_all = len(stats.node_usage) if stats.node_usage else len(frozenset().union(*instance.route_sets))
    covered = len(node_usage_selected(instance, sel))
    ov_all = sum(stats.overlaps.values())
    ov_sel = sum(c for (i, j), c in stats.overlaps.items() if sel[i] and sel[j])
    pct_cov = 100.0 * covered / covered_all if covered_all else 0.0
    pct_ov = 100.0 * ov_sel / ov_all if ov_all else 0.0
    pct_veh = 100.0 * int(sel.sum()) / n_total if n_total else 0.0
    return pct_cov, pct_ov, pct_veh


def full_report(instance, stats: CoverageStats, model: QuboModel, solution) -> MetricsReport:
    """Every metric for one solution.

    With an empty selection the usage-based metrics are reported as 0.
    """
    x = solution.x
    usage = node_usage_selected(instance, x)
    n_sel, _, density, degree = overlap_graph(instance, stats, x)
    if usage:
        ubar = avg_node_overlap(usage)
        s10 = top10_share(usage)
        h, hhi = entropy_and_hhi(usage)
    else:
        ubar = s10 = h = hhi = 0.0
    pct_cov, pct_ov, pct_veh = percentage_metrics(instance, stats, x)
    return MetricsReport(ubar, s10, density, degree, h, hhi, pct_cov, pct_ov, pct_veh,
                         energy(model, x), n_sel, instance.n_vehicles)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def report_row(report: MetricsReport, model: QuboModel, solver: str, wall_time: float = 0.0) -> dict:
    return {
        "n_vehicles": report.n_vehicles,
        "lambda": float(model.lambda_used),
        "regime": model.lambda_regime,
        "solver": solver,
        "energy": report.objective_energy,
        "pct_cov": report.pct_coverage,
        "pct_ov": report.pct_overlap,
        "pct_veh": report.pct_vehicles,
        "avg_overlap": report.avg_node_overlap,
        "s10": report.top10_share,
        "density": report.overlap_graph_density,
        "avg_degree": report.overlap_graph_avg_degree,
        "entropy": report.entropy_norm,
        "hhi": report.hhi,
        "wall_time_s": float(wall_time),
    }


def format_metrics_csv(rows: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    for row in rows:
        w.writerow([_fmt(row[k]) for k in METRICS_HEADER])
    return buf.getvalue()
