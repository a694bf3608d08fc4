"""Penalty and fleet-size sweeps, Pareto frontiers and knee detection."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from marp.coverage import compute_coverage
from marp.errors import InsufficientDataError, InvalidParameterError, ParseError, SizeLimitError
from marp.instance import MarpInstance, generate_instance, generate_network
from marp.metrics import MetricsReport, format_metrics_csv, full_report, report_row
from marp.qubo import PenaltyConfig, build_qubo
from marp.solvers import default_sa_params, solve_exact, solve_greedy, solve_sa

__all__ = [
    "SweepConfig",
    "SweepRecord",
    "ParetoPoint",
    "DEFAULT_BINS",
    "run_sweep",
    "sweep_csv",
    "pareto_frontier",
    "binned_frontiers",
    "knee_point",
    "pareto_csv",
    "points_from_metrics_csv",
    "thread_count",
]

# desk-scale version of the 100-300 / 500-1000 / 2000-3000 / 5000-10000 fleet groups
DEFAULT_BINS = ((10, 30), (50, 100), (200, 300), (500, 1000))
SOLVERS = ("exact", "sa", "greedy")


def thread_count() -> int:
    raw = os.environ.get("MARP_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise InvalidParameterError(f"MARP_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise InvalidParameterError("MARP_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def _bin_label(b: tuple[int, int]) -> str:
    return f"{b[0]}-{b[1]}"


@dataclass(frozen=True)
class SweepConfig:
    lambda_values: tuple
    fleet_sizes: tuple[int, ...]
    solver: str = "sa"
    seeds: tuple[int, ...] = (0,)
    bins: tuple[tuple[int, int], ...] | None = None
    network_kind: str = "grid"
    network_size: int = 10
    num_reads: int = 100
    sweeps: int = 1000

    def __post_init__(self):
        if not self.lambda_values or not self.fleet_sizes or not self.seeds:
            raise InvalidParameterError("lambda_values, fleet_sizes and seeds must be non-empty")
        for lam in self.lambda_values:
            if isinstance(lam, str):
                if lam not in ("soft", "hard"):
                    raise InvalidParameterError(f"symbolic lambda must be 'soft' or 'hard', got {lam!r}")
            elif not lam > 0:
                raise InvalidParameterError(f"numeric lambda must be positive, got {lam}")
        if self.solver not in SOLVERS:
            raise InvalidParameterError(f"unknown solver {self.solver!r}")
        if self.bins is None:
            object.__setattr__(self, "bins", tuple((f, f) for f in sorted(set(self.fleet_sizes))))
        bins = sorted(self.bins)
        for (lo, hi), (lo2, _) in zip(bins, bins[1:]):
            if lo2 <= hi:
                raise InvalidParameterError(f"bins {lo}-{hi} and {lo2}-... overlap")
        for f in self.fleet_sizes:
            if not any(lo <= f <= hi for lo, hi in bins):
                raise InvalidParameterError(f"fleet size {f} is not covered by any bin")

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SweepConfig":
        try:
            net = doc.get("network", {})
            sa = doc.get("sa", {})
            bins = doc.get("bins")
            return cls(
                lambda_values=tuple(doc["lambda_values"]),
                fleet_sizes=tuple(int(f) for f in doc["fleet_sizes"]),
                solver=doc.get("solver", "sa"),
                seeds=tuple(int(s) for s in doc.get("seeds", [0])),
                bins=None if bins is None else tuple((int(lo), int(hi)) for lo, hi in bins),
                network_kind=net.get("kind", "grid"),
                network_size=int(net.get("size", 10)),
                num_reads=int(sa.get("num_reads", 100)),
                sweeps=int(sa.get("sweeps", 1000)),
            )
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r} in sweep config") from None
        except (TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"malformed sweep config: {exc}") from None

    def bin_of(self, fleet_size: int) -> tuple[int, int]:
        for b in self.bins:
            if b[0] <= fleet_size <= b[1]:
                return b
        raise InvalidParameterError(f"fleet size {fleet_size} is not covered by any bin")


@dataclass(frozen=True)
class SweepRecord:
    row_id: int
    fleet_size: int
    seed: int
    lambda_index: int
    lambda_value: float
    regime: str
    solver: str
    report: MetricsReport
    row: Mapping = field(repr=False)


@dataclass(frozen=True)
class ParetoPoint:
    pct_cov: float
    pct_ov: float
    lambda_value: float
    regime: str
    fleet_size: int
    source_row_id: int

    @classmethod
    def from_record(cls, rec: SweepRecord) -> "ParetoPoint":
        return cls(rec.report.pct_coverage, rec.report.pct_overlap, rec.lambda_value, rec.regime,
                   rec.fleet_size, rec.row_id)


def _penalty(entry) -> PenaltyConfig:
    if isinstance(entry, str):
        return PenaltyConfig(entry)
    return PenaltyConfig("custom", float(entry))


def _solve(model, config: SweepConfig, seed: int):
    if config.solver == "exact":
        return solve_exact(model)
    if config.solver == "greedy":
        return solve_greedy(model)
    return solve_sa(model, default_sa_params(model, seed, config.num_reads, config.sweeps))


InstanceSource = MarpInstance | Callable[[int, int], MarpInstance] | None


def _instance_for(config: SweepConfig, source: InstanceSource, fleet_size: int, seed: int) -> MarpInstance:
    if isinstance(source, MarpInstance):
        if fleet_size > source.n_vehicles:
            raise InvalidParameterError(f"fleet size {fleet_size} exceeds the {source.n_vehicles} vehicles available")
        return source.with_vehicles(fleet_size)
    if source is None:
        net = generate_network(config.network_kind, config.network_size, seed)
        return generate_instance(net, fleet_size, seed, f"{config.network_kind}{config.network_size}")
    return source(fleet_size, seed)


def run_sweep(config: SweepConfig, source: InstanceSource = None, threads: int | None = None) -> list[SweepRecord]:
    """Solve every (fleet_size, seed, lambda) cell and report its metrics.

    ``source`` is a fixed instance (fleets are its leading vehicles), a
    ``(fleet_size, seed) -> instance`` callable, or ``None`` for the
    synthetic generator named in ``config``. Rows come back ordered by
    (fleet_size, seed, lambda index) whatever the thread count.
    """
    cells = [(f, s) for f in config.fleet_sizes for s in config.seeds]

    def run_cell(cell):
        fleet_size, seed = cell
        instance = _instance_for(config, source, fleet_size, seed)
        stats = compute_coverage(instance)
        out = []
        for k, entry in enumerate(config.lambda_values):
            model = build_qubo(stats, _penalty(entry))
            try:
                sol = _solve(model, config, seed)
            except SizeLimitError as exc:
                raise SizeLimitError(f"fleet_size={fleet_size} seed={seed} lambda={entry!r}: {exc}") from exc
            rep = full_report(instance, stats, model, sol)
            out.append((fleet_size, seed, k, model, sol, rep))
        return out

    workers = thread_count() if threads is None else max(1, threads)
    if workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(c) for c in cells]

    records = []
    for cell_rows in results:
        for fleet_size, seed, k, model, sol, rep in cell_rows:
            row = report_row(rep, model, sol.solver, sol.wall_time)
            records.append(SweepRecord(len(records), fleet_size, seed, k, float(model.lambda_used),
                                       model.lambda_regime, sol.solver, rep, row))
    return records


def sweep_csv(records: Sequence[SweepRecord], record_time: bool = False) -> str:
    rows = []
    for rec in records:
        row = dict(rec.row)
        if not record_time:
            row["wall_time_s"] = 0.0
        rows.append(row)
    return format_metrics_csv(rows)


def _dominates(a: ParetoPoint, b: ParetoPoint) -> bool:
    return (a.pct_cov >= b.pct_cov and a.pct_ov <= b.pct_ov
            and (a.pct_cov > b.pct_cov or a.pct_ov < b.pct_ov))


def pareto_frontier(points: Iterable[ParetoPoint]) -> list[ParetoPoint]:
    """Points no other point strictly dominates (coverage up, overlap down).

    Exact duplicates survive together. Output is sorted by ascending overlap.
    """
    pts = list(points)
    keep = [p for p in pts if not any(_dominates(q, p) for q in pts)]
    return sorted(keep, key=lambda p: (p.pct_ov, -p.pct_cov, p.source_row_id))


def binned_frontiers(rows: Iterable, bins: Sequence[tuple[int, int]]) -> dict[str, list[ParetoPoint]]:
    points = [r if isinstance(r, ParetoPoint) else ParetoPoint.from_record(r) for r in rows]
    out = {}
    for b in bins:
        members = [p for p in points if b[0] <= p.fleet_size <= b[1]]
        out[_bin_label(b)] = pareto_frontier(members)
    return out


def knee_point(frontier: Sequence[ParetoPoint]) -> ParetoPoint:
    """Interior frontier point farthest from the chord between the endpoints.

    Both objectives are min-max normalised over the frontier first; ties go
    to the point with lower overlap.
    """
    if len(frontier) < 3:
        raise InsufficientDataError(f"knee detection needs at least 3 frontier points, got {len(frontier)}")
    pts = sorted(frontier, key=lambda p: (p.pct_ov, -p.pct_cov, p.source_row_id))
    covs = [p.pct_cov for p in pts]
    ovs = [p.pct_ov for p in pts]

    def scale(values):
        lo, hi = min(values), max(values)
        span = hi - lo
        return [(v - lo) / span if span > 0 else 0.0 for v in values]

    cx, cy = scale(ovs), scale(covs)
    dx, dy = cx[-1] - cx[0], cy[-1] - cy[0]
    norm = math.hypot(dx, dy)
    best, best_d = 1, -1.0
    for k in range(1, len(pts) - 1):
        d = abs(dx * (cy[k] - cy[0]) - dy * (cx[k] - cx[0])) / norm if norm > 0 else 0.0
        if d > best_d + 1e-12:
            best, best_d = k, d
    return pts[best]


def pareto_csv(frontiers: Mapping[str, Sequence[ParetoPoint]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin", "pct_cov", "pct_ov", "lambda", "regime", "fleet_size", "is_knee"])
    for label, front in frontiers.items():
        knee = knee_point(front) if len(front) >= 3 else None
        for p in front:
            w.writerow([label, f"{p.pct_cov:.9g}", f"{p.pct_ov:.9g}", f"{p.lambda_value:.9g}", p.regime,
                        p.fleet_size, int(knee is not None and p is knee)])
    return buf.getvalue()


def points_from_metrics_csv(text: str) -> list[ParetoPoint]:
    reader = csv.DictReader(io.StringIO(text))
    points = []
    for k, row in enumerate(reader):
        try:
            points.append(ParetoPoint(float(row["pct_cov"]), float(row["pct_ov"]), float(row["lambda"]),
                                      row["regime"], int(row["n_vehicles"]), k))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"metrics row {k + 1}: {exc}") from None
    return points
