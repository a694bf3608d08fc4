"""QUBO assembly for vehicle selection.

The model minimises

    f(x) = sum_i Q_ii x_i + sum_{i<j} Q_ij x_i x_j

with ``Q_ii = -u_i`` and ``Q_ij = lam * c_ij``. Only the upper triangle is
stored and each stored ``Q_ij`` is the full pair coefficient (not half of a
symmetric split).
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from marp.coverage import CoverageStats
from marp.errors import InvalidParameterError, ParseError

__all__ = [
    "QuboModel",
    "PenaltyConfig",
    "lambda_hard",
    "lambda_soft",
    "resolve_lambda",
    "build_qubo",
    "energy",
    "energies",
    "add_one_hot_groups",
    "export_qubo",
    "import_qubo",
    "qubo_to_text",
    "qubo_from_text",
]

REGIMES = ("soft", "hard", "custom")


@dataclass(frozen=True, eq=False)
class QuboModel:
    n: int
    linear: np.ndarray
    quadratic: Mapping[tuple[int, int], float] = field(default_factory=dict)
    lambda_used: float = 0.0
    lambda_regime: str = "custom"

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=np.float64).copy()
        lin.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        if lin.shape != (self.n,):
            raise InvalidParameterError(f"linear has shape {lin.shape}, expected ({self.n},)")
        for (i, j), q in self.quadratic.items():
            if not 0 <= i < j < self.n:
                raise InvalidParameterError(f"quadratic key {(i, j)} must satisfy 0 <= i < j < {self.n}")
            if not math.isfinite(q):
                raise InvalidParameterError(f"quadratic coefficient {(i, j)} is not finite")

    @cached_property
    def pair_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Upper-triangle coordinates ``(rows, cols, values)`` sorted by key."""
        keys = sorted(self.quadratic)
        rows = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
        cols = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
        vals = np.fromiter((self.quadratic[k] for k in keys), dtype=np.float64, count=len(keys))
        return rows, cols, vals

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric CSR ``(indptr, indices, data)`` of the couplings."""
        rows, cols, vals = self.pair_arrays
        r = np.concatenate([rows, cols])
        c = np.concatenate([cols, rows])
        v = np.concatenate([vals, vals])
        order = np.lexsort((c, r))
        r, c, v = r[order], c[order], v[order]
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(indptr, r + 1, 1)
        return np.cumsum(indptr), c, v

    def allclose(self, other: "QuboModel", rtol: float = 1e-12) -> bool:
        if self.n != other.n or set(self.quadratic) != set(other.quadratic):
            return False
        if not np.allclose(self.linear, other.linear, rtol=rtol, atol=0.0):
            return False
        return all(math.isclose(q, other.quadratic[k], rel_tol=rtol) for k, q in self.quadratic.items())


@dataclass(frozen=True)
class PenaltyConfig:
    regime: str = "soft"
    custom_value: float | None = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise InvalidParameterError(f"unknown penalty regime {self.regime!r}")
        if self.regime == "custom" and (self.custom_value is None or not self.custom_value > 0):
            raise InvalidParameterError("custom regime needs a positive custom_value")


def lambda_hard(stats: CoverageStats) -> float:
    """One more than the total coverage reward, so no overlap ever pays off."""
    return float(1 + sum(stats.unique_counts))


def lambda_soft(stats: CoverageStats) -> float:
    """Median overlap load over median reward (reward floored at 1).

    Even-length medians average the two middle values.
    """
    if stats.n == 0:
        return 0.0
    s = stats.overlap_sums().tolist()
    return float(statistics.median(s) / max(1, statistics.median(stats.unique_counts)))


def resolve_lambda(stats: CoverageStats, penalty: PenaltyConfig) -> float:
    if penalty.regime == "hard":
        return lambda_hard(stats)
    if penalty.regime == "soft":
        return lambda_soft(stats)
    return float(penalty.custom_value)


def build_qubo(stats: CoverageStats, penalty: PenaltyConfig) -> QuboModel:
    lam = resolve_lambda(stats, penalty)
    if lam < 0 or (penalty.regime != "soft" and lam <= 0):
        raise InvalidParameterError(f"resolved penalty {lam} is not admissible for regime {penalty.regime}")
    linear = -np.asarray(stats.unique_counts, dtype=np.float64)
    quadratic = {}
    for (i, j), c in sorted(stats.overlaps.items()):
        if c > 0:
            quadratic[(i, j)] = lam * c
    return QuboModel(stats.n, linear, quadratic, lam, penalty.regime)


def _selection(model: QuboModel, x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.shape[0] != model.n:
        raise InvalidParameterError(f"selection has length {arr.shape[0]}, expected {model.n}")
    return arr


def energy(model: QuboModel, x) -> float:
    xs = _selection(model, x)
    rows, cols, vals = model.pair_arrays
    return float(model.linear @ xs + vals @ (xs[rows] * xs[cols]))


def energies(model: QuboModel, X) -> np.ndarray:
    """Energies of each row of a 2-D array of selections."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n:
        raise InvalidParameterError(f"expected shape (k, {model.n}), got {X.shape}")
    rows, cols, vals = model.pair_arrays
    return X @ model.linear + (X[:, rows] * X[:, cols]) @ vals


def add_one_hot_groups(model: QuboModel, groups: Sequence[Sequence[int]],
                       penalty: float | None = None) -> QuboModel:
    """Penalise choosing two variables of the same group.

    Each within-group pair gets ``penalty`` added to its coupling. The default
    is ``1 + sum_i max(0, -Q_ii)``, which equals the hard penalty of the
    coverage data the model was built from.
    """
    if penalty is None:
        penalty = float(1 + np.maximum(0.0, -model.linear).sum())
    if not penalty > 0:
        raise InvalidParameterError(f"one-hot penalty must be positive, got {penalty}")
    seen: set[int] = set()
    for g in groups:
        for i in g:
            if not 0 <= i < model.n:
                raise InvalidParameterError(f"group index {i} out of range")
            if i in seen:
                raise InvalidParameterError(f"variable {i} appears in more than one group")
            seen.add(i)
    quadratic = dict(model.quadratic)
    for g in groups:
        members = sorted(g)
        for a, i in enumerate(members):
            for j in members[a + 1:]:
                quadratic[(i, j)] = quadratic.get((i, j), 0.0) + penalty
    return QuboModel(model.n, model.linear, dict(sorted(quadratic.items())), model.lambda_used, model.lambda_regime)


# ---------------------------------------------------------------------------
# coordinate file format


def qubo_to_text(model: QuboModel) -> str:
    rows, cols, vals = model.pair_arrays
    lines = [
        f"c lambda {float(model.lambda_used)!r} {model.lambda_regime}",
        f"p qubo 0 {model.n} {model.n} {len(vals)}",
    ]
    lines += [f"{i} {i} {float(q)!r}" for i, q in enumerate(model.linear)]
    lines += [f"{i} {j} {float(q)!r}" for i, j, q in zip(rows.tolist(), cols.tolist(), vals.tolist())]
    return "\n".join(lines) + "\n"


def export_qubo(model: QuboModel, path) -> None:
    Path(path).write_text(qubo_to_text(model), encoding="utf-8")


def qubo_from_text(text: str) -> QuboModel:
    header = None
    linear = None
    quadratic: dict[tuple[int, int], float] = {}
    n_diag = n_off = 0
    lam, regime = float("nan"), "custom"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "c":
            if len(parts) == 4 and parts[1] == "lambda" and parts[3] in REGIMES:
                try:
                    lam, regime = float(parts[2]), parts[3]
                except ValueError:
                    raise ParseError(f"line {lineno}: bad lambda comment") from None
            continue
        if parts[0] == "p":
            if header is not None:
                raise ParseError(f"line {lineno}: duplicate header")
            if len(parts) != 6 or parts[1] != "qubo":
                raise ParseError(f"line {lineno}: header must be 'p qubo 0 <n> <n_diag> <n_offdiag>'")
            try:
                header = tuple(int(p) for p in parts[2:])
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer header field") from None
            linear = np.zeros(header[1])
            continue
        if header is None:
            raise ParseError(f"line {lineno}: coefficient before header")
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected '<i> <j> <value>'")
        try:
            i, j, q = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"line {lineno}: cannot parse '{line}'") from None
        n = header[1]
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"line {lineno}: index out of range for n={n}")
        if not math.isfinite(q):
            raise ParseError(f"line {lineno}: non-finite coefficient")
        if i == j:
            linear[i] += q
            n_diag += 1
        elif i < j:
            if (i, j) in quadratic:
                raise ParseError(f"line {lineno}: duplicate coupling ({i}, {j})")
            quadratic[(i, j)] = q
            n_off += 1
        else:
            raise ParseError(f"line {lineno}: off-diagonal entries need i < j")
    if header is None:
        raise ParseError("line 1: missing 'p qubo' header")
    if (n_diag, n_off) != header[2:]:
        raise ParseError(f"line {lineno}: header announces {header[2:]} entries, found {(n_diag, n_off)}")
    return QuboModel(header[1], linear, dict(sorted(quadratic.items())), lam, regime)


def import_qubo(path) -> QuboModel:
    return qubo_from_text(Path(path).read_text(encoding="utf-8"))
