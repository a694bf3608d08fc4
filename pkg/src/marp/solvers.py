"""Exact, simulated-annealing and greedy minimisers for :class:`QuboModel`.

All solvers break energy ties toward the lexicographically smallest
selection vector, comparing energies with a relative tolerance of 1e-9.
"""
from __future__ import annotations

import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from marp.errors import InvalidParameterError, ParseError, SizeLimitError
from marp.qubo import QuboModel, energies, energy

__all__ = [
    "Solution",
    "SaParams",
    "EXACT_MAX_N",
    "ENUMERATION_MAX_N",
    "solve_exact",
    "all_minimizers",
    "solve_sa",
    "solve_greedy",
    "default_sa_params",
    "flip_delta",
    "save_solution",
    "load_solution",
]

EXACT_MAX_N = 30
ENUMERATION_MAX_N = 20
ENERGY_RTOL = 1e-9
_CHUNK_BITS = 16


def _tol(e: float) -> float:
    return ENERGY_RTOL * max(1.0, abs(e))


@dataclass(frozen=True)
class Solution:
    x: tuple[int, ...]
    energy: float
    solver: str
    seed: int | None = None
    wall_time: float = 0.0
    n_restarts_used: int = 1

    def to_json(self, record_time: bool = True) -> str:
        doc = {
            "x": list(self.x),
            "energy": self.energy,
            "solver": self.solver,
            "seed": self.seed,
            "wall_time_s": self.wall_time if record_time else 0.0,
        }
        return json.dumps(doc, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Solution":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        for key in ("x", "energy", "solver"):
            if key not in doc:
                raise ParseError(f"missing field '{key}'")
        x = doc["x"]
        if not isinstance(x, list) or any(v not in (0, 1) or isinstance(v, bool) for v in x):
            raise ParseError("field 'x' must be a list of 0/1 integers")
        return cls(tuple(x), float(doc["energy"]), str(doc["solver"]), doc.get("seed"),
                   float(doc.get("wall_time_s", 0.0)), 1)


def save_solution(solution: Solution, path, record_time: bool = True) -> None:
    Path(path).write_text(solution.to_json(record_time), encoding="utf-8")


def load_solution(path) -> Solution:
    return Solution.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class SaParams:
    num_reads: int = 100
    sweeps: int = 1000
    beta_initial: float = 0.1
    beta_final: float = 10.0
    schedule: str = "geometric"
    seed: int = 0

    def __post_init__(self):
        if self.num_reads < 1 or self.sweeps < 1:
            raise InvalidParameterError("num_reads and sweeps must be >= 1")
        if not (0 < self.beta_initial < self.beta_final):
            raise InvalidParameterError("need 0 < beta_initial < beta_final")
        if self.schedule != "geometric":
            raise InvalidParameterError(f"unsupported schedule {self.schedule!r}")

    def betas(self) -> np.ndarray:
        if self.sweeps == 1:
            return np.array([self.beta_final])
        return np.geomspace(self.beta_initial, self.beta_final, self.sweeps)


def _coefficient_scales(model: QuboModel) -> tuple[float, float]:
    """(largest possible single-flip |dE|, smallest nonzero |coefficient|)."""
    indptr, _, data = model.adjacency
    absrow = np.zeros(model.n)
    np.add.at(absrow, np.repeat(np.arange(model.n), np.diff(indptr)), np.abs(data))
    de_max = float(np.max(np.abs(model.linear) + absrow)) if model.n else 0.0
    coeffs = np.abs(np.concatenate([model.linear, model.pair_arrays[2]]))
    coeffs = coeffs[coeffs > 0]
    de_min = float(coeffs.min()) if coeffs.size else 0.0
    return de_max, de_min


def default_sa_params(model: QuboModel, seed: int = 0, num_reads: int = 100, sweeps: int = 1000) -> SaParams:
    """Data-driven geometric schedule.

    The hottest sweep accepts the worst possible flip with probability 1/2,
    the coldest accepts the gentlest uphill flip with probability 1/100.
    """
    de_max, de_min = _coefficient_scales(model)
    if de_max <= 0:
        de_max = de_min = 1.0
    return SaParams(num_reads, sweeps, math.log(2.0) / de_max, math.log(100.0) / de_min, "geometric", seed)


# ---------------------------------------------------------------------------
# simulated annealing


@njit(cache=True, nogil=True)
def _anneal(indptr, indices, data, linear, betas, read_seeds, states, tracked):
    n = linear.shape[0]
    for r in range(read_seeds.shape[0]):
        np.random.seed(read_seeds[r])
        x = states[r]
        for i in range(n):
            x[i] = 1 if np.random.random() < 0.5 else 0
        # field[i] = Q_ii + sum_j Q_ij x_j
        field = linear.copy()
        for i in range(n):
            if x[i]:
                for k in range(indptr[i], indptr[i + 1]):
                    field[indices[k]] += data[k]
        e = 0.0
        for i in range(n):
            if x[i]:
                e += 0.5 * (linear[i] + field[i])
        for s in range(betas.shape[0]):
            beta = betas[s]
            for i in range(n):
                de = field[i] if x[i] == 0 else -field[i]
                if de > 0.0:
                    arg = beta * de
                    if arg > 50.0 or np.random.random() >= math.exp(-arg):
                        continue
                e += de
                if x[i] == 0:
                    x[i] = 1
                    step = 1.0
                else:
                    x[i] = 0
                    step = -1.0
                for k in range(indptr[i], indptr[i + 1]):
                    field[indices[k]] += step * data[k]
        tracked[r] = e


def _best_state(model: QuboModel, states: np.ndarray) -> tuple[np.ndarray, float]:
    es = energies(model, states)
    best = float(es.min())
    cand = states[es <= best + _tol(best)]
    # lexsort keys run last-to-first, so reverse the columns
    pick = cand[np.lexsort(cand.T[::-1])[0]] if cand.shape[1] else cand[0]
    return pick, energy(model, pick)


def solve_sa(model: QuboModel, params: SaParams | None = None, return_tracked: bool = False):
    """Best of ``num_reads`` single-flip Metropolis runs.

    Each read starts from a random state of density 1/2 and sweeps the
    variables in ascending index order while the inverse temperature rises
    geometrically from ``beta_initial`` to ``beta_final``.
    """
    if params is None:
        params = default_sa_params(model)
    t0 = time.perf_counter()
    n = model.n
    states = np.zeros((params.num_reads, n), dtype=np.int8)
    tracked = np.zeros(params.num_reads)
    if n:
        seeds = np.random.SeedSequence(params.seed).generate_state(params.num_reads).astype(np.int64)
        indptr, indices, data = model.adjacency
        _anneal(indptr, indices, data, np.ascontiguousarray(model.linear), params.betas(),
                seeds, states, tracked)
    x, e = _best_state(model, states)
    sol = Solution(tuple(int(v) for v in x), e, "sa", params.seed, time.perf_counter() - t0, params.num_reads)
    if return_tracked:
        return sol, states, tracked
    return sol


# ---------------------------------------------------------------------------
# greedy


def flip_delta(model: QuboModel, x, i: int) -> float:
    """Energy change from flipping bit ``i`` of ``x``, in O(degree(i))."""
    indptr, indices, data = model.adjacency
    xs = np.asarray(x)
    nb = slice(indptr[i], indptr[i + 1])
    local = model.linear[i] + float(data[nb] @ xs[indices[nb]])
    return -local if xs[i] else local


def solve_greedy(model: QuboModel) -> Solution:
    t0 = time.perf_counter()
    indptr, indices, data = model.adjacency
    x = np.zeros(model.n, dtype=np.int8)
    field = np.array(model.linear, dtype=np.float64)
    e = 0.0
    while model.n:
        gain = np.where(x == 0, field, np.inf)
        i = int(np.argmin(gain))
        if not gain[i] < 0:
            break
        x[i] = 1
        e += gain[i]
        nb = slice(indptr[i], indptr[i + 1])
        field[indices[nb]] += data[nb]
    return Solution(tuple(int(v) for v in x), energy(model, x), "greedy", None, time.perf_counter() - t0, 1)


# ---------------------------------------------------------------------------
# exact


def _enumerate(model: QuboModel):
    """Yield ``(start, energies)`` chunks over all 2**n states in lexicographic order."""
    n = model.n
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    total = 1 << n
    step = 1 << min(n, _CHUNK_BITS)
    for start in range(0, total, step):
        k = np.arange(start, min(start + step, total), dtype=np.int64)
        X = ((k[:, None] >> shifts) & 1).astype(np.float64)
        yield start, energies(model, X)


def _bits(k: int, n: int) -> np.ndarray:
    return np.array([(k >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.int8)


def _solve_enumeration(model: QuboModel) -> np.ndarray:
    chunks = list(_enumerate(model))
    best = min(float(es.min()) for _, es in chunks)
    for start, es in chunks:
        hit = np.flatnonzero(es <= best + _tol(best))
        if hit.size:
            return _bits(start + int(hit[0]), model.n)
    raise AssertionError("unreachable")


def all_minimizers(model: QuboModel) -> np.ndarray:
    """Every global minimiser (within tolerance) as rows of a 0/1 array."""
    if model.n > ENUMERATION_MAX_N:
        raise SizeLimitError(f"all_minimizers enumerates 2**n states; n={model.n} exceeds {ENUMERATION_MAX_N}")
    chunks = list(_enumerate(model))
    best = min(float(es.min()) for _, es in chunks)
    ks = np.concatenate([start + np.flatnonzero(es <= best + _tol(best)) for start, es in chunks])
    return np.array([_bits(int(k), model.n) for k in ks], dtype=np.int8).reshape(len(ks), model.n)


def _solve_branch_and_bound(model: QuboModel) -> np.ndarray:
    n = model.n
    indptr, indices, data = model.adjacency
    # couplings to later variables only; earlier ones are already folded into the field
    forward = []
    for i in range(n):
        nb = slice(indptr[i], indptr[i + 1])
        idx, val = indices[nb], data[nb]
        keep = idx > i
        forward.append((idx[keep], val[keep]))
    rows, cols, vals = model.pair_arrays
    neg_suffix = np.zeros(n + 1)
    for i, q in zip(rows, vals):
        if q < 0:
            neg_suffix[: i + 1] += q

    upper = solve_greedy(model).energy
    field = np.array(model.linear, dtype=np.float64)
    x = np.zeros(n, dtype=np.int8)
    best = {"e": None, "x": None}

    def bound(d, e_part):
        return e_part + float(np.minimum(field[d:], 0.0).sum()) + neg_suffix[d]

    def visit(d, e_part):
        if d == n:
            if best["e"] is None:
                if e_part <= upper + _tol(upper):
                    best["e"], best["x"] = e_part, x.copy()
            elif e_part < best["e"] - _tol(best["e"]):
                best["e"], best["x"] = e_part, x.copy()
            return
        lb = bound(d, e_part)
        if best["e"] is None:
            if lb > upper + _tol(upper):
                return
        elif lb >= best["e"] - _tol(best["e"]):
            return
        x[d] = 0
        visit(d + 1, e_part)
        x[d] = 1
        idx, val = forward[d]
        field[idx] += val
        visit(d + 1, e_part + field[d])
        field[idx] -= val
        x[d] = 0

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * n + 100))
    try:
        visit(0, 0.0)
    finally:
        sys.setrecursionlimit(limit)
    return best["x"]


def solve_exact(model: QuboModel, method: str = "auto") -> Solution:
    """Global minimum by enumeration (n <= 20) or depth-first branch and bound (n <= 30)."""
    if model.n > EXACT_MAX_N:
        raise SizeLimitError(
            f"exact solver handles at most {EXACT_MAX_N} variables, model has {model.n}; use the SA solver")
    if method not in ("auto", "enumerate", "branch_and_bound"):
        raise InvalidParameterError(f"unknown exact method {method!r}")
    t0 = time.perf_counter()
    if model.n == 0:
        x = np.zeros(0, dtype=np.int8)
    elif method == "enumerate" or (method == "auto" and model.n <= ENUMERATION_MAX_N):
        if model.n > ENUMERATION_MAX_N:
            raise SizeLimitError(f"enumeration handles at most {ENUMERATION_MAX_N} variables")
        x = _solve_enumeration(model)
    else:
        x = _solve_branch_and_bound(model)
    return Solution(tuple(int(v) for v in x), energy(model, x), "exact", None, time.perf_counter() - t0, 1)
