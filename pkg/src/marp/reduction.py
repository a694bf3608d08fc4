"""Weighted set packing as a special case of vehicle selection.

Rewards are the set weights, overlaps the pairwise intersection sizes, and
the penalty exceeds the total weight, so every optimum of the resulting QUBO
is a family of pairwise disjoint sets with maximum weight.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from marp.coverage import CoverageStats
from marp.errors import InvalidParameterError, ParseError, SizeLimitError
from marp.qubo import PenaltyConfig, build_qubo
from marp.solvers import ENUMERATION_MAX_N, solve_exact

__all__ = [
    "WspInstance",
    "WSP_MAX_M",
    "reduce_wsp_to_marp",
    "solve_wsp_via_marp",
    "wsp_brute_force",
    "load_wsp",
]

WSP_MAX_M = ENUMERATION_MAX_N


@dataclass(frozen=True)
class WspInstance:
    universe_size: int
    sets: tuple[frozenset, ...]
    weights: tuple

    def __post_init__(self):
        if len(self.sets) != len(self.weights):
            raise InvalidParameterError("sets and weights must have equal length")
        for k, s in enumerate(self.sets):
            for e in s:
                if not 0 <= e < self.universe_size:
                    raise InvalidParameterError(f"sets[{k}] element {e} outside [0, {self.universe_size})")
        for k, w in enumerate(self.weights):
            if w < 0:
                raise InvalidParameterError(f"weights[{k}] is negative")

    @classmethod
    def from_lists(cls, universe_size, sets, weights) -> "WspInstance":
        return cls(int(universe_size), tuple(frozenset(s) for s in sets), tuple(weights))

    @property
    def m(self) -> int:
        return len(self.sets)


def load_wsp(path) -> WspInstance:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    for key in ("universe_size", "sets", "weights"):
        if key not in doc:
            raise ParseError(f"missing field '{key}'")
    try:
        return WspInstance.from_lists(doc["universe_size"], doc["sets"], doc["weights"])
    except (TypeError, InvalidParameterError) as exc:
        raise ParseError(str(exc)) from exc


def reduce_wsp_to_marp(wsp: WspInstance) -> tuple[CoverageStats, float]:
    """Return coverage data ``(u = w, c_ij = |S_i & S_j|)`` and the penalty ``1 + sum(w)``."""
    overlaps = {}
    for i in range(wsp.m):
        for j in range(i + 1, wsp.m):
            c = len(wsp.sets[i] & wsp.sets[j])
            if c:
                overlaps[(i, j)] = c
    lam = 1 + sum(wsp.weights)
    return CoverageStats(tuple(wsp.weights), overlaps, {}), lam


def solve_wsp_via_marp(wsp: WspInstance) -> tuple[frozenset, float]:
    if wsp.m > WSP_MAX_M:
        raise SizeLimitError(f"exact WSP route handles at most {WSP_MAX_M} sets, got {wsp.m}")
    stats, lam = reduce_wsp_to_marp(wsp)
    model = build_qubo(stats, PenaltyConfig("custom", lam))
    sol = solve_exact(model)
    selected = frozenset(i for i, v in enumerate(sol.x) if v)
    return selected, -sol.energy


def wsp_brute_force(wsp: WspInstance) -> tuple[frozenset, float]:
    """Best pairwise-disjoint subfamily by checking all 2**m subsets.

    Subsets are visited in lexicographic order of their indicator vector,
    and only strict improvements replace the incumbent.
    """
    m = wsp.m
    if m > WSP_MAX_M:
        raise SizeLimitError(f"brute force handles at most {WSP_MAX_M} sets, got {m}")
    masks = [sum(1 << e for e in s) for s in wsp.sets]
    best_k, best_w = 0, 0
    for k in range(1 << m):
        used = 0
        weight = 0
        ok = True
        for i in range(m):
            if (k >> (m - 1 - i)) & 1:
                if used & masks[i]:
                    ok = False
                    break
                used |= masks[i]
                weight += wsp.weights[i]
        if ok and weight > best_w:
            best_k, best_w = k, weight
    selected = frozenset(i for i in range(m) if (best_k >> (m - 1 - i)) & 1)
    return selected, best_w
