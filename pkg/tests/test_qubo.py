import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from marp.coverage import CoverageStats, compute_coverage
from marp.errors import InvalidParameterError, ParseError
from marp.qubo import (PenaltyConfig, QuboModel, add_one_hot_groups, build_qubo, energy, export_qubo,
                       import_qubo, lambda_hard, lambda_soft, qubo_from_text, qubo_to_text)

from conftest import brute_force_minimum, objective_from_sets, random_instance

DEMO = CoverageStats((2, 1), {(0, 1): 1})


@pytest.mark.parametrize("u, expected", [((2, 1), 4.0), ((0, 0, 0), 1.0), ((5, 4, 3), 13.0)])
def test_lambda_hard(u, expected):
    assert lambda_hard(CoverageStats(u, {})) == expected


def test_lambda_soft_demo():
    # s = [1, 1] -> median 1; u = [2, 1] -> median 1.5
    assert lambda_soft(DEMO) == pytest.approx(1 / 1.5, rel=1e-12)


def test_lambda_soft_disjoint():
    assert lambda_soft(CoverageStats((3, 2, 1), {})) == 0.0


def test_lambda_soft_denominator_floor():
    assert lambda_soft(CoverageStats((0, 0), {(0, 1): 2})) == 2.0


def test_lambda_soft_odd_median():
    # s = [3, 1, 2] -> 2; u = [4, 0, 6] -> 4
    stats = CoverageStats((4, 0, 6), {(0, 1): 1, (0, 2): 2})
    assert lambda_soft(stats) == pytest.approx(0.5)


def test_build_custom():
    m = build_qubo(DEMO, PenaltyConfig("custom", 0.5))
    assert list(m.linear) == [-2.0, -1.0]
    assert dict(m.quadratic) == {(0, 1): 0.5}
    assert m.lambda_used == 0.5 and m.lambda_regime == "custom"


def test_build_hard():
    m = build_qubo(DEMO, PenaltyConfig("hard"))
    assert dict(m.quadratic) == {(0, 1): 4.0}


def test_build_separable():
    m = build_qubo(CoverageStats((1, 2), {}), PenaltyConfig("hard"))
    assert dict(m.quadratic) == {}


@pytest.mark.parametrize("value", [None, 0.0, -1.0])
def test_custom_needs_positive_value(value):
    with pytest.raises(InvalidParameterError):
        PenaltyConfig("custom", value)


def test_energy_examples():
    soft = build_qubo(DEMO, PenaltyConfig("custom", 0.5))
    hard = build_qubo(DEMO, PenaltyConfig("hard"))
    assert energy(soft, [0, 0]) == 0.0
    assert energy(soft, [1, 1]) == pytest.approx(-2.5)
    assert energy(hard, [1, 1]) == pytest.approx(1.0)
    assert brute_force_minimum(soft) == (-2.5, (1, 1))
    assert brute_force_minimum(hard) == (-2.0, (1, 0))
    with pytest.raises(InvalidParameterError):
        energy(soft, [1, 1, 1])


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 100_000), lam=st.floats(0.01, 50))
def test_energy_is_negated_objective(n, seed, lam):
    inst = random_instance(n, 5, seed)
    model = build_qubo(compute_coverage(inst), PenaltyConfig("custom", lam))
    rng = np.random.default_rng(seed)
    for _ in range(5):
        x = rng.integers(0, 2, n)
        expected = -objective_from_sets(inst.route_sets, lam, x)
        assert energy(model, x) == pytest.approx(expected, rel=1e-9, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 10), seed=st.integers(0, 100_000))
def test_linear_in_lambda(n, seed):
    stats = compute_coverage(random_instance(n, 4, seed))
    a = build_qubo(stats, PenaltyConfig("custom", 1.0))
    b = build_qubo(stats, PenaltyConfig("custom", 3.5))
    assert np.array_equal(a.linear, b.linear)
    assert set(a.quadratic) == set(b.quadratic)
    for k, q in a.quadratic.items():
        assert b.quadratic[k] == pytest.approx(3.5 * q)


def test_one_hot_definition():
    m = QuboModel(2, [-1.0, -1.0], {}, 1.0, "custom")
    out = add_one_hot_groups(m, [[0, 1]], penalty=10.0)
    assert dict(out.quadratic) == {(0, 1): 10.0}
    same = add_one_hot_groups(m, [[0], [1]], penalty=10.0)
    assert dict(same.quadratic) == {} and np.array_equal(same.linear, m.linear)


def test_one_hot_default_penalty_is_hard_lambda():
    m = build_qubo(CoverageStats((2, 1, 3), {}), PenaltyConfig("soft"))
    out = add_one_hot_groups(m, [[0, 2]])
    assert out.quadratic[(0, 2)] == lambda_hard(CoverageStats((2, 1, 3), {}))


def test_one_hot_rejects_overlapping_groups():
    m = QuboModel(3, [-1.0, -1.0, -1.0], {}, 1.0, "custom")
    with pytest.raises(InvalidParameterError):
        add_one_hot_groups(m, [[0, 1], [1, 2]])


@settings(max_examples=40, deadline=None)
@given(u=st.lists(st.integers(0, 9), min_size=2, max_size=8), data=st.data())
def test_one_hot_optimum_respects_groups(u, data):
    n = len(u)
    perm = data.draw(st.permutations(range(n)))
    cut = data.draw(st.integers(1, n - 1))
    groups = [sorted(perm[:cut]), sorted(perm[cut:])]
    m = build_qubo(CoverageStats(tuple(u), {}), PenaltyConfig("custom", 1.0))
    _, bits = brute_force_minimum(add_one_hot_groups(m, groups))
    for g in groups:
        assert sum(bits[i] for i in g) <= 1


def test_export_line_count(tmp_path):
    m = build_qubo(DEMO, PenaltyConfig("custom", 0.5))
    text = qubo_to_text(m)
    coeff_lines = [l for l in text.splitlines() if l and l[0].isdigit()]
    assert len(coeff_lines) == 3
    assert "p qubo 0 2 2 1" in text


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 100_000))
def test_round_trip(tmp_path_factory, n, seed):
    stats = compute_coverage(random_instance(n, 5, seed))
    m = build_qubo(stats, PenaltyConfig("soft"))
    path = tmp_path_factory.mktemp("q") / "m.qubo"
    export_qubo(m, path)
    back = import_qubo(path)
    assert back.allclose(m, rtol=1e-12)
    assert back.lambda_used == m.lambda_used and back.lambda_regime == m.lambda_regime


@pytest.mark.parametrize("text, line", [
    ("p qubo 0 2 2 0\n0 0 -1\n2 2 -1\n", 3),
    ("p qubo 0 2 1 0\n0 0 x\n", 2),
    ("p qubo 0 2 1 1\n0 0 -1\n1 0 2\n", 3),
    ("0 0 1\n", 1),
])
def test_import_errors_carry_line_number(text, line):
    with pytest.raises(ParseError, match=f"line {line}"):
        qubo_from_text(text)


def test_import_header_count_mismatch():
    with pytest.raises(ParseError):
        qubo_from_text("p qubo 0 2 2 1\n0 0 -1\n1 1 -1\n")
