import pytest
from hypothesis import given, settings, strategies as st

from marp.coverage import compute_coverage, coverage_of_selection, write_coverage_csv
from marp.errors import InvalidParameterError

from conftest import instance_from_routes, naive_coverage, random_instance


def test_demo(demo_instance):
    stats = compute_coverage(demo_instance)
    assert stats.unique_counts == (2, 1)
    assert dict(stats.overlaps) == {(0, 1): 1}
    assert stats.node_usage == {0: 1, 1: 1, 2: 2, 3: 1}


def test_identical_routes():
    stats = compute_coverage(instance_from_routes([[0, 1], [0, 1]]))
    assert stats.unique_counts == (0, 0)
    assert dict(stats.overlaps) == {(0, 1): 2}


def test_disjoint_routes():
    stats = compute_coverage(instance_from_routes([[0], [1]]))
    assert stats.unique_counts == (1, 1)
    assert dict(stats.overlaps) == {}


def test_three_way_overlap_counts_each_pair():
    stats = compute_coverage(instance_from_routes([[0, 1], [1, 2], [1]]))
    assert dict(stats.overlaps) == {(0, 1): 1, (0, 2): 1, (1, 2): 1}


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 8), side=st.integers(2, 4), seed=st.integers(0, 100_000))
def test_matches_naive_oracle(n, side, seed):
    inst = random_instance(n, side, seed)
    stats = compute_coverage(inst)
    u, c = naive_coverage(inst.route_sets)
    assert list(stats.unique_counts) == u
    assert dict(stats.overlaps) == c


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 15), seed=st.integers(0, 100_000))
def test_invariants(n, seed):
    inst = random_instance(n, 5, seed)
    stats = compute_coverage(inst)
    sets = inst.route_sets
    assert sum(stats.node_usage.values()) == sum(len(s) for s in sets)
    assert sum(stats.unique_counts) <= len(frozenset().union(*sets))
    for (i, j), c in stats.overlaps.items():
        assert i < j and 0 < c <= min(len(sets[i]), len(sets[j]))
    s = stats.overlap_sums()
    for i in range(n):
        assert (stats.unique_counts[i] == len(sets[i])) == (s[i] == 0)


def test_coverage_of_selection(demo_instance):
    stats = compute_coverage(demo_instance)
    assert coverage_of_selection(demo_instance, stats, [0, 0]) == (0, 0)
    assert coverage_of_selection(demo_instance, stats, [1, 1]) == (4, 1)
    assert coverage_of_selection(demo_instance, stats, [1, 0]) == (3, 0)
    assert coverage_of_selection(demo_instance, stats, [0, 1]) == (2, 0)
    with pytest.raises(InvalidParameterError):
        coverage_of_selection(demo_instance, stats, [1])


def test_csv_dump(demo_instance, tmp_path):
    path = tmp_path / "cov.csv"
    write_coverage_csv(compute_coverage(demo_instance), path)
    assert path.read_text() == "0,2\n1,1\n0,1,1\n"
