import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catclust.core import (
    Balanced,
    Capacitated,
    CategoricalMatrix,
    Equal,
    FactorBalanced,
    Instance,
    InstanceError,
    Unconstrained,
    check_constraint,
    initial_clusters,
    intersection_graph,
    validate_partition,
)
from conftest import matrices


def test_initial_clusters_groups_identical_columns():
    init = initial_clusters(CategoricalMatrix([(0, 0), (0, 0), (1, 1)]))
    assert init.groups == ((0, 1), (2,))
    assert init.s == 2
    assert init.representatives == ((0, 0), (1, 1))


def test_initial_clusters_extremes():
    same = CategoricalMatrix([(1, 2)] * 5, 3)
    assert initial_clusters(same).groups == ((0, 1, 2, 3, 4),)
    distinct = CategoricalMatrix([(0,), (1,), (2,)])
    assert initial_clusters(distinct).sizes == [1, 1, 1]


@given(matrices(), st.randoms())
@settings(max_examples=60)
def test_initial_clusters_permutation_invariant(mat, r):
    perm = list(range(mat.n))
    r.shuffle(perm)
    shuffled = CategoricalMatrix([mat.columns[j] for j in perm], mat.sigma)
    a = initial_clusters(mat)
    b = initial_clusters(shuffled)
    as_sets = lambda init, relabel: sorted(sorted(relabel[j] for j in g) for g in init.groups)  # noqa: E731
    assert as_sets(a, list(range(mat.n))) == as_sets(b, perm)


def test_matrix_validation():
    with pytest.raises(InstanceError):
        CategoricalMatrix([(0, 3)], sigma=3)
    with pytest.raises(InstanceError):
        CategoricalMatrix([(-1,)])
    with pytest.raises(InstanceError):
        CategoricalMatrix([])
    m = CategoricalMatrix.from_rows([[0, 1, 2], [1, 1, 1]])
    assert m.m == 2 and m.n == 3 and m.columns[2] == (2, 1)


def test_intersection_graph_examples():
    J = initial_clusters(CategoricalMatrix([(0,), (0,), (1,), (1,)]))
    g = intersection_graph([[0, 1], [2, 3]], J)
    assert len(g.edges) == 2 and g.is_forest()
    cyc = intersection_graph([[0, 2], [1, 3]], J)
    assert len(cyc.edges) == 4 and not cyc.is_forest()
    star = intersection_graph([[0, 1, 2]], initial_clusters(CategoricalMatrix([(0,), (1,), (2,)])))
    assert len(star.edges) == 3 and star.degree_left(0) == 3 and star.is_forest()


@given(matrices(), st.randoms())
@settings(max_examples=60)
def test_intersection_graph_degrees(mat, r):
    k = r.randint(1, 3)
    labels = [r.randrange(k) for _ in range(mat.n)]
    clusters = [[j for j in range(mat.n) if labels[j] == i] for i in range(k)]
    init = initial_clusters(mat)
    g = intersection_graph(clusters, init)
    expected = {(i, gi) for i, c in enumerate(clusters) for gi, grp in enumerate(init.groups) if set(c) & set(grp)}
    assert g.edges == expected
    assert all(g.degree_right(j) >= 1 for j in range(init.s))
    assert all(g.degree_left(i) >= 1 for i, c in enumerate(clusters) if c)


def test_check_constraint_examples():
    assert check_constraint([2, 2], Capacitated(2, 2))
    assert not check_constraint([1, 3], Balanced(1))
    assert check_constraint([2, 3], FactorBalanced(Fraction(3, 2)))
    assert not check_constraint([2, 4], FactorBalanced(Fraction(3, 2)))
    assert check_constraint([2, 2, 2], Equal())
    assert not check_constraint([2, 1, 1], Equal(), 4)
    assert not check_constraint([0, 4], Balanced(4))  # constrained variants need nonempty clusters


@given(st.lists(st.integers(0, 9), min_size=1, max_size=6))
def test_unconstrained_always_true(sizes):
    assert check_constraint(sizes, Unconstrained())


def test_constraint_validation():
    with pytest.raises(InstanceError):
        Capacitated(3, 2)
    with pytest.raises(InstanceError):
        Capacitated(0, 2)
    with pytest.raises(InstanceError):
        Balanced(-1)
    with pytest.raises(InstanceError):
        FactorBalanced(Fraction(1, 2))
    assert FactorBalanced("3/2").alpha == Fraction(3, 2)
    with pytest.raises(InstanceError):
        Instance(CategoricalMatrix([(0,)]), 0, 0)


def test_validate_partition_rejects_bad_input():
    with pytest.raises(InstanceError):
        validate_partition([[0, 1], [1]], 2)
    with pytest.raises(InstanceError):
        validate_partition([[0]], 2)
    with pytest.raises(InstanceError):
        validate_partition([[0, 1], []], 2, allow_empty=False)
    validate_partition([[1], [0], []], 2)


def test_equal_with_indivisible_n_is_infeasible():
    rng = random.Random(1)
    for _ in range(20):
        sizes = [rng.randint(1, 4) for _ in range(3)]
        if sum(sizes) % 3:
            assert not check_constraint(sizes, Equal())
