import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catclust.assignment import (
    assign_with_medians,
    brute_force_matching,
    greedy_assign,
    min_weight_perfect_matching,
)
from catclust.core import CategoricalMatrix, InstanceError
from catclust.metric import cluster_cost
from conftest import cols_from, random_columns


def test_matching_examples():
    assert min_weight_perfect_matching([[0, 5], [5, 0]])[1] == 0
    forb = np.array([[False, True], [True, False]])
    assert min_weight_perfect_matching([[1, 9], [9, 2]], forb)[1] == 3
    assert min_weight_perfect_matching(np.zeros((0, 0)))[1] == 0
    with pytest.raises(InstanceError):
        min_weight_perfect_matching([[1, 2, 3]])


def test_matching_reports_infeasible():
    forb = np.array([[True, True], [False, False]])
    assert min_weight_perfect_matching([[0, 0], [0, 0]], forb) is None


def test_matching_matches_permutations(rng):
    for _ in range(40):
        w = np.array([[rng.randint(0, 9) for _ in range(6)] for _ in range(6)])
        forb = np.array([[rng.random() < 0.2 for _ in range(6)] for _ in range(6)])
        got = min_weight_perfect_matching(w, forb)
        want = brute_force_matching(w, forb)
        if want is None:
            assert got is None
        else:
            assert got[1] == want[1]
            assert not any(forb[i, got[0][i]] for i in range(6))


PAIRS = CategoricalMatrix(cols_from(((0, 0), 2), ((1, 1), 2)))


def test_assign_examples():
    clustering, cost = assign_with_medians(PAIRS, [(0, 0), (1, 1)], 2, 2)
    assert cost == 0 and sorted(clustering.clusters) == [(0, 1), (2, 3)]
    assert assign_with_medians(PAIRS, [(0, 0), (0, 0)], 2, 2)[1] == 4
    assert assign_with_medians(PAIRS, [(0, 0), (1, 1)], 3, 3) is None
    with pytest.raises(InstanceError):
        assign_with_medians(PAIRS, [(0, 0, 0)], 1, 4)


def exhaustive_assignment(matrix, medians, p, q):
    n, k = matrix.n, len(medians)
    best = None
    for labels in itertools.product(range(k), repeat=n):
        sizes = [labels.count(i) for i in range(k)]
        if all(p <= s <= q for s in sizes):
            cost = sum(cluster_cost(medians[labels[j]], [matrix.columns[j]]) for j in range(n))
            best = cost if best is None else min(best, cost)
    return best


def test_assign_is_optimal_for_given_medians(rng):
    for _ in range(60):
        n, m, sigma, k = rng.randint(2, 7), rng.randint(1, 3), rng.randint(2, 3), rng.randint(1, 3)
        mat = CategoricalMatrix(random_columns(rng, n, m, sigma), sigma)
        meds = [tuple(rng.randrange(sigma) for _ in range(m)) for _ in range(k)]
        p = rng.randint(1, max(1, n // k))
        q = rng.randint(p, n)
        res = assign_with_medians(mat, meds, p, q)
        want = exhaustive_assignment(mat, meds, p, q)
        if want is None:
            assert res is None
            continue
        clustering, cost = res
        assert cost == want
        assert all(p <= s <= q for s in clustering.sizes)
        # the matching weight is the clustering cost under the given medians
        assert cost == sum(cluster_cost(meds[i], [mat.columns[j] for j in c]) for i, c in enumerate(clustering.clusters))


@given(st.randoms())
@settings(max_examples=30)
def test_assign_invariant_under_median_order(r):
    mat = CategoricalMatrix(random_columns(r, 6, 2, 3), 3)
    meds = [tuple(r.randrange(3) for _ in range(2)) for _ in range(3)]
    base = assign_with_medians(mat, meds, 1, 4)
    r.shuffle(meds)
    assert assign_with_medians(mat, meds, 1, 4)[1] == base[1]


def test_greedy_assign(rng):
    assert greedy_assign(PAIRS, [(0, 0), (1, 1)])[1] == 0
    single = greedy_assign(PAIRS, [(0, 1)])[0]
    assert single.clusters == ((0, 1, 2, 3),)
    for _ in range(30):
        mat = CategoricalMatrix(random_columns(rng, 6, 2, 3), 3)
        meds = [tuple(rng.randrange(3) for _ in range(2)) for _ in range(2)]
        g = greedy_assign(mat, meds)[1]
        for p in range(1, 4):
            for q in range(p, 7):
                res = assign_with_medians(mat, meds, p, q)
                if res is not None:
                    assert g <= res[1]
