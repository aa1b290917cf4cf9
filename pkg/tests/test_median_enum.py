import itertools
import random

from catclust.core import CategoricalMatrix
from catclust.median_enum import big_cluster_median_check, candidate_medians
from catclust.metric import clustering_cost, hamming_distance
from catclust.oracle import restricted_growth_strings
from conftest import cols_from, random_columns

X, Y = (0, 0), (1, 1)


def test_candidates_small_examples():
    mat = CategoricalMatrix([X, Y])
    assert set(candidate_medians(mat, 1)) == {X, Y}
    assert set(candidate_medians(mat, 2)) >= {X, Y}
    assert set(candidate_medians(mat, 2)) == {X, Y}  # the pair majority is (0,0) again
    mat = CategoricalMatrix(random_columns(random.Random(3), 6, 3, 3), 3)
    zero = candidate_medians(mat, 0)
    assert set(zero) == set(mat.columns)
    assert all(tag == "column" for tag in zero.provenance)


def test_candidates_are_deduplicated_and_contain_columns(rng):
    for _ in range(20):
        mat = CategoricalMatrix(random_columns(rng, 7, 3, 3), 3)
        M = candidate_medians(mat, 3)
        assert len(set(M.vectors)) == len(M.vectors)
        assert set(mat.columns) <= set(M.vectors)


def test_candidates_monotone_and_close(rng):
    for _ in range(20):
        mat = CategoricalMatrix(random_columns(rng, 7, 3, 3), 3)
        for B in range(4):
            small, big = set(candidate_medians(mat, B)), set(candidate_medians(mat, B + 1))
            assert small <= big
            for v in small:
                assert min(hamming_distance(v, c) for c in mat.columns) <= B


def test_coverage_contract(rng):
    """Every cheap clustering's majority medians lie in the candidate set."""
    for _ in range(40):
        n, m, sigma = rng.randint(2, 8), rng.randint(1, 4), rng.randint(2, 3)
        mat = CategoricalMatrix(random_columns(rng, n, m, sigma), sigma)
        B = rng.randint(0, 4)
        M = set(candidate_medians(mat, B))
        for labels in restricted_growth_strings(n, 3):
            k = max(labels) + 1
            clusters = [[j for j in range(n) if labels[j] == i] for i in range(k)]
            cost, meds = clustering_cost(mat, clusters)
            if cost <= B:
                assert set(meds) <= M, (mat.columns, B, clusters)


def test_big_cluster_examples():
    x, y = (0, 1), (1, 0)
    five_x = CategoricalMatrix([x] * 5)
    assert big_cluster_median_check(range(5), 1, five_x) == {x}
    mixed = CategoricalMatrix(cols_from((x, 3), (y, 2)))
    assert big_cluster_median_check(range(5), 2, mixed) == {x}
    assert big_cluster_median_check(range(2), 0, CategoricalMatrix([x, y])) == set()


def test_big_cluster_forced_medians_are_the_only_cheap_ones(rng):
    for _ in range(50):
        mat = CategoricalMatrix(random_columns(rng, 7, 2, 2, repeat=0.8), 2)
        B = rng.randint(0, 3)
        cluster = list(range(mat.n))
        if len(cluster) < B + 1:
            continue
        forced = big_cluster_median_check(cluster, B, mat)
        cheap = {v for v in itertools.product(range(2), repeat=2)
                 if sum(hamming_distance(v, mat.columns[j]) for j in cluster) <= B}
        assert cheap <= forced
        if len(cluster) >= 2 * B + 1:
            assert len(forced) <= 1
