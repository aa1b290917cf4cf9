import pytest

from catclust.core import Balanced, CategoricalMatrix, Instance, InstanceError, check_constraint
from catclust.kernel import (
    Reduced,
    Resolved,
    is_large,
    kernelize_balanced,
    median_count,
    relabel_rows,
    solve_large_balanced,
)
from catclust.metric import distance_table, make_clustering
from catclust.oracle import brute_force_partitions, restricted_growth_strings
from conftest import cols_from, random_columns

X, Y = (0, 0), (1, 1)


def test_median_count_examples():
    assert median_count(5, 3, 2, 0, 1) == 2
    assert median_count(4, 3, 2, 0, 1) == 1
    assert median_count(10, 5, 2, 0, 0) == 2
    with pytest.raises(InstanceError):
        median_count(5, 2, 2, 0, 1)


def test_large_examples():
    ten = Instance(CategoricalMatrix([X] * 10), 2, 0, Balanced(0))
    w = solve_large_balanced(ten)
    assert w.sizes == [5, 5] and w.cost == 0
    seven_three = Instance(CategoricalMatrix(cols_from((X, 7), (Y, 3))), 2, 0, Balanced(0))
    assert solve_large_balanced(seven_three) is None
    assert brute_force_partitions(seven_three) is None
    with pytest.raises(InstanceError):
        solve_large_balanced(Instance(CategoricalMatrix([X] * 4), 2, 1, Balanced(0)))


def test_kernel_examples():
    ten = Instance(CategoricalMatrix([X] * 10), 2, 0, Balanced(0))
    res = kernelize_balanced(ten)
    assert isinstance(res, Resolved) and res.answer
    distinct = Instance(CategoricalMatrix([(0,), (1,), (2,), (3,)]), 2, 1, Balanced(2))
    assert kernelize_balanced(distinct) == Resolved(False)
    assert brute_force_partitions(distinct) is None


def test_relabel_preserves_distances():
    mat = CategoricalMatrix.from_rows([[5, 9, 100, 9], [0, 0, 3, 3]])
    out, maps = relabel_rows(mat)
    assert out.rows()[0].tolist() == [0, 1, 2, 1]
    assert out.sigma == 3 and maps[0] == {5: 0, 9: 1, 100: 2}
    assert (distance_table(out) == distance_table(mat)).all()


def test_reduced_output_is_equivalent():
    mat = CategoricalMatrix.from_rows([[5, 9, 100, 5, 9], [1, 1, 0, 1, 0]])
    inst = Instance(mat, 2, 3, Balanced(1))
    res = kernelize_balanced(inst)
    assert isinstance(res, Reduced)
    assert res.instance.matrix.sigma <= res.alphabet_bound == 5
    assert inst.n <= res.column_bound
    assert (brute_force_partitions(res.instance) is None) == (brute_force_partitions(inst) is None)


def test_large_dispatch_covers_the_integer_gap():
    # n/k = 2.5 < 2B+1 = 3, yet every integer size in the sweep is >= 2B+1
    assert is_large(5, 2, 1, 0) and not is_large(4, 2, 1, 0)
    inst = Instance(CategoricalMatrix(cols_from((X, 3), (Y, 2))), 2, 1, Balanced(0))
    assert isinstance(kernelize_balanced(inst), Resolved)


def test_kernel_equivalence_grid(rng):
    seen = {"resolved": 0, "reduced": 0}
    for _ in range(250):
        n, m, sigma, k, B = rng.randint(2, 9), rng.randint(1, 3), rng.randint(2, 4), rng.randint(1, 3), rng.randint(0, 3)
        inst = Instance(CategoricalMatrix(random_columns(rng, n, m, sigma, repeat=0.8), sigma), k, B,
                        Balanced(rng.randint(0, 2)))
        want = brute_force_partitions(inst) is not None
        res = kernelize_balanced(inst)
        if isinstance(res, Resolved):
            seen["resolved"] += 1
            assert res.answer == want
            if res.witness is not None:
                assert res.witness.cost <= B and check_constraint(res.witness.sizes, inst.constraint, n)
        else:
            seen["reduced"] += 1
            d = min(inst.constraint.delta, n - 1)
            assert n <= 2 * B * k + d * k * k and res.instance.matrix.sigma <= B + k
            assert (brute_force_partitions(res.instance) is not None) == want
    assert all(seen.values())


def _median_count_cases(rng):
    """Instances meeting the large-cluster precondition with n <= 12."""
    for k, B, delta in [(1, 0, 0), (2, 0, 0), (2, 1, 0), (2, 0, 1), (3, 0, 0), (2, 1, 1)]:
        for n in range(k, 13):
            for _ in range(6):
                cols = random_columns(rng, n, 2, 2, repeat=0.9)
                yield Instance(CategoricalMatrix(cols, 2), k, B, Balanced(delta))


def test_median_count_matches_enumerated_solutions(rng):
    checked = 0
    for inst in _median_count_cases(rng):
        n, k, B, delta = inst.n, inst.k, inst.B, inst.constraint.delta
        mat = inst.matrix
        for labels in restricted_growth_strings(n, k):
            if max(labels) + 1 != k:
                continue
            clusters = [[j for j in range(n) if labels[j] == i] for i in range(k)]
            sizes = [len(c) for c in clusters]
            s_lower = min(sizes)
            if max(sizes) > s_lower + delta or s_lower < 2 * B + 1 + (k - 1) * delta:
                continue
            sol = make_clustering(mat, clusters)
            if sol.cost > B:
                continue
            for col in set(mat.columns):
                size = mat.columns.count(col)
                assert sum(1 for med in sol.medians if med == col) == median_count(size, s_lower, k, delta, B)
                checked += 1
    assert checked > 100
