"""Preprocessing for balanced clustering.

When clusters are forced to be large (every cluster has at least 2B+1+(k-1)δ
members), each optimal median is a strict-majority column of its cluster, and
how many clusters are centred on a given column is fixed by the size of its
group of identical columns.  That pins down the whole median multiset, so a
single matching per candidate size decides the instance.

Otherwise n is small in terms of B, k and δ, an instance with more than B+k
distinct columns is hopeless, and symbols can be renamed row by row into
{0, ..., B+k-1} without changing any Hamming distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .assignment import assign_with_medians
from .core import (
    Balanced,
    CategoricalMatrix,
    Clustering,
    Instance,
    InstanceError,
    check_constraint,
    initial_clusters,
)
from .metric import make_clustering


def median_count(group_size: int, s_lower: int, k: int, delta: int, B: int) -> int:
    """Number of clusters centred on a group's column when every cluster size
    lies in [s_lower, s_lower + delta] and the cost is at most B."""
    if s_lower < 2 * B + 1 + (k - 1) * delta:
        raise InstanceError(
            f"cluster size bound {s_lower} is below 2B+1+(k-1)δ = {2 * B + 1 + (k - 1) * delta}")
    q, r = divmod(group_size, s_lower)
    if r >= B + 1 + (k - 1) * delta:
        return q + 1
    return q


def _size_sweep(n: int, k: int, delta: int):
    """Integer s with n/k - δ <= s <= n/k (and s >= 1)."""
    return range(max(1, -(-(n - k * delta) // k)), n // k + 1)


def is_large(n: int, k: int, B: int, delta: int) -> bool:
    """Whether every size in the sweep meets the median_count precondition.

    Integer s >= n/k - δ > 2B + (k-1)δ forces s >= 2B + 1 + (k-1)δ, so
    n > 2Bk + δk² is enough.
    """
    return n > 2 * B * k + delta * k * k


def solve_large_balanced(instance: Instance) -> Clustering | None:
    c = instance.constraint
    if not isinstance(c, Balanced):
        raise InstanceError("solve_large_balanced expects a Balanced constraint")
    n, k, B = instance.n, instance.k, instance.B
    delta = min(c.delta, n - 1)
    if not is_large(n, k, B, delta):
        raise InstanceError(f"n={n} is not above 2Bk+δk² = {2 * B * k + delta * k * k}")
    init = initial_clusters(instance.matrix)
    for s_lower in _size_sweep(n, k, delta):
        medians = []
        for rep, size in zip(init.representatives, init.sizes):
            medians.extend([rep] * median_count(size, s_lower, k, delta, B))
        if len(medians) != k:
            continue
        res = assign_with_medians(instance.matrix, medians, s_lower, min(n, s_lower + delta))
        if res is None:
            continue
        clustering, cost = res
        if cost <= B:
            witness = make_clustering(instance.matrix, clustering.clusters)
            assert witness.cost <= cost and check_constraint(witness.sizes, c, n)
            return witness
    return None


@dataclass(frozen=True)
class Resolved:
    answer: bool
    witness: Clustering | None = None


@dataclass(frozen=True)
class Reduced:
    instance: Instance
    column_bound: int
    alphabet_bound: int
    relabel: tuple[dict, ...] = field(default=(), compare=False)


KernelResult = Resolved | Reduced


def relabel_rows(matrix: CategoricalMatrix) -> tuple[CategoricalMatrix, tuple[dict, ...]]:
    """Rename symbols row by row in order of first appearance.

    Two entries of a row stay equal exactly when they were equal, so every
    Hamming distance between columns is preserved.
    """
    maps = []
    rows = []
    for row in matrix.rows():
        mapping: dict[int, int] = {}
        rows.append([mapping.setdefault(int(v), len(mapping)) for v in row])
        maps.append(mapping)
    sigma = max(len(mp) for mp in maps)
    return CategoricalMatrix.from_rows(rows, sigma), tuple(maps)


def kernelize_balanced(instance: Instance) -> KernelResult:
    c = instance.constraint
    if not isinstance(c, Balanced):
        raise InstanceError("kernelize_balanced expects a Balanced constraint")
    n, k, B = instance.n, instance.k, instance.B
    delta = min(c.delta, n - 1)
    if is_large(n, k, B, delta):
        witness = solve_large_balanced(instance)
        return Resolved(witness is not None, witness)
    init = initial_clusters(instance.matrix)
    if init.s >= B + k + 1:
        # each median matches at most one distinct column; B+1 others cost >= 1 each
        return Resolved(False)
    matrix, maps = relabel_rows(instance.matrix)
    reduced = Instance(matrix, k, B, c)
    bound = 2 * B * k + delta * k * k
    assert n <= bound and matrix.sigma <= B + k
    return Reduced(reduced, bound, B + k, maps)


__all__ = [
    "median_count",
    "is_large",
    "solve_large_balanced",
    "relabel_rows",
    "kernelize_balanced",
    "Resolved",
    "Reduced",
    "KernelResult",
]
