"""Hamming distance, majority medians and clustering cost."""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

import numpy as np

from .core import CategoricalMatrix, Clustering, InstanceError, validate_partition


def hamming_distance(a: Sequence[int], b: Sequence[int]) -> int:
    if len(a) != len(b):
        raise InstanceError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(1 for x, y in zip(a, b) if x != y)


def majority_median(columns: Iterable[Sequence[int]]) -> tuple[int, ...]:
    """Coordinate-wise most frequent symbol, ties to the smallest symbol."""
    columns = [tuple(c) for c in columns]
    if not columns:
        raise InstanceError("majority of an empty multiset")
    m = len(columns[0])
    if any(len(c) != m for c in columns):
        raise InstanceError("columns of unequal length")
    out = []
    for i in range(m):
        counts = Counter(c[i] for c in columns)
        out.append(min(counts, key=lambda sym: (-counts[sym], sym)))
    return tuple(out)


def cluster_cost(median: Sequence[int], columns: Iterable[Sequence[int]]) -> int:
    return sum(hamming_distance(median, c) for c in columns)


def clustering_cost(matrix: CategoricalMatrix, clusters) -> tuple[int, list[tuple[int, ...]]]:
    """Optimal cost of a fixed partition and its majority medians.

    Empty clusters get no median (``None``) and contribute nothing.
    """
    validate_partition(clusters, matrix.n)
    cols = matrix.columns
    total = 0
    medians = []
    for c in clusters:
        if not c:
            medians.append(None)
            continue
        med = majority_median(cols[j] for j in c)
        total += cluster_cost(med, (cols[j] for j in c))
        medians.append(med)
    return total, medians


def make_clustering(matrix: CategoricalMatrix, clusters) -> Clustering:
    clusters = tuple(tuple(sorted(c)) for c in clusters)
    cost, medians = clustering_cost(matrix, clusters)
    return Clustering(clusters, tuple(medians), cost)


def distance_table(matrix: CategoricalMatrix) -> np.ndarray:
    """n x n pairwise column distances."""
    d = matrix.data
    return (d[:, None, :] != d[None, :, :]).sum(axis=2)


def distances_to(matrix: CategoricalMatrix, vectors) -> np.ndarray:
    """len(vectors) x n table of distances from each vector to each column."""
    v = np.asarray(vectors, dtype=np.int64).reshape(-1, matrix.m)
    return (v[:, None, :] != matrix.data[None, :, :]).sum(axis=2)
