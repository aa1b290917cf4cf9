"""Size-constrained assignment of columns to fixed medians via perfect matching."""

from __future__ import annotations

from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import CategoricalMatrix, Clustering, InstanceError
from .metric import distances_to


def min_weight_perfect_matching(weights, forbidden=None):
    """Minimum-weight perfect matching on a square bipartite weight matrix.

    ``forbidden`` is an optional boolean mask of pairs that may not be
    matched.  Returns ``(matching, weight)`` where ``matching[i]`` is the
    column matched to row ``i``, or ``None`` if no perfect matching avoids
    the forbidden pairs.
    """
    w = np.asarray(weights, dtype=np.int64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InstanceError(f"weight matrix must be square, got shape {w.shape}")
    size = w.shape[0]
    if size == 0:
        return [], 0
    if forbidden is None:
        forbidden = np.zeros(w.shape, dtype=bool)
    else:
        forbidden = np.asarray(forbidden, dtype=bool)
    allowed = w[~forbidden]
    # any feasible matching weighs less than this
    sentinel = int(allowed.clip(min=0).sum()) + 1 if allowed.size else 1
    cost = np.where(forbidden, sentinel, w)
    rows, cols = linear_sum_assignment(cost)
    if forbidden[rows, cols].any():
        return None
    matching = [0] * size
    for r, c in zip(rows, cols):
        matching[r] = int(c)
    return matching, int(w[rows, cols].sum())


def brute_force_matching(weights, forbidden=None):
    """Exhaustive reference for :func:`min_weight_perfect_matching`."""
    w = np.asarray(weights, dtype=np.int64)
    size = w.shape[0]
    if forbidden is None:
        forbidden = np.zeros(w.shape, dtype=bool)
    best = None
    for perm in permutations(range(size)):
        if any(forbidden[i, perm[i]] for i in range(size)):
            continue
        total = int(sum(w[i, perm[i]] for i in range(size)))
        if best is None or total < best[1]:
            best = (list(perm), total)
    return best


def assign_with_medians(matrix: CategoricalMatrix, medians, p: int, q: int):
    """Best partition with p <= |I_i| <= q, scored against the given medians.

    Columns become one side of a bipartite graph; each median owns ``q``
    slots, the first ``p`` of which must be filled by real columns.  The
    ``k*q - n`` filler items can only take the optional slots, at zero cost.
    Returns ``(clustering, cost)`` or ``None`` when k*p > n or k*q < n.
    The clustering's ``medians`` are the given ones and ``cost`` is measured
    against them (not re-optimised).
    """
    medians = [tuple(int(v) for v in c) for c in medians]
    if any(len(c) != matrix.m for c in medians):
        raise InstanceError("median length differs from the number of rows")
    k, n = len(medians), matrix.n
    if k == 0 or k * p > n or k * q < n:
        return None
    dist = distances_to(matrix, medians)  # k x n
    fillers = k * q - n
    size = k * q
    # rows: n columns then fillers; slot h of median i sits at column i*q + h
    weights = np.zeros((size, size), dtype=np.int64)
    weights[:n] = np.repeat(dist.T, q, axis=1)
    forbidden = np.zeros((size, size), dtype=bool)
    if fillers:
        must_fill = np.tile(np.arange(q) < p, k)
        forbidden[n:, must_fill] = True
    result = min_weight_perfect_matching(weights, forbidden)
    if result is None:  # pragma: no cover - the size checks above rule this out
        return None
    matching, total = result
    clusters = [[] for _ in range(k)]
    for j in range(n):
        clusters[matching[j] // q].append(j)
    clustering = Clustering(tuple(tuple(c) for c in clusters), tuple(medians), total)
    return clustering, total


def greedy_assign(matrix: CategoricalMatrix, medians):
    """Unconstrained assignment: each column to its nearest median (lowest index on ties)."""
    medians = [tuple(int(v) for v in c) for c in medians]
    dist = distances_to(matrix, medians)
    best = dist.argmin(axis=0)
    clusters = [[] for _ in medians]
    for j, i in enumerate(best):
        clusters[int(i)].append(j)
    total = int(dist.min(axis=0).sum())
    return Clustering(tuple(tuple(c) for c in clusters), tuple(medians), total), total
