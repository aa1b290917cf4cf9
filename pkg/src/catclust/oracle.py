"""Brute-force reference solvers and the cycle-removing exchange on clusterings."""

from __future__ import annotations

import os
from itertools import combinations_with_replacement

import numpy as np

from .assignment import assign_with_medians, greedy_assign
from .core import (
    Capacitated,
    CategoricalMatrix,
    Clustering,
    InitialClustering,
    Instance,
    InstanceError,
    ResourceError,
    Unconstrained,
    check_constraint,
    initial_clusters,
    intersection_graph,
)
from .median_enum import candidate_medians
from .metric import make_clustering

PARTITION_CAP = int(os.environ.get("CATCLUST_PARTITION_CAP", "12"))
MEDIAN_CAP = int(os.environ.get("CATCLUST_MEDIAN_CAP", "2000000"))


def restricted_growth_strings(n: int, max_blocks: int):
    """Yield every set partition of range(n) into at most ``max_blocks`` blocks,
    as a list ``a`` with a[0] = 0 and a[i] <= max(a[:i]) + 1."""
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i, top):
        if i == n:
            yield a
            return
        for v in range(min(top + 2, max_blocks)):
            a[i] = v
            yield from rec(i + 1, max(top, v))

    yield from rec(1, 0)


def _column_costs(matrix: CategoricalMatrix):
    """Per-row symbol indicator so a cluster's optimal cost is size*m - sum of row maxima."""
    onehot = np.zeros((matrix.n, matrix.m, matrix.sigma), dtype=np.int64)
    rows = np.arange(matrix.m)
    for j, col in enumerate(matrix.columns):
        onehot[j, rows, list(col)] = 1
    return onehot


def brute_force_partitions(instance: Instance, cap: int | None = None) -> Clustering | None:
    """Cheapest feasible k-clustering of cost <= B by trying every partition.

    Constrained variants need exactly k nonempty clusters; Unconstrained also
    allows fewer (the missing clusters are empty).
    """
    cap = PARTITION_CAP if cap is None else cap
    n, k = instance.n, instance.k
    if n > cap:
        raise ResourceError(f"n={n} exceeds the partition cap {cap}")
    unconstrained = isinstance(instance.constraint, Unconstrained)
    onehot = _column_costs(instance.matrix)
    m = instance.m
    best = None
    for a in restricted_growth_strings(n, k):
        blocks = max(a) + 1
        if blocks != k and not unconstrained:
            continue
        sizes = [0] * blocks
        for v in a:
            sizes[v] += 1
        padded = sizes + [0] * (k - blocks)
        if not check_constraint(padded, instance.constraint, n):
            continue
        labels = np.asarray(a)
        cost = 0
        for b in range(blocks):
            counts = onehot[labels == b].sum(axis=0)  # m x sigma
            cost += sizes[b] * m - int(counts.max(axis=1).sum())
        if cost <= instance.B and (best is None or cost < best[0]):
            best = (cost, list(a))
            if cost == 0:
                break
    if best is None:
        return None
    _, a = best
    clusters = [[] for _ in range(k)]
    for j, v in enumerate(a):
        clusters[v].append(j)
    return make_clustering(instance.matrix, clusters)


def all_vectors(m: int, sigma: int):
    from itertools import product

    return [tuple(v) for v in product(range(sigma), repeat=m)]


def brute_force_medians(instance: Instance, source: str = "all", cap: int | None = None,
                        stop_at_budget: bool = False) -> Clustering | None:
    """Cheapest clustering over every k-multiset of candidate medians.

    ``source`` is ``"all"`` (every vector of the alphabet) or ``"M"`` (the
    candidate set).  Capacitated instances use the matching assignment,
    Unconstrained ones the greedy one.  With ``stop_at_budget`` the search
    returns the first clustering within budget instead of the cheapest.
    """
    cap = MEDIAN_CAP if cap is None else cap
    matrix, k = instance.matrix, instance.k
    c = instance.constraint
    if not isinstance(c, (Capacitated, Unconstrained)):
        raise InstanceError("brute_force_medians handles Capacitated or Unconstrained instances")
    if source == "all":
        if matrix.sigma ** matrix.m > cap:
            raise ResourceError(f"{matrix.sigma}**{matrix.m} candidate vectors exceed the cap {cap}")
        cands = all_vectors(matrix.m, matrix.sigma)
    elif source == "M":
        cands = list(candidate_medians(matrix, instance.B).vectors)
    else:
        raise ValueError(f"unknown candidate source {source!r}")
    if len(cands) ** k > cap:
        raise ResourceError(f"{len(cands)}**{k} median tuples exceed the cap {cap}")
    if isinstance(c, Capacitated) and (k * c.p > matrix.n or k * c.q < matrix.n):
        return None
    cand_arr = np.asarray(cands, dtype=np.int64)
    dist = (cand_arr[:, None, :] != matrix.data[None, :, :]).sum(axis=2)
    best = None
    for combo in combinations_with_replacement(range(len(cands)), k):
        # nearest-median cost is a lower bound for any size-constrained assignment
        lower = int(dist[list(combo)].min(axis=0).sum())
        if lower > instance.B or (best is not None and lower >= best[0]):
            continue
        meds = [cands[i] for i in combo]
        if isinstance(c, Capacitated):
            res = assign_with_medians(matrix, meds, c.p, c.q)
            if res is None:
                continue
            clustering, cost = res
        else:
            clustering, cost = greedy_assign(matrix, meds)
        if cost <= instance.B and (best is None or cost < best[0]):
            best = (cost, clustering)
            if stop_at_budget or cost == 0:
                break
    if best is None:
        return None
    return make_clustering(matrix, best[1].clusters)


# -- uncrossing -------------------------------------------------------------


def _find_cycle(clusters, group_of, s: int):
    """A cycle of the intersection graph as [(i1, g1), (i2, g2), ...] meaning
    I_i1 - J_g1 - I_i2 - J_g2 - ... - back to I_i1; None if the graph is a forest."""
    k = len(clusters)
    adj: list[set] = [set() for _ in range(k + s)]
    for i, c in enumerate(clusters):
        for j in c:
            adj[i].add(k + group_of[j])
            adj[k + group_of[j]].add(i)
    adj = [sorted(a) for a in adj]
    color = [0] * (k + s)
    parent = [-1] * (k + s)
    for start in range(k + s):
        if color[start]:
            continue
        stack = [(start, iter(adj[start]))]
        color[start] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[v] = 2
                stack.pop()
                continue
            if nxt == parent[v]:
                continue
            if color[nxt] == 1:
                path = [v]
                while path[-1] != nxt:
                    path.append(parent[path[-1]])
                path.reverse()  # nxt ... v, consecutive nodes adjacent, v adjacent to nxt
                if path[0] >= k:
                    path = path[1:] + path[:1]
                return [(path[a], path[a + 1] - k) for a in range(0, len(path), 2)]
            if color[nxt] == 0:
                color[nxt] = 1
                parent[nxt] = v
                stack.append((nxt, iter(adj[nxt])))
    return None


def uncross(clustering, init: InitialClustering, matrix: CategoricalMatrix) -> Clustering:
    """Remove cycles from the intersection graph without changing cluster
    sizes or increasing the cost.

    Along a cycle I_1 - J_1 - I_2 - J_2 - ... each cluster trades a member of
    one neighbouring initial cluster for a member of the other.  The trading
    direction is whichever does not increase the cost under the current
    medians; trades repeat until one cluster runs out, deleting an edge.
    """
    if isinstance(clustering, Clustering):
        clusters = clustering.clusters
    else:
        clusters = clustering
    clusters = [list(c) for c in clusters]
    group_of = init.group_of()
    reps = init.representatives
    while True:
        cycle = _find_cycle(clusters, group_of, init.s)
        if cycle is None:
            break
        current = make_clustering(matrix, clusters)
        med = current.medians
        t = len(cycle)
        # cycle[h] = (i_h, g_h): I_{i_h} meets J_{g_h} and J_{g_{h-1}}
        ids = [i for i, _ in cycle]
        gs = [g for _, g in cycle]
        prev = [gs[h - 1] for h in range(t)]

        def d(i, g):
            return sum(a != b for a, b in zip(med[i], reps[g]))

        keep_prev = sum(d(ids[h], prev[h]) for h in range(t))
        keep_next = sum(d(ids[h], gs[h]) for h in range(t))
        lhs = keep_prev + keep_next
        forward = lhs >= 2 * keep_prev  # shed J_{g_h} members, gain J_{g_{h-1}} ones
        backward = lhs >= 2 * keep_next
        assert forward or backward, "one trading direction must not increase the cost"
        if forward:
            give, take = gs, prev
        else:
            give, take = prev, gs
        # cluster ids[h] hands a member of J_{give[h]} on and receives a member of
        # J_{take[h]}; in the forward direction the member moves to ids[h+1]
        step = 1 if forward else -1
        while all(any(group_of[j] == give[h] for j in clusters[ids[h]]) for h in range(t)):
            moving = []
            for h in range(t):
                j = next(j for j in clusters[ids[h]] if group_of[j] == give[h])
                moving.append(j)
            for h in range(t):
                clusters[ids[h]].remove(moving[h])
            for h in range(t):
                clusters[ids[(h + step) % t]].append(moving[h])
    return make_clustering(matrix, clusters)


__all__ = [
    "brute_force_partitions",
    "brute_force_medians",
    "restricted_growth_strings",
    "uncross",
    "initial_clusters",
    "intersection_graph",
]
