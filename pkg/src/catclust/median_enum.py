"""Candidate medians guaranteed to contain optimal medians of every cheap clustering.

A cluster with at most ``B`` members has its majority vector as an optimal
median, and that vector is the majority of a multiset of at most ``B``
distinct-column types.  A cluster with more than ``B`` members inside a
budget-``B`` solution can only be centred on one of its own columns.  So the
distinct columns plus the majorities of all small column multisets cover
every clustering of cost at most ``B``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

from .core import CategoricalMatrix, InitialClustering, initial_clusters
from .metric import majority_median

COLUMN = "column"
MULTISET = "multiset-majority"


@dataclass(frozen=True)
class CandidateMedianSet:
    vectors: tuple[tuple[int, ...], ...]
    provenance: tuple[str, ...]

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __contains__(self, v):
        return tuple(v) in set(self.vectors)


def _bounded_multisets(counts: list[int], size: int, cap: int):
    """Index multisets of ``size`` types, each type used at most min(count, cap) times."""
    for combo in combinations_with_replacement(range(len(counts)), size):
        ok = True
        run = 1
        for a, b in zip(combo, combo[1:]):
            run = run + 1 if a == b else 1
            if run > min(counts[b], cap):
                ok = False
                break
        if ok:
            yield combo


def candidate_medians(matrix: CategoricalMatrix, B: int, init: InitialClustering | None = None) -> CandidateMedianSet:
    if init is None:
        init = initial_clusters(matrix)
    reps = list(init.representatives)
    counts = init.sizes
    found: dict[tuple, str] = {r: COLUMN for r in reps}
    for size in range(2, max(B, 1) + 1):
        for combo in _bounded_multisets(counts, size, B):
            if len(set(combo)) == 1:
                continue  # majority of copies of one column is that column
            found.setdefault(majority_median(reps[i] for i in combo), MULTISET)
    order = sorted(found)
    return CandidateMedianSet(tuple(order), tuple(found[v] for v in order))


def big_cluster_median_check(cluster, B: int, matrix: CategoricalMatrix) -> set[tuple[int, ...]]:
    """Medians admissible for a cluster of more than ``B`` members under budget ``B``.

    Any median keeping the cluster within budget equals at least |I| - B of its
    columns.  For |I| >= 2B+1 that pins down a strict-majority column (or
    nothing); for B+1 <= |I| <= 2B every column repeated |I| - B times
    qualifies.  Smaller clusters are not constrained and give an empty set.
    """
    cols = [matrix.columns[j] for j in cluster]
    size = len(cols)
    if size < B + 1:
        return set()
    tally: dict[tuple, int] = {}
    for c in cols:
        tally[c] = tally.get(c, 0) + 1
    # for |I| >= 2B+1, |I| - B is already a strict majority
    return {c for c, cnt in tally.items() if cnt >= size - B}
