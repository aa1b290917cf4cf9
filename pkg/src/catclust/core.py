"""Domain types shared by every solver: matrices, size constraints, clusterings."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np


class InstanceError(ValueError):
    """Raised for malformed input: bad shapes, symbols outside the alphabet, etc."""


class ResourceError(RuntimeError):
    """Raised when an enumeration would exceed a configured cap."""


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise InstanceError("alphabet size must be >= 1")


class CategoricalMatrix:
    """An m x n matrix over {0..sigma-1}, stored column-major.

    ``columns[j]`` is the j-th column as a tuple of m symbols; the numpy
    array ``data`` has shape (n, m) so that ``data[j]`` is also column j.
    """

    __slots__ = ("data", "columns", "sigma")

    def __init__(self, columns, sigma: int | None = None):
        data = np.asarray(columns, dtype=np.int64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise InstanceError("matrix needs at least one row and one column")
        if (data < 0).any():
            raise InstanceError("symbols must be nonnegative")
        top = int(data.max()) + 1
        if sigma is None:
            sigma = top
        elif top > sigma:
            raise InstanceError(f"symbol {top - 1} outside alphabet of size {sigma}")
        data.setflags(write=False)
        self.data = data
        self.columns = tuple(tuple(int(v) for v in col) for col in data)
        self.sigma = int(sigma)

    @classmethod
    def from_rows(cls, rows, sigma: int | None = None) -> "CategoricalMatrix":
        return cls(np.asarray(rows, dtype=np.int64).T, sigma)

    @property
    def m(self) -> int:
        return self.data.shape[1]

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.sigma)

    def rows(self) -> np.ndarray:
        return self.data.T

    def __eq__(self, other):
        return (
            isinstance(other, CategoricalMatrix)
            and self.sigma == other.sigma
            and self.columns == other.columns
        )

    def __hash__(self):
        return hash((self.sigma, self.columns))

    def __repr__(self):
        return f"CategoricalMatrix(m={self.m}, n={self.n}, sigma={self.sigma})"


# -- size constraints -------------------------------------------------------


@dataclass(frozen=True)
class Unconstrained:
    pass


@dataclass(frozen=True)
class Capacitated:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise InstanceError("p and q must be positive")
        if self.p > self.q:
            raise InstanceError(f"p={self.p} exceeds q={self.q}")


@dataclass(frozen=True)
class Balanced:
    delta: int

    def __post_init__(self):
        if self.delta < 0:
            raise InstanceError("delta must be nonnegative")


@dataclass(frozen=True)
class FactorBalanced:
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if self.alpha < 1:
            raise InstanceError("alpha must be >= 1")


@dataclass(frozen=True)
class Equal:
    pass


SizeConstraint = Union[Unconstrained, Capacitated, Balanced, FactorBalanced, Equal]


def check_constraint(sizes: Sequence[int], constraint: SizeConstraint, n: int | None = None) -> bool:
    """True iff the cluster sizes satisfy ``constraint``.

    Constrained variants require every cluster to be nonempty.
    """
    sizes = list(sizes)
    if n is None:
        n = sum(sizes)
    if isinstance(constraint, Unconstrained):
        return True
    if not sizes or min(sizes) < 1:
        return False
    if isinstance(constraint, Capacitated):
        return all(constraint.p <= s <= constraint.q for s in sizes)
    if isinstance(constraint, Balanced):
        return max(sizes) - min(sizes) <= constraint.delta
    if isinstance(constraint, FactorBalanced):
        return max(sizes) <= constraint.alpha * min(sizes)
    if isinstance(constraint, Equal):
        k = len(sizes)
        if n % k:
            return False
        return all(s == n // k for s in sizes)
    raise TypeError(f"unknown constraint {constraint!r}")


@dataclass(frozen=True)
class Instance:
    matrix: CategoricalMatrix
    k: int
    B: int
    constraint: SizeConstraint = field(default_factory=Unconstrained)

    def __post_init__(self):
        if self.k < 1:
            raise InstanceError("k must be positive")
        if self.B < 0:
            raise InstanceError("B must be nonnegative")

    @property
    def alphabet(self) -> Alphabet:
        return self.matrix.alphabet

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def m(self) -> int:
        return self.matrix.m

    def with_constraint(self, constraint: SizeConstraint) -> "Instance":
        return Instance(self.matrix, self.k, self.B, constraint)

    def with_budget(self, B: int) -> "Instance":
        return Instance(self.matrix, self.k, B, self.constraint)


# -- partitions of the column index set -------------------------------------


@dataclass(frozen=True)
class InitialClustering:
    """Maximal groups of identical columns, ordered by smallest member."""

    groups: tuple[tuple[int, ...], ...]
    representatives: tuple[tuple[int, ...], ...]

    @property
    def s(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    def group_of(self) -> list[int]:
        """Column index -> group index."""
        out = [0] * sum(len(g) for g in self.groups)
        for gi, g in enumerate(self.groups):
            for j in g:
                out[j] = gi
        return out


def initial_clusters(matrix: CategoricalMatrix) -> InitialClustering:
    seen: dict[tuple, list[int]] = {}
    for j, col in enumerate(matrix.columns):
        seen.setdefault(col, []).append(j)
    # dict preserves first-insertion order, i.e. order of smallest member
    groups = tuple(tuple(v) for v in seen.values())
    reps = tuple(seen.keys())
    return InitialClustering(groups, reps)


@dataclass(frozen=True)
class Clustering:
    clusters: tuple[tuple[int, ...], ...]
    medians: tuple[tuple[int, ...], ...]
    cost: int

    @property
    def k(self) -> int:
        return len(self.clusters)

    @property
    def sizes(self) -> list[int]:
        return [len(c) for c in self.clusters]


def validate_partition(clusters, n: int, allow_empty: bool = True) -> None:
    seen = set()
    for c in clusters:
        if not allow_empty and not c:
            raise InstanceError("empty cluster")
        for j in c:
            if not 0 <= j < n:
                raise InstanceError(f"index {j} out of range 0..{n - 1}")
            if j in seen:
                raise InstanceError(f"index {j} appears twice")
            seen.add(j)
    if len(seen) != n:
        raise InstanceError("clusters do not cover every column")


@dataclass(frozen=True)
class IntersectionGraph:
    """Bipartite graph between solution clusters (left) and initial clusters (right)."""

    k: int
    s: int
    edges: frozenset[tuple[int, int]]

    def degree_left(self, i: int) -> int:
        return sum(1 for a, _ in self.edges if a == i)

    def degree_right(self, j: int) -> int:
        return sum(1 for _, b in self.edges if b == j)

    def is_forest(self) -> bool:
        parent = list(range(self.k + self.s))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.edges:
            ra, rb = find(a), find(self.k + b)
            if ra == rb:
                return False
            parent[ra] = rb
        return True


def intersection_graph(clusters, init: InitialClustering) -> IntersectionGraph:
    if isinstance(clusters, Clustering):
        clusters = clusters.clusters
    group_of = init.group_of()
    edges = frozenset((i, group_of[j]) for i, c in enumerate(clusters) for j in c)
    return IntersectionGraph(len(clusters), init.s, edges)
