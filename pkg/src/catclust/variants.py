"""Balanced, factor-balanced, equal and unconstrained clustering as sweeps of
capacitated solves.

A balanced solution has some smallest cluster size p, and every other size
then lies in [p, p + delta]; since sizes average n/k, p sits between
ceil(n/k) - delta and floor(n/k).  Trying each such p with the matching
capacitated window decides the balanced problem exactly.  The factor-balanced
case is the same with the window [p, floor(alpha * p)].
"""

from __future__ import annotations

import math
from typing import Callable, Iterator

from .core import (
    Balanced,
    Capacitated,
    Clustering,
    Equal,
    FactorBalanced,
    Instance,
    InstanceError,
    Unconstrained,
    check_constraint,
)
from . import fpt

CapacitatedSolver = Callable[[Instance], "Clustering | None"]


def balanced_windows(n: int, k: int, delta: int) -> Iterator[tuple[int, int]]:
    """(p, q) windows whose union covers every balanced size profile."""
    for p in range(max(1, -(-n // k) - delta), n // k + 1):
        yield p, min(n, p + delta)


def factor_windows(n: int, k: int, alpha) -> Iterator[tuple[int, int]]:
    """(p, q) windows for ratio ``alpha`` (a Fraction); q = floor(alpha * p) exactly."""
    lo = max(1, math.ceil(n / (alpha * k)))
    for p in range(lo, n // k + 1):
        yield p, min(n, math.floor(alpha * p))


def _sweep(instance: Instance, windows, solver: CapacitatedSolver) -> Clustering | None:
    for p, q in windows:
        witness = solver(instance.with_constraint(Capacitated(p, q)))
        if witness is not None:
            # a witness of the window is a witness of the original variant
            assert check_constraint(witness.sizes, instance.constraint, instance.n), witness.sizes
            return witness
    return None


def _default_solver(instance: Instance) -> Clustering | None:
    return fpt.solve(instance)


def solve_balanced(instance: Instance, solver: CapacitatedSolver = _default_solver) -> Clustering | None:
    c = instance.constraint
    if not isinstance(c, Balanced):
        raise InstanceError("solve_balanced expects a Balanced constraint")
    return _sweep(instance, balanced_windows(instance.n, instance.k, c.delta), solver)


def solve_factor_balanced(instance: Instance, solver: CapacitatedSolver = _default_solver) -> Clustering | None:
    c = instance.constraint
    if not isinstance(c, FactorBalanced):
        raise InstanceError("solve_factor_balanced expects a FactorBalanced constraint")
    return _sweep(instance, factor_windows(instance.n, instance.k, c.alpha), solver)


def solve_equal(instance: Instance, solver: CapacitatedSolver = _default_solver) -> Clustering | None:
    if not isinstance(instance.constraint, Equal):
        raise InstanceError("solve_equal expects an Equal constraint")
    n, k = instance.n, instance.k
    if n % k:
        return None
    return _sweep(instance, [(n // k, n // k)], solver)


def solve_unconstrained(instance: Instance, solver: CapacitatedSolver = _default_solver) -> Clustering | None:
    """Empty clusters are allowed here.  With k <= n, splitting a cluster never
    raises the cost, so an optimum with k nonempty clusters exists and the
    window [1, n] is exact.  With k > n every column gets its own cluster."""
    if not isinstance(instance.constraint, Unconstrained):
        raise InstanceError("solve_unconstrained expects an Unconstrained constraint")
    n, k = instance.n, instance.k
    if k > n:
        from .metric import make_clustering

        return make_clustering(instance.matrix, [[j] for j in range(n)] + [[] for _ in range(k - n)])
    return _sweep(instance, [(1, n)], solver)


def solve_variant(instance: Instance, solver: CapacitatedSolver = _default_solver) -> Clustering | None:
    """Dispatch on the instance's constraint type."""
    c = instance.constraint
    if isinstance(c, Capacitated):
        return solver(instance)
    if isinstance(c, Balanced):
        return solve_balanced(instance, solver)
    if isinstance(c, FactorBalanced):
        return solve_factor_balanced(instance, solver)
    if isinstance(c, Equal):
        return solve_equal(instance, solver)
    if isinstance(c, Unconstrained):
        return solve_unconstrained(instance, solver)
    raise InstanceError(f"unknown constraint {c!r}")


__all__ = [
    "balanced_windows",
    "factor_windows",
    "solve_balanced",
    "solve_factor_balanced",
    "solve_equal",
    "solve_unconstrained",
    "solve_variant",
]
