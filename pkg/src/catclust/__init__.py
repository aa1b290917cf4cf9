"""Categorical clustering under Hamming cost with cluster-size constraints."""

from .core import (
    Alphabet,
    Balanced,
    Capacitated,
    CategoricalMatrix,
    Clustering,
    Equal,
    FactorBalanced,
    InitialClustering,
    Instance,
    InstanceError,
    IntersectionGraph,
    ResourceError,
    Unconstrained,
    check_constraint,
    initial_clusters,
    intersection_graph,
)
from .metric import clustering_cost, hamming_distance, majority_median, make_clustering
from .fpt import solve
from .variants import solve_balanced, solve_equal, solve_factor_balanced, solve_variant
from .kernel import kernelize_balanced

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "Balanced",
    "Capacitated",
    "CategoricalMatrix",
    "Clustering",
    "Equal",
    "FactorBalanced",
    "InitialClustering",
    "Instance",
    "InstanceError",
    "IntersectionGraph",
    "ResourceError",
    "Unconstrained",
    "check_constraint",
    "initial_clusters",
    "intersection_graph",
    "clustering_cost",
    "hamming_distance",
    "majority_median",
    "make_clustering",
    "solve",
    "solve_balanced",
    "solve_equal",
    "solve_factor_balanced",
    "solve_variant",
    "kernelize_balanced",
]
