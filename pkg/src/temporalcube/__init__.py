"""Accessible direct paths in the randomly edge-weighted hypercube."""

from .core import (
    DirectPath,
    Edge,
    GapEncoding,
    Vertex,
    WeightOracle,
    canonical_path,
    decode_gap,
    encode_gap,
    is_accessible,
)
from .exact import (
    count_accessible,
    count_accessible_bruteforce,
    joint_accessibility,
    joint_accessibility_bruteforce,
    list_accessible,
)
from .limitlaw import build_context, gompertz_delta, moment, pmf_exact, pmf_quadrature, sample
from .pairs import (
    compositions,
    disjoint_path_table,
    overlap_mean,
    overlap_mean_bound,
    second_moment_exact,
    second_moment_summary,
)
from .trees import (
    build_greedy_tree,
    coupling_dimension_guide,
    default_branching,
    ideal_functional_population,
    ideal_functional_samples,
    leaf_functional,
    middle_conditional_mean,
    tree_restricted_count,
)

__version__ = "0.1.0"

__all__ = [
    "DirectPath", "Edge", "GapEncoding", "Vertex", "WeightOracle",
    "canonical_path", "decode_gap", "encode_gap", "is_accessible",
    "count_accessible", "count_accessible_bruteforce", "list_accessible",
    "joint_accessibility", "joint_accessibility_bruteforce",
    "build_context", "gompertz_delta", "moment", "pmf_exact", "pmf_quadrature", "sample",
    "compositions", "disjoint_path_table", "overlap_mean", "overlap_mean_bound",
    "second_moment_exact", "second_moment_summary",
    "build_greedy_tree", "coupling_dimension_guide", "default_branching",
    "ideal_functional_population", "ideal_functional_samples", "leaf_functional",
    "middle_conditional_mean", "tree_restricted_count",
]
