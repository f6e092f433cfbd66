"""Sampling and integration on algebraic manifolds via random linear slices."""

from ._core import (
    AcceptanceFloorError,
    DegreeBoundExceeded,
    DimensionError,
    DomainError,
    Error,
    InvalidBoundsError,
    IoError,
    Manifold,
    ParseError,
    SingularPointError,
    SolverError,
    alpha_weight,
    estimate_integral,
    estimate_integrals,
    intersect,
    kappa,
    load_manifold,
    parse_manifold,
    plan_sample_size,
    sample,
    solve_system,
    variance_bound,
)

__all__ = [
    "AcceptanceFloorError",
    "DegreeBoundExceeded",
    "DimensionError",
    "DomainError",
    "Error",
    "InvalidBoundsError",
    "IoError",
    "Manifold",
    "ParseError",
    "SingularPointError",
    "SolverError",
    "alpha_weight",
    "estimate_integral",
    "estimate_integrals",
    "intersect",
    "kappa",
    "load_manifold",
    "parse_manifold",
    "plan_sample_size",
    "sample",
    "solve_system",
    "variance_bound",
]
