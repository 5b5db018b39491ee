"""Maximum variance unfolding: models, graphs, solver and oracles."""

from ._core import (
    Model,
    NeighborGraph,
    NumericalFailure,
    Solution,
    ValidationError,
    a_star,
    build_graph,
    covering_radius,
    critical_radius,
    ellipse_F,
    energy,
    make_model,
    procrustes_residual,
    radius_schedule,
    run_experiment,
    sample,
    solve,
    solve_b,
)

__all__ = [
    "Model",
    "NeighborGraph",
    "NumericalFailure",
    "Solution",
    "ValidationError",
    "a_star",
    "build_graph",
    "covering_radius",
    "critical_radius",
    "ellipse_F",
    "energy",
    "make_model",
    "procrustes_residual",
    "radius_schedule",
    "run_experiment",
    "sample",
    "solve",
    "solve_b",
]
