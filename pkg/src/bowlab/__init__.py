"""Numerical calculus for bow diagrams.

A bow diagram is a collection of oriented wavy intervals joined by
directed edges, with a vector-space dimension on every segment between
marked points.  This package realizes the associated matrix data,
evaluates and solves the moment-map equations, decides semistability,
and reduces cobalanced diagrams to framed quiver representations.

Layers, bottom up: linalg and solve (shared numerics), diagrams (the
combinatorial model and DSL), quiver / triangles (local building
blocks), total_space (the assembled ambient space), reduction (the
cobalanced bridge), cli (the command-line front end).
"""

from .diagrams import (
    Bow,
    BowDiagram,
    BowSyntaxError,
    NotCobalanced,
    ParameterSet,
    SegmentRef,
    Violation,
    cobalanced_diagram,
    diagram_from_json_dict,
    diagram_to_json_dict,
    embed_deformation,
    embed_stability,
    framed_dims_of_cobalanced,
    is_cobalanced,
    lambda_of_nu,
    local_emptiness_check,
    parse_bow_diagram,
    reverse_diagram,
    serialize,
    theta_of_nu,
    underlying_quiver,
)
from .graded import GradedSubspace, graded_dims, zero_graded
from .linalg import DEFAULT_TOL, Subspace, Tolerances
from .quiver import (
    Quiver,
    QuiverRepPoint,
    StabilityVerdict,
    quiver_point_from_json_dict,
    quiver_point_to_json_dict,
    rep_gauge_action,
    rep_moment_map,
    rep_semistable,
    rep_symplectic_pairing,
)
from .reduction import (
    HReducedPoint,
    MuHNonzero,
    ReductionReport,
    SingularA,
    from_quiver_point,
    gauge_fix_H,
    to_quiver_point,
    verify_reduction,
)
from .solve import MaxItersExceeded, SolveConfig, SolveResult, gauss_newton
from .total_space import (
    FiberSolveReport,
    InfeasibilityEvidence,
    TotalSpacePoint,
    check_local_maps,
    check_semistable,
    check_shapes,
    expected_smooth_dimension,
    gauge_action,
    moment_residual,
    point_from_json_dict,
    point_to_json_dict,
    random_point,
    solve_fiber,
    total_moment_map,
    total_symplectic_pairing,
    translate_deformation,
    zero_point,
)
from .triangles import (
    ConditionReport,
    GaugeFixFailed,
    NotATriangle,
    RectForm,
    SingularU,
    SquareForm,
    TriangleData,
    TwoWayData,
    check_S1,
    check_S2,
    condition_a_residual,
    hurtubise_to_triangle,
    triangle_gauge_action,
    triangle_moment,
    triangle_to_hurtubise,
    two_way_moment,
)

__version__ = "0.1.0"

__all__ = [
    "Bow",
    "BowDiagram",
    "BowSyntaxError",
    "ConditionReport",
    "DEFAULT_TOL",
    "FiberSolveReport",
    "GaugeFixFailed",
    "GradedSubspace",
    "HReducedPoint",
    "InfeasibilityEvidence",
    "MaxItersExceeded",
    "MuHNonzero",
    "NotATriangle",
    "NotCobalanced",
    "ParameterSet",
    "Quiver",
    "QuiverRepPoint",
    "RectForm",
    "ReductionReport",
    "SegmentRef",
    "SingularA",
    "SingularU",
    "SolveConfig",
    "SolveResult",
    "SquareForm",
    "StabilityVerdict",
    "Subspace",
    "Tolerances",
    "TotalSpacePoint",
    "TriangleData",
    "TwoWayData",
    "Violation",
    "check_S1",
    "check_S2",
    "check_local_maps",
    "check_semistable",
    "check_shapes",
    "cobalanced_diagram",
    "condition_a_residual",
    "diagram_from_json_dict",
    "diagram_to_json_dict",
    "embed_deformation",
    "embed_stability",
    "expected_smooth_dimension",
    "framed_dims_of_cobalanced",
    "from_quiver_point",
    "gauge_action",
    "gauge_fix_H",
    "gauss_newton",
    "graded_dims",
    "hurtubise_to_triangle",
    "is_cobalanced",
    "lambda_of_nu",
    "local_emptiness_check",
    "moment_residual",
    "parse_bow_diagram",
    "point_from_json_dict",
    "point_to_json_dict",
    "quiver_point_from_json_dict",
    "quiver_point_to_json_dict",
    "random_point",
    "rep_gauge_action",
    "rep_moment_map",
    "rep_semistable",
    "rep_symplectic_pairing",
    "reverse_diagram",
    "serialize",
    "solve_fiber",
    "theta_of_nu",
    "to_quiver_point",
    "total_moment_map",
    "total_symplectic_pairing",
    "translate_deformation",
    "triangle_gauge_action",
    "triangle_moment",
    "triangle_to_hurtubise",
    "two_way_moment",
    "underlying_quiver",
    "verify_reduction",
    "zero_graded",
    "zero_point",
]
