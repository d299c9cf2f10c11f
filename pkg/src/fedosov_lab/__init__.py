"""Exact Fedosov deformation quantization on jets at a point."""

from .config import ProblemConfig, build_problem, load_config, parse_config, validate
from .expr import Expr, parse_expr
from .fedosov import (
    FedosovState,
    StarTable,
    WeylCurvatureSpec,
    connection_apply,
    extract_star_table,
    moyal_table,
    project,
    quantize,
    solve_gamma,
    star,
    star_bracket,
    weyl_curvature,
)
from .geometry import (
    GeometryData,
    LagrangianSpec,
    check_symplectic,
    check_torsion_free,
    covariant_derivative,
    curvature,
    invert_omega,
    lagrangian_membership,
    symplectize,
)
from .report import Report, emit_report, format_series
from .scalar import Scalar
from .series import (
    Bounds,
    GradedSeries,
    eval_at_origin,
    filtration_degree,
    partial_x,
    partial_y,
    series_add,
    series_mul,
    truncate,
)
from .weyl import (
    PoissonMatrix,
    delta_inv,
    delta_op,
    hodge_decompose,
    is_central,
    moyal_commutator,
    moyal_mul,
)

__all__ = [
    "Bounds",
    "Expr",
    "FedosovState",
    "GeometryData",
    "GradedSeries",
    "LagrangianSpec",
    "PoissonMatrix",
    "ProblemConfig",
    "Report",
    "Scalar",
    "StarTable",
    "WeylCurvatureSpec",
    "build_problem",
    "check_symplectic",
    "check_torsion_free",
    "connection_apply",
    "covariant_derivative",
    "curvature",
    "delta_inv",
    "delta_op",
    "emit_report",
    "eval_at_origin",
    "extract_star_table",
    "filtration_degree",
    "format_series",
    "hodge_decompose",
    "invert_omega",
    "is_central",
    "lagrangian_membership",
    "load_config",
    "moyal_commutator",
    "moyal_mul",
    "moyal_table",
    "parse_config",
    "parse_expr",
    "partial_x",
    "partial_y",
    "project",
    "quantize",
    "series_add",
    "series_mul",
    "solve_gamma",
    "star",
    "star_bracket",
    "symplectize",
    "truncate",
    "validate",
    "weyl_curvature",
]
