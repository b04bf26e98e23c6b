"""Symbolic analysis of contact sub-pseudo-Riemannian structures:
invariants, connections, curvature decompositions, Einstein-Weyl verdicts
and isometry verification."""

from .symexpr import (
    Chart,
    Expr,
    SamplingPlan,
    ZeroVerdict,
    differentiate,
    eval_at,
    is_zero,
    parse,
    print_expr,
    simplify,
)
from .calculus import KForm, PointMap, VectorField
from .structure import (
    FrameMetric,
    HData,
    SubPRStructure,
    build_structure,
    extend_metric,
    h_invariant,
    kappa_dim3,
    kappa_general,
    orientation_flip,
)
from .builtins import BUILTIN_NAMES, builtin_structure

__version__ = "0.1.0"

__all__ = [
    "Chart",
    "Expr",
    "SamplingPlan",
    "ZeroVerdict",
    "differentiate",
    "eval_at",
    "is_zero",
    "parse",
    "print_expr",
    "simplify",
    "KForm",
    "PointMap",
    "VectorField",
    "FrameMetric",
    "HData",
    "SubPRStructure",
    "build_structure",
    "extend_metric",
    "h_invariant",
    "kappa_dim3",
    "kappa_general",
    "orientation_flip",
    "BUILTIN_NAMES",
    "builtin_structure",
    "__version__",
]
