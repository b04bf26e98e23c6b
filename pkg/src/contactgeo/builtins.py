"""Named example structures addressable from the service and the CLI."""

from __future__ import annotations

from dataclasses import dataclass

from .calculus import VectorField
from .structure import SubPRStructure, build_structure
from .symexpr import Chart, SamplingPlan

__all__ = ["BUILTIN_NAMES", "builtin_structure", "BuiltinSpec"]


@dataclass(frozen=True)
class BuiltinSpec:
    coords: tuple[str, ...]
    domain: tuple[tuple[float, float], ...]
    frame: tuple[tuple[str, ...], ...]
    signature: tuple[int, ...]
    excluded: tuple[str, ...] = ()


_BOX3 = ((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0))
_BOX5 = tuple([(-1.0, 1.0)] * 5)

_HEIS3_FRAME = (("1", "0", "-y/2"), ("0", "1", "x/2"))
_HEIS5_FRAME = (
    ("1", "0", "0", "0", "-y1/2"),
    ("0", "1", "0", "0", "x1/2"),
    ("0", "0", "1", "0", "-y2/2"),
    ("0", "0", "0", "1", "x2/2"),
)
_HEIS5_SCALED_FRAME = (
    ("1", "0", "0", "0", "-y1/2"),
    ("0", "1", "0", "0", "x1/2"),
    ("0", "0", "sqrt(2)", "0", "-sqrt(2)*y2/2"),
    ("0", "0", "0", "sqrt(2)", "sqrt(2)*x2/2"),
)

_REGISTRY: dict[str, BuiltinSpec] = {
    "heisenberg3-riem": BuiltinSpec(("x", "y", "z"), _BOX3, _HEIS3_FRAME, (1, 1)),
    "heisenberg3-lor": BuiltinSpec(("x", "y", "z"), _BOX3, _HEIS3_FRAME, (-1, 1)),
    "heisenberg5-case1": BuiltinSpec(
        ("x1", "y1", "x2", "y2", "z"), _BOX5, _HEIS5_FRAME, (1, 1, 1, 1)
    ),
    "heisenberg5-case2": BuiltinSpec(
        ("x1", "y1", "x2", "y2", "z"), _BOX5, _HEIS5_FRAME, (-1, 1, 1, 1)
    ),
    "heisenberg5-case3": BuiltinSpec(
        ("x1", "y1", "x2", "y2", "z"), _BOX5, _HEIS5_FRAME, (-1, 1, -1, 1)
    ),
    "heisenberg5-scaled": BuiltinSpec(
        ("x1", "y1", "x2", "y2", "z"), _BOX5, _HEIS5_SCALED_FRAME, (1, 1, 1, 1)
    ),
    # Lift of the hyperbolic plane (dx^2 + dy^2)/y^2 on y > 0; kappa = -1.
    "hyperbolic-lift": BuiltinSpec(
        ("x", "y", "z"),
        ((-1.0, 1.0), (0.5, 2.0), (-1.0, 1.0)),
        (("y", "0", "1"), ("0", "y", "0")),
        (1, 1),
        excluded=("y",),
    ),
    # Lift of the round sphere in stereographic coordinates; kappa = +1.
    "sphere-lift": BuiltinSpec(
        ("x", "y", "z"),
        _BOX3,
        (
            ("(1 + x^2 + y^2)/2", "0", "-y"),
            ("0", "(1 + x^2 + y^2)/2", "x"),
        ),
        (1, 1),
    ),
    # Conformally stretched first leg; h != 0, the generic dim-3 test case.
    "twisted-heisenberg": BuiltinSpec(
        ("x", "y", "z"),
        _BOX3,
        (("exp(z)", "0", "-y*exp(z)/2"), ("0", "1", "x/2")),
        (1, 1),
    ),
    "twisted-heisenberg-lor": BuiltinSpec(
        ("x", "y", "z"),
        _BOX3,
        (("exp(z)", "0", "-y*exp(z)/2"), ("0", "1", "x/2")),
        (-1, 1),
    ),
    # Opposite exponential twists on the two legs; h = diag(-1, 1), so the
    # endomorphism determinant is the constant -1.
    "boosted-heisenberg": BuiltinSpec(
        ("x", "y", "z"),
        _BOX3,
        (("exp(z)", "0", "-y*exp(z)/2"), ("0", "exp(-z)", "x*exp(-z)/2")),
        (1, 1),
    ),
    "boosted-heisenberg-lor": BuiltinSpec(
        ("x", "y", "z"),
        _BOX3,
        (("exp(z)", "0", "-y*exp(z)/2"), ("0", "exp(-z)", "x*exp(-z)/2")),
        (-1, 1),
    ),
}

BUILTIN_NAMES = tuple(sorted(_REGISTRY))


def builtin_spec(name: str) -> BuiltinSpec:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown builtin {name!r}; available: {', '.join(BUILTIN_NAMES)}"
        ) from None


def builtin_structure(name: str, plan: SamplingPlan | None = None) -> SubPRStructure:
    spec = builtin_spec(name)
    chart = Chart(spec.coords, spec.domain)
    if spec.excluded:
        chart = chart.with_excluded(*spec.excluded)
    frame = [VectorField.from_texts(chart, comps) for comps in spec.frame]
    return build_structure(chart, frame, spec.signature, plan)
