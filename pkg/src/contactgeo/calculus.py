"""Vector fields, differential forms and symbolic linear solves on a chart.

Forms are stored sparsely on strictly increasing coordinate multi-indices and
evaluated with the determinant convention: (dx ^ dy)(d/dx, d/dy) = 1, and for
a 1-form a, da(X, Y) = X(a(Y)) - Y(a(X)) - a([X, Y]) with no 1/2 factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import sympy as sp

from .symexpr import (
    Chart,
    Expr,
    SamplingPlan,
    SymExprError,
    differentiate,
    is_zero,
    simplify,
)

__all__ = [
    "VectorField",
    "KForm",
    "PointMap",
    "SingularMatrixError",
    "lie_bracket",
    "exterior_derivative",
    "wedge",
    "evaluate_form",
    "pushforward",
    "pullback_form",
    "pullback_metric",
    "expand_in_frame",
    "solve_linear",
    "invert_matrix",
    "matrix_determinant",
]


class SingularMatrixError(SymExprError):
    """A symbolic linear solve met a matrix with no admissible pivot."""


@dataclass(frozen=True)
class VectorField:
    """First-order differential operator with Expr coefficients per coordinate."""

    chart: Chart
    coeffs: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.chart.dim:
            raise SymExprError("coefficient count must match chart dimension")
        for c in self.coeffs:
            if c.chart != self.chart:
                raise SymExprError("coefficient bound to a different chart")

    @classmethod
    def from_texts(cls, chart: Chart, texts: Sequence[str]) -> "VectorField":
        from .symexpr import parse

        return cls(chart, tuple(parse(t, chart) for t in texts))

    def apply(self, f: Expr) -> Expr:
        """Directional derivative of a scalar."""
        out = self.chart.zero
        for name, c in zip(self.chart.names, self.coeffs):
            out = out + c * differentiate(f, name)
        return out

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.chart, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.chart, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, tuple(-a for a in self.coeffs))

    def scale(self, f) -> "VectorField":
        return VectorField(self.chart, tuple(c * f for c in self.coeffs))

    def simplified(self) -> "VectorField":
        return VectorField(self.chart, tuple(simplify(c) for c in self.coeffs))

    def is_zero_field(self, plan: SamplingPlan | None = None) -> bool:
        return all(is_zero(c, plan).is_zero for c in self.coeffs)


def coordinate_field(chart: Chart, index: int) -> VectorField:
    coeffs = tuple(chart.constant(1 if i == index else 0) for i in range(chart.dim))
    return VectorField(chart, coeffs)


@dataclass(frozen=True)
class KForm:
    """Antisymmetric k-linear form, sparse over increasing multi-indices."""

    chart: Chart
    degree: int
    comps: dict

    def __post_init__(self):
        if self.degree < 0 or self.degree > self.chart.dim:
            raise SymExprError("form degree out of range")
        for idx in self.comps:
            if list(idx) != sorted(set(idx)) or len(idx) != self.degree:
                raise SymExprError(f"component index {idx} is not strictly increasing")

    @classmethod
    def build(cls, chart: Chart, degree: int, entries: dict) -> "KForm":
        comps = {}
        for idx, val in entries.items():
            val = simplify(val)
            if not val.is_syntactic_zero:
                comps[tuple(idx)] = val
        return cls(chart, degree, comps)

    @classmethod
    def from_scalar(cls, f: Expr) -> "KForm":
        return cls.build(f.chart, 0, {(): f})

    def component(self, idx: tuple[int, ...]) -> Expr:
        return self.comps.get(tuple(idx), self.chart.zero)

    def __add__(self, other: "KForm") -> "KForm":
        if self.degree != other.degree:
            raise SymExprError("cannot add forms of different degree")
        entries = dict(self.comps)
        for idx, val in other.comps.items():
            entries[idx] = entries.get(idx, self.chart.zero) + val
        return KForm.build(self.chart, self.degree, entries)

    def __sub__(self, other: "KForm") -> "KForm":
        return self + other.scale(-1)

    def scale(self, f) -> "KForm":
        return KForm.build(
            self.chart, self.degree, {idx: val * f for idx, val in self.comps.items()}
        )

    def is_zero_form(self, plan: SamplingPlan | None = None) -> bool:
        return all(is_zero(v, plan).is_zero for v in self.comps.values())


def one_form(chart: Chart, coeffs: Sequence[Expr]) -> KForm:
    return KForm.build(chart, 1, {(i,): c for i, c in enumerate(coeffs)})


def lie_bracket(v: VectorField, w: VectorField) -> VectorField:
    """[V, W]_k = sum_i (V_i d_i W_k - W_i d_i V_k)."""
    if v.chart != w.chart:
        raise SymExprError("bracket of fields on different charts")
    coeffs = []
    for k in range(v.chart.dim):
        raw = v.apply(w.coeffs[k]) - w.apply(v.coeffs[k])
        # expand_mul collapses the product/derivative cross terms; full
        # rational normalization is left to the consumers that need it.
        coeffs.append(Expr._raw(v.chart, sp.expand_mul(raw.sym)))
    return VectorField(v.chart, tuple(coeffs))


def _insert_index(a: int, idx: tuple[int, ...]):
    """Insert coordinate a into increasing idx; returns (sign, new_idx) or None."""
    if a in idx:
        return None
    pos = 0
    while pos < len(idx) and idx[pos] < a:
        pos += 1
    sign = -1 if pos % 2 else 1
    return sign, idx[:pos] + (a,) + idx[pos:]


def exterior_derivative(form: KForm) -> KForm:
    if form.degree >= form.chart.dim:
        raise SymExprError("exterior derivative would exceed chart dimension")
    entries: dict = {}
    for idx, val in form.comps.items():
        for a, name in enumerate(form.chart.names):
            d = differentiate(val, name)
            if d.is_syntactic_zero:
                continue
            ins = _insert_index(a, idx)
            if ins is None:
                continue
            sign, new_idx = ins
            entries[new_idx] = entries.get(new_idx, form.chart.zero) + d * sign
    return KForm.build(form.chart, form.degree + 1, entries)


def _merge_indices(i1: tuple[int, ...], i2: tuple[int, ...]):
    """Shuffle sign and merged increasing index, or None on repetition."""
    if set(i1) & set(i2):
        return None
    merged = i1 + i2
    arr = list(merged)
    sign = 1
    for i in range(len(arr)):
        for j in range(i + 1, len(arr)):
            if arr[i] > arr[j]:
                sign = -sign
    return sign, tuple(sorted(arr))


def wedge(a: KForm, b: KForm) -> KForm:
    if a.chart != b.chart:
        raise SymExprError("wedge of forms on different charts")
    if a.degree + b.degree > a.chart.dim:
        raise SymExprError("wedge degree exceeds chart dimension")
    entries: dict = {}
    for i1, v1 in a.comps.items():
        for i2, v2 in b.comps.items():
            m = _merge_indices(i1, i2)
            if m is None:
                continue
            sign, idx = m
            entries[idx] = entries.get(idx, a.chart.zero) + v1 * v2 * sign
    return KForm.build(a.chart, a.degree + b.degree, entries)


def wedge_power(form: KForm, n: int) -> KForm:
    out = form
    for _ in range(n - 1):
        out = wedge(out, form)
    return out


def evaluate_form(form: KForm, fields: Sequence[VectorField]) -> Expr:
    """Multilinear antisymmetric evaluation (determinant convention)."""
    if len(fields) != form.degree:
        raise SymExprError("field count must equal form degree")
    chart = form.chart
    if form.degree == 0:
        return form.component(())
    total = sp.Integer(0)
    for idx, val in form.comps.items():
        mat = sp.Matrix(
            [[fields[r].coeffs[c].sym for c in idx] for r in range(form.degree)]
        )
        total += val.sym * mat.det(method="berkowitz")
    return simplify(Expr(chart, total))


@dataclass(frozen=True)
class PointMap:
    """Smooth self-map of the chart domain given by target expressions."""

    chart: Chart
    comps: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.comps) != self.chart.dim:
            raise SymExprError("component count must match chart dimension")

    @classmethod
    def from_texts(cls, chart: Chart, texts: Sequence[str]) -> "PointMap":
        from .symexpr import parse

        return cls(chart, tuple(parse(t, chart) for t in texts))

    @classmethod
    def identity(cls, chart: Chart) -> "PointMap":
        return cls(chart, tuple(chart.coord(i) for i in range(chart.dim)))

    def substitution(self) -> dict:
        return {s: c.sym for s, c in zip(self.chart.symbols, self.comps)}

    def compose(self, inner: "PointMap") -> "PointMap":
        """self after inner."""
        sub = inner.substitution()
        return PointMap(
            self.chart,
            tuple(simplify(Expr(self.chart, c.sym.subs(sub, simultaneous=True))) for c in self.comps),
        )

    def jacobian(self) -> list[list[Expr]]:
        return [
            [differentiate(c, name) for name in self.chart.names] for c in self.comps
        ]

    def is_identity(self, plan: SamplingPlan | None = None) -> bool:
        return all(
            is_zero(c - self.chart.coord(i), plan).is_zero
            for i, c in enumerate(self.comps)
        )


def substitute_map(e: Expr, f: PointMap) -> Expr:
    """Scalar composed with a point map: e after f."""
    return Expr(e.chart, e.sym.subs(f.substitution(), simultaneous=True))


def pushforward(f: PointMap, v: VectorField, f_inverse: PointMap) -> VectorField:
    """f_* V: Jacobian action, re-expressed at the target point via f_inverse."""
    jac = f.jacobian()
    chart = f.chart
    pushed = []
    for a in range(chart.dim):
        acc = chart.zero
        for b in range(chart.dim):
            acc = acc + jac[a][b] * v.coeffs[b]
        pushed.append(simplify(substitute_map(acc, f_inverse)))
    return VectorField(chart, tuple(pushed))


def pullback_form(f: PointMap, form: KForm) -> KForm:
    """f^* of a k-form; commutes with d and wedge."""
    chart = f.chart
    jac = f.jacobian()
    k = form.degree
    if k == 0:
        return KForm.build(chart, 0, {(): substitute_map(form.component(()), f)})
    entries: dict = {}
    for out_idx in itertools.combinations(range(chart.dim), k):
        acc = sp.Integer(0)
        for in_idx, val in form.comps.items():
            minor = sp.Matrix(
                [[jac[i][j].sym for j in out_idx] for i in in_idx]
            ).det(method="berkowitz")
            if minor == 0:
                continue
            acc += substitute_map(val, f).sym * minor
        if acc != 0:
            entries[out_idx] = Expr(chart, acc)
    return KForm.build(chart, k, entries)


def pullback_metric(f: PointMap, g: list[list[Expr]]) -> list[list[Expr]]:
    """f^* of a coordinate-basis (0,2) tensor: J^T (g after f) J."""
    chart = f.chart
    d = chart.dim
    jac = f.jacobian()
    gf = [[substitute_map(g[a][b], f) for b in range(d)] for a in range(d)]
    out = []
    for a in range(d):
        row = []
        for b in range(d):
            acc = chart.zero
            for c in range(d):
                for e in range(d):
                    acc = acc + gf[c][e] * jac[c][a] * jac[e][b]
            row.append(simplify(acc))
        out.append(row)
    return out


# --------------------------------------------------------------------------
# Fraction-free linear algebra over the expression field.  Pivots are chosen
# by is_zero verdicts, never by syntactic comparison, so a symbolically
# nonzero-looking but identically zero entry is never divided by.
# --------------------------------------------------------------------------


def _pick_pivot(rows: list[list[sp.Expr]], col: int, start: int, chart: Chart, plan: SamplingPlan | None):
    for r in range(start, len(rows)):
        entry = sp.cancel(rows[r][col])
        if entry == 0:
            rows[r][col] = sp.Integer(0)
            continue
        verdict = is_zero(Expr(chart, entry), plan)
        if not verdict.is_zero:
            rows[r][col] = entry
            return r
        rows[r][col] = sp.Integer(0)
    return None


def solve_linear(
    matrix: Sequence[Sequence[Expr]],
    rhs: Sequence[Expr],
    plan: SamplingPlan | None = None,
) -> list[Expr]:
    """Solve square M x = b by fraction-free (Bareiss) elimination."""
    n = len(matrix)
    if n == 0 or any(len(row) != n for row in matrix):
        raise SymExprError("solve_linear expects a square matrix")
    chart = rhs[0].chart
    rows = [[sp.expand(matrix[r][c].sym) for c in range(n)] + [sp.expand(rhs[r].sym)] for r in range(n)]
    prev = sp.Integer(1)
    for k in range(n):
        piv_row = _pick_pivot(rows, k, k, chart, plan)
        if piv_row is None:
            raise SingularMatrixError(f"no admissible pivot in column {k}")
        if piv_row != k:
            rows[k], rows[piv_row] = rows[piv_row], rows[k]
        for r in range(k + 1, n):
            for c in range(k + 1, n + 1):
                rows[r][c] = sp.cancel(
                    (rows[k][k] * rows[r][c] - rows[r][k] * rows[k][c]) / prev
                )
            rows[r][k] = sp.Integer(0)
        prev = rows[k][k]
    sol: list[sp.Expr] = [sp.Integer(0)] * n
    for i in range(n - 1, -1, -1):
        acc = rows[i][n]
        for j in range(i + 1, n):
            acc = acc - rows[i][j] * sol[j]
        sol[i] = sp.cancel(acc / rows[i][i])
    return [Expr(chart, s) for s in sol]


def matrix_determinant(matrix: Sequence[Sequence[Expr]]) -> Expr:
    chart = matrix[0][0].chart
    m = sp.Matrix([[e.sym for e in row] for row in matrix])
    return simplify(Expr(chart, m.det(method="berkowitz")))


def invert_matrix(
    matrix: Sequence[Sequence[Expr]], plan: SamplingPlan | None = None
) -> list[list[Expr]]:
    """Symbolic inverse via adjugate over determinant, entrywise simplified."""
    chart = matrix[0][0].chart
    det = matrix_determinant(matrix)
    verdict = is_zero(det, plan)
    if verdict.is_zero:
        raise SingularMatrixError("matrix determinant is zero on the sample domain")
    m = sp.Matrix([[e.sym for e in row] for row in matrix])
    adj = m.adjugate()
    n = m.rows
    return [
        [simplify(Expr(chart, adj[i, j] / det.sym)) for j in range(n)]
        for i in range(n)
    ]


def expand_in_frame(
    v: VectorField,
    frame: Sequence[VectorField],
    plan: SamplingPlan | None = None,
) -> list[Expr]:
    """Coefficients a_k with V = sum a_k E_k, via fraction-free elimination."""
    chart = v.chart
    n = chart.dim
    if len(frame) != n:
        raise SymExprError("frame must have as many fields as the chart dimension")
    matrix = [[frame[k].coeffs[a] for k in range(n)] for a in range(n)]
    rhs = [v.coeffs[a] for a in range(n)]
    return [simplify(c) for c in solve_linear(matrix, rhs, plan)]
