"""Levi-Civita and Weyl connections in frame components.

Connections are tables Gamma[i][j][k] with nabla_{E_i} E_j = sum_k Gamma[i][j][k] E_k
over a frame context (any pointwise-independent frame with known bracket
coefficients; a structure's completed frame or a plain coordinate basis).

Two independent routes produce the Levi-Civita table: the Koszul formula and
the closed-form expressions in the structural functions.  Their agreement is
part of the test suite, and `verify_connection` re-checks metric compatibility
nabla G = eta (x) G and vanishing torsion symbolically for any table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .calculus import KForm, VectorField, coordinate_field, invert_matrix
from .structure import FrameMetric, SubPRStructure
from .symexpr import (
    Chart,
    Expr,
    SamplingPlan,
    SymExprError,
    ZeroVerdict,
    is_zero,
    simplify,
)

__all__ = [
    "FrameContext",
    "ConnectionCoeffs",
    "VerificationReport",
    "levi_civita",
    "levi_civita_general",
    "closed_form_connection",
    "weyl_connection",
    "weyl_connection_general",
    "verify_connection",
    "covariant_derivative",
    "eta_frame_values",
]


@dataclass(frozen=True)
class FrameContext:
    """A full frame with bracket coefficients and a sampling plan."""

    chart: Chart
    fields: tuple[VectorField, ...]
    cfun: Callable[[int, int, int], Expr]
    plan: SamplingPlan

    @property
    def dim(self) -> int:
        return len(self.fields)

    @classmethod
    def from_structure(cls, s: SubPRStructure) -> "FrameContext":
        return cls(chart=s.chart, fields=s.fields, cfun=s.c, plan=s.plan)

    @classmethod
    def coordinate(cls, chart: Chart, plan: SamplingPlan | None = None) -> "FrameContext":
        plan = plan or SamplingPlan()
        fields = tuple(coordinate_field(chart, a) for a in range(chart.dim))

        def zero_bracket(i: int, j: int, k: int) -> Expr:
            return chart.zero

        return cls(chart=chart, fields=fields, cfun=zero_bracket, plan=plan)

    def apply(self, i: int, f: Expr) -> Expr:
        return self.fields[i].apply(f)


@dataclass(frozen=True)
class ConnectionCoeffs:
    """Frame Christoffel table with its defining metric and Weyl one-form."""

    ctx: FrameContext
    gamma: tuple
    metric: tuple
    eta_values: tuple | None
    provenance: str

    @property
    def dim(self) -> int:
        return self.ctx.dim

    def entry(self, i: int, j: int, k: int) -> Expr:
        return self.gamma[i][j][k]


def _metric_matrix(g: FrameMetric | Sequence[Sequence[Expr]]):
    if isinstance(g, FrameMetric):
        return tuple(tuple(row) for row in g.matrix)
    return tuple(tuple(row) for row in g)


def levi_civita_general(
    ctx: FrameContext, metric: Sequence[Sequence[Expr]], provenance: str = "levi_civita"
) -> ConnectionCoeffs:
    """Koszul formula solved against the inverse frame metric."""
    d = ctx.dim
    G = _metric_matrix(metric)
    Ginv = invert_matrix([list(row) for row in G], ctx.plan)
    # Koszul right-hand sides 2 G(nabla_i E_j, E_k).
    k_table = [[[None] * d for _ in range(d)] for _ in range(d)]
    for i in range(d):
        for j in range(d):
            for k in range(d):
                acc = ctx.apply(i, G[j][k]) + ctx.apply(j, G[i][k]) - ctx.apply(k, G[i][j])
                for m in range(d):
                    acc = acc + ctx.cfun(i, j, m) * G[m][k]
                    acc = acc - ctx.cfun(i, k, m) * G[m][j]
                    acc = acc - ctx.cfun(j, k, m) * G[m][i]
                k_table[i][j][k] = acc
    gamma = []
    for i in range(d):
        g_i = []
        for j in range(d):
            row = []
            for l in range(d):
                acc = ctx.chart.zero
                for k in range(d):
                    acc = acc + Ginv[l][k] * k_table[i][j][k]
                row.append(simplify(acc / 2))
            g_i.append(tuple(row))
        gamma.append(tuple(g_i))
    return ConnectionCoeffs(
        ctx=ctx, gamma=tuple(gamma), metric=G, eta_values=None, provenance=provenance
    )


def levi_civita(g: FrameMetric, s: SubPRStructure) -> ConnectionCoeffs:
    """Levi-Civita connection of an extended frame metric (Koszul route)."""
    return levi_civita_general(FrameContext.from_structure(s), g.matrix)


def closed_form_connection(s: SubPRStructure, c) -> ConnectionCoeffs:
    """Closed-form Levi-Civita table of the extension G^c in the structural
    functions; includes the derivative-of-c terms when c is not constant."""
    if not isinstance(c, Expr):
        c = s.chart.constant(c)
    if is_zero(c, s.plan).is_zero:
        raise SymExprError("closed form requires a nowhere-zero c")
    m = len(s.frame)
    r = s.reeb_index
    d = s.dim
    zero = s.chart.zero
    gamma = [[[zero] * d for _ in range(d)] for _ in range(d)]
    for i in range(m):
        for j in range(m):
            gamma[i][j][r] = simplify(
                (s.c(i, j, r) * c + s.c(r, j, i) * s.s(i) + s.c(r, i, j) * s.s(j)) / (2 * c)
            )
            for k in range(m):
                gamma[i][j][k] = simplify(
                    (s.c(i, j, k) * s.s(k) - s.c(j, k, i) * s.s(i) - s.c(i, k, j) * s.s(j))
                    / (2 * s.s(k))
                )
    for i in range(m):
        for k in range(m):
            gamma[i][r][k] = simplify(
                -(s.c(r, i, k) * s.s(k) + s.c(r, k, i) * s.s(i) + s.c(i, k, r) * c)
                / (2 * s.s(k))
            )
        gamma[i][r][r] = simplify(s.apply_field(i, c) / (2 * c))
        for k in range(m):
            gamma[r][i][k] = simplify(gamma[i][r][k] + s.c(r, i, k))
        gamma[r][i][r] = gamma[i][r][r]
    for k in range(m):
        gamma[r][r][k] = simplify(-s.apply_field(k, c) / (2 * s.s(k)))
    gamma[r][r][r] = simplify(s.apply_field(r, c) / (2 * c))

    from .structure import extend_metric

    G = extend_metric(s, c).matrix
    return ConnectionCoeffs(
        ctx=FrameContext.from_structure(s),
        gamma=tuple(tuple(tuple(row) for row in g_i) for g_i in gamma),
        metric=G,
        eta_values=None,
        provenance="closed_form",
    )


def eta_frame_values(eta: KForm, ctx: FrameContext) -> tuple[Expr, ...]:
    if eta.degree != 1:
        raise SymExprError("Weyl one-form must have degree 1")
    vals = []
    for f in ctx.fields:
        acc = ctx.chart.zero
        for (a,), val in eta.comps.items():
            acc = acc + val * f.coeffs[a]
        vals.append(simplify(acc))
    return tuple(vals)


def weyl_connection_general(
    ctx: FrameContext,
    metric: Sequence[Sequence[Expr]],
    eta: KForm,
) -> ConnectionCoeffs:
    """Torsion-free connection with nabla G = eta (x) G:

    nabla_X Y = nabla^LC_X Y - (eta(X) Y + eta(Y) X - G(X, Y) eta_sharp) / 2.
    """
    lc = levi_civita_general(ctx, metric)
    d = ctx.dim
    G = _metric_matrix(metric)
    Ginv = invert_matrix([list(row) for row in G], ctx.plan)
    eta_vals = eta_frame_values(eta, ctx)
    eta_sharp = []
    for k in range(d):
        acc = ctx.chart.zero
        for l in range(d):
            acc = acc + Ginv[k][l] * eta_vals[l]
        eta_sharp.append(simplify(acc))
    gamma = []
    for i in range(d):
        g_i = []
        for j in range(d):
            row = []
            for k in range(d):
                val = lc.gamma[i][j][k]
                if k == j:
                    val = val - eta_vals[i] / 2
                if k == i:
                    val = val - eta_vals[j] / 2
                val = val + G[i][j] * eta_sharp[k] / 2
                row.append(simplify(val))
            g_i.append(tuple(row))
        gamma.append(tuple(g_i))
    return ConnectionCoeffs(
        ctx=ctx,
        gamma=tuple(gamma),
        metric=G,
        eta_values=eta_vals,
        provenance="weyl",
    )


def weyl_connection(g: FrameMetric, eta: KForm, s: SubPRStructure) -> ConnectionCoeffs:
    return weyl_connection_general(FrameContext.from_structure(s), g.matrix, eta)


@dataclass(frozen=True)
class VerificationReport:
    """Per-component verdicts for metric compatibility and torsion."""

    compatibility: dict
    torsion: dict

    @property
    def all_zero(self) -> bool:
        return all(v.is_zero for v in self.compatibility.values()) and all(
            v.is_zero for v in self.torsion.values()
        )

    def worst(self) -> ZeroVerdict | None:
        bad = [
            v
            for v in list(self.compatibility.values()) + list(self.torsion.values())
            if not v.is_zero
        ]
        if not bad:
            return None
        return max(bad, key=lambda v: v.max_abs or 0.0)


def verify_connection(
    nabla: ConnectionCoeffs,
    metric: Sequence[Sequence[Expr]] | None = None,
    eta_values: Sequence[Expr] | None = None,
) -> VerificationReport:
    """Check (nabla_i G)(j,k) = eta_i G_jk and T(E_i, E_j) = 0 symbolically."""
    ctx = nabla.ctx
    d = ctx.dim
    G = _metric_matrix(metric) if metric is not None else nabla.metric
    if eta_values is None:
        eta_values = nabla.eta_values or tuple(ctx.chart.zero for _ in range(d))
    compat = {}
    for i in range(d):
        for j in range(d):
            for k in range(j, d):
                acc = ctx.apply(i, G[j][k])
                for m in range(d):
                    acc = acc - nabla.gamma[i][j][m] * G[m][k]
                    acc = acc - nabla.gamma[i][k][m] * G[j][m]
                acc = acc - eta_values[i] * G[j][k]
                compat[(i, j, k)] = is_zero(acc, ctx.plan)
    torsion = {}
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(d):
                acc = nabla.gamma[i][j][k] - nabla.gamma[j][i][k] - ctx.cfun(i, j, k)
                torsion[(i, j, k)] = is_zero(acc, ctx.plan)
    return VerificationReport(compatibility=compat, torsion=torsion)


def covariant_derivative(
    nabla: ConnectionCoeffs,
    tensor: Sequence[Sequence[Expr]],
    kind: str,
    direction: int,
) -> list[list[Expr]]:
    """Frame covariant derivative of a (0,1) vector, (0,2) or (1,1) matrix."""
    ctx = nabla.ctx
    d = ctx.dim
    i = direction
    out = []
    if kind == "0,1":
        flat = []
        for j in range(d):
            acc = ctx.apply(i, tensor[j])
            for m in range(d):
                acc = acc - nabla.gamma[i][j][m] * tensor[m]
            flat.append(simplify(acc))
        return flat
    if kind == "0,2":
        for j in range(d):
            row = []
            for k in range(d):
                acc = ctx.apply(i, tensor[j][k])
                for m in range(d):
                    acc = acc - nabla.gamma[i][j][m] * tensor[m][k]
                    acc = acc - nabla.gamma[i][k][m] * tensor[j][m]
                row.append(simplify(acc))
            out.append(row)
        return out
    if kind == "1,1":
        for j in range(d):
            row = []
            for k in range(d):
                acc = ctx.apply(i, tensor[j][k])
                for m in range(d):
                    acc = acc + nabla.gamma[i][m][j] * tensor[m][k]
                    acc = acc - nabla.gamma[i][k][m] * tensor[j][m]
                row.append(simplify(acc))
            out.append(row)
        return out
    raise SymExprError("tensor kind must be '0,2' or '1,1'")
