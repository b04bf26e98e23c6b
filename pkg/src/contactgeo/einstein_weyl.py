"""Einstein-Weyl residuals, canonical deformation pairs, the coordinate
Berger-type family, and the symmetric-case quotient/lift machinery."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import sympy as sp

from .calculus import (
    KForm,
    VectorField,
    evaluate_form,
    expand_in_frame,
    exterior_derivative,
    lie_bracket,
    wedge_power,
)
from .connection import (
    FrameContext,
    weyl_connection_general,
)
from .curvature import ricci, riemann
from .structure import (
    SubPRStructure,
    build_structure,
    extend_metric,
    h_invariant,
    kappa_dim3,
)
from .symexpr import (
    Chart,
    Expr,
    SamplingPlan,
    SymExprError,
    ZeroVerdict,
    differentiate,
    is_zero,
    simplify,
)

__all__ = [
    "WeylPair",
    "EWVerdict",
    "PredictedC",
    "QuotientData",
    "canonical_pair",
    "ew_residual",
    "predicted_deformation_c",
    "deformation_ricci_check",
    "coordinate_family",
    "lift_structure",
    "gauss_curvature",
    "symmetric_case_check",
]


@dataclass(frozen=True)
class WeylPair:
    """A metric together with the one-form of the Weyl compatibility law."""

    ctx: FrameContext
    metric: tuple
    eta: KForm
    provenance: str
    epsilon: Fraction | None = None
    c: Expr | None = None
    structure: SubPRStructure | None = None


@dataclass(frozen=True)
class EWVerdict:
    """Residual verdicts of Ric_sym = (1/3) R_G G, entry by entry."""

    residual: dict
    is_einstein_weyl: bool
    ric_sym: tuple
    scalar: Expr
    predicted_c: "PredictedC | None" = None

    def worst(self) -> ZeroVerdict | None:
        bad = [v for v in self.residual.values() if not v.is_zero]
        if not bad:
            return None
        return max(bad, key=lambda v: v.max_abs or 0.0)


def canonical_pair(s: SubPRStructure, c, epsilon) -> WeylPair:
    """The deformation pair (G^c, 2 eps c alpha); eps is a rational constant."""
    epsilon = Fraction(epsilon)
    if not isinstance(c, Expr):
        c = s.chart.constant(c)
    metric = extend_metric(s, c).matrix
    coeff = c * Fraction(2) * epsilon
    eta = s.alpha.scale(coeff)
    return WeylPair(
        ctx=FrameContext.from_structure(s),
        metric=metric,
        eta=eta,
        provenance="canonical",
        epsilon=epsilon,
        c=c,
        structure=s,
    )


def ew_residual(pair: WeylPair) -> EWVerdict:
    """Build the Weyl connection of the pair and test the conformal Einstein
    equation Ric_sym - (1/3) R_G G = 0 entrywise."""
    ctx = pair.ctx
    nabla = weyl_connection_general(ctx, pair.metric, pair.eta)
    curv = riemann(nabla)
    _, ric_sym, scalar = ricci(curv)
    d = ctx.dim
    residual = {}
    for i in range(d):
        for j in range(i, d):
            expr = simplify(ric_sym[i][j] - scalar * pair.metric[i][j] / 3)
            residual[(i, j)] = is_zero(expr, ctx.plan)
    return EWVerdict(
        residual=residual,
        is_einstein_weyl=all(v.is_zero for v in residual.values()),
        ric_sym=tuple(tuple(row) for row in ric_sym),
        scalar=scalar,
    )


@dataclass(frozen=True)
class PredictedC:
    """Solvability of the deformation Einstein equation for a given epsilon."""

    kind: str  # "value" | "any_nonzero_c" | "no_solution"
    c: Expr | None
    reason: str


def _require_symmetric_constant_kappa(s: SubPRStructure):
    if s.dim != 3:
        raise SymExprError("deformation analysis is specific to dimension 3")
    h = h_invariant(s)
    if not h.is_zero_matrix(s.plan):
        raise SymExprError("deformation analysis requires h = 0")
    kappa = kappa_dim3(s)
    for name in s.chart.names:
        if not is_zero(differentiate(kappa, name), s.plan).is_zero:
            raise SymExprError("deformation analysis requires constant kappa")
    return kappa


def predicted_deformation_c(s: SubPRStructure, epsilon) -> PredictedC:
    """The unique c making (G^c, 2 eps c alpha) Einstein-Weyl, when it exists:
    c = kappa / (1 + eps^2) in the Riemannian signature and
    c = kappa / (1 - eps^2) in the Lorentzian one (eps^2 != 1)."""
    epsilon = Fraction(epsilon)
    kappa = _require_symmetric_constant_kappa(s)
    lorentzian = s.is_lorentzian()
    eps2 = epsilon * epsilon
    kappa_zero = is_zero(kappa, s.plan).is_zero
    if kappa_zero:
        if lorentzian and eps2 == 1:
            return PredictedC(
                kind="any_nonzero_c",
                c=None,
                reason="kappa = 0, Lorentzian, eps^2 = 1: every nonzero c works",
            )
        return PredictedC(
            kind="no_solution",
            c=None,
            reason="kappa = 0 admits Einstein-Weyl pairs only in the Lorentzian "
            "signature with eps^2 = 1",
        )
    if lorentzian:
        if eps2 == 1:
            return PredictedC(
                kind="no_solution",
                c=None,
                reason="kappa != 0 Lorentzian requires eps^2 != 1",
            )
        c = simplify(kappa / (1 - eps2))
        return PredictedC(kind="value", c=c, reason="c = kappa / (1 - eps^2)")
    c = simplify(kappa / (1 + eps2))
    return PredictedC(kind="value", c=c, reason="c = kappa / (1 + eps^2)")


def deformation_ricci_check(s: SubPRStructure, c, epsilon) -> dict:
    """Compare the symmetric Ricci of the deformation connection against the
    closed diagonal matrices of the symmetric case."""
    epsilon = Fraction(epsilon)
    if not isinstance(c, Expr):
        c = s.chart.constant(c)
    kappa = _require_symmetric_constant_kappa(s)
    pair = canonical_pair(s, c, epsilon)
    verdict = ew_residual(pair)
    eps2 = Fraction(epsilon * epsilon)
    if s.is_lorentzian():
        expected = [
            kappa - c / 2 + c * eps2,
            -kappa + c / 2 - c * eps2,
            -c * c / 2,
        ]
    else:
        expected = [
            kappa - c / 2 - c * eps2,
            kappa - c / 2 - c * eps2,
            c * c / 2,
        ]
    out = {}
    for i in range(3):
        for j in range(i, 3):
            want = expected[i] if i == j else s.chart.zero
            out[(i, j)] = is_zero(verdict.ric_sym[i][j] - want, s.plan)
    return out


def coordinate_family(epsilon, plan: SamplingPlan | None = None) -> WeylPair:
    """The printed Lorentzian coordinate family
    G_eps = -(dx - x dy)^2 + dy^2 + (dz - x dy)^2 / (1 - eps^2),
    eta_eps = 2 eps (dz - x dy) / (1 - eps^2), taken literally."""
    epsilon = Fraction(epsilon)
    if epsilon * epsilon == 1:
        raise SymExprError("the coordinate family requires eps^2 != 1")
    plan = plan or SamplingPlan()
    chart = Chart(("x", "y", "z"))
    lam = chart.constant(Fraction(1) / (1 - epsilon * epsilon))
    x = chart.coord("x")
    # Coframe legs: (dx - x dy), dy, (dz - x dy) as coordinate covectors.
    theta1 = (chart.one, -x, chart.zero)
    theta2 = (chart.zero, chart.one, chart.zero)
    theta0 = (chart.zero, -x, chart.one)
    d = 3
    rows = []
    for a in range(d):
        row = []
        for b in range(d):
            val = -theta1[a] * theta1[b] + theta2[a] * theta2[b] + lam * theta0[a] * theta0[b]
            row.append(simplify(val))
        rows.append(tuple(row))
    eta = KForm.build(
        chart,
        1,
        {(a,): simplify(theta0[a] * lam * 2 * epsilon) for a in range(d)},
    )
    return WeylPair(
        ctx=FrameContext.coordinate(chart, plan),
        metric=tuple(rows),
        eta=eta,
        provenance="coordinate_family",
        epsilon=epsilon,
        c=None,
        structure=None,
    )


@dataclass(frozen=True)
class QuotientData:
    """A base metric with symplectic potential and its contact lift."""

    base_chart: Chart
    base_frame: tuple
    signature: tuple
    theta: KForm
    omega_tilde: KForm
    lifted: SubPRStructure
    verdicts: dict


def lift_structure(
    base_chart: Chart,
    base_frame: Sequence[VectorField],
    signature: Sequence[int],
    theta: KForm,
    omega_tilde: KForm | None = None,
    z_name: str = "z",
    z_interval: tuple[float, float] = (-1.0, 1.0),
    plan: SamplingPlan | None = None,
) -> QuotientData:
    """Lift an even-dimensional metric with potential one-form theta to a
    contact structure on the chart extended by a fibre coordinate:
    alpha = dz - theta, X_i = lift of the base frame tangent to ker alpha.

    Requires d theta = omega_tilde (the volume coframe of the oriented base
    frame when omega_tilde is omitted) and a nondegenerate omega_tilde."""
    plan = plan or SamplingPlan()
    m = base_chart.dim
    if m % 2 != 0:
        raise SymExprError("base chart dimension must be even")
    n = m // 2
    if omega_tilde is None:
        if n != 1:
            raise SymExprError("omega_tilde must be supplied for base dim > 2")
        # Volume coframe of the oriented base frame: unique 2-form with
        # omega(X1, X2) = 1.
        dtheta = exterior_derivative(theta)
        omega_tilde = dtheta
    verdicts = {}
    dtheta = exterior_derivative(theta)
    diff = dtheta - omega_tilde
    for idx in set(dtheta.comps) | set(omega_tilde.comps):
        verdicts[("dtheta_matches", idx)] = is_zero(diff.component(idx), plan)
    if not all(v.is_zero for k, v in verdicts.items() if k[0] == "dtheta_matches"):
        raise SymExprError("d theta does not match the prescribed omega_tilde")
    vol = evaluate_form(
        wedge_power(omega_tilde, n) if n > 1 else omega_tilde, list(base_frame)
    )
    if is_zero(vol, plan).is_zero:
        raise SymExprError("omega_tilde is degenerate on the base frame")

    if z_name in base_chart.names:
        raise SymExprError(f"fibre coordinate {z_name!r} collides with the base chart")
    lifted_chart = Chart(
        base_chart.names + (z_name,),
        base_chart.sample_domain + (z_interval,),
        (),
    )
    if base_chart.excluded_loci:
        lifted_chart = Chart(
            lifted_chart.names,
            lifted_chart.sample_domain,
            tuple(Expr(lifted_chart, e.sym) for e in base_chart.excluded_loci),
        )
    lifted_frame = []
    for f in base_frame:
        theta_f = base_chart.zero
        for (a,), val in theta.comps.items():
            theta_f = theta_f + val * f.coeffs[a]
        comps = [Expr(lifted_chart, c.sym) for c in f.coeffs]
        comps.append(Expr(lifted_chart, simplify(theta_f).sym))
        lifted_frame.append(VectorField(lifted_chart, tuple(comps)))
    lifted = build_structure(lifted_chart, lifted_frame, signature, plan)

    reeb = lifted.reeb_index
    for i in range(m):
        for k in range(m):
            verdicts[("reeb_bracket", i + 1, k + 1)] = is_zero(
                lifted.c(reeb, i, k), plan
            )
    flags = symmetric_case_check(lifted)
    verdicts[("h_zero",)] = _all_verdict(flags["h"], lifted.plan)
    verdicts[("lie_omega_zero",)] = _all_verdict(flags["lie_omega"], lifted.plan)
    return QuotientData(
        base_chart=base_chart,
        base_frame=tuple(base_frame),
        signature=tuple(signature),
        theta=theta,
        omega_tilde=omega_tilde,
        lifted=lifted,
        verdicts=verdicts,
    )


def _all_verdict(verdicts: dict, plan) -> ZeroVerdict:
    bad = [v for v in verdicts.values() if not v.is_zero]
    if bad:
        return bad[0]
    return ZeroVerdict(kind="symbolic_zero")


def gauss_curvature(
    base_chart: Chart,
    base_frame: Sequence[VectorField],
    signature: Sequence[int],
    plan: SamplingPlan | None = None,
) -> Expr:
    """Gauss curvature of a 2-dimensional metric given by an orthonormal
    frame, in terms of the frame structural functions."""
    plan = plan or SamplingPlan()
    if base_chart.dim != 2 or len(base_frame) != 2:
        raise SymExprError("gauss_curvature expects a 2-dimensional frame")
    signature = tuple(int(s) for s in signature)
    if signature not in ((1, 1), (-1, 1)):
        raise SymExprError("signature must be (+,+) or (-,+)")
    br = lie_bracket(base_frame[0], base_frame[1])
    c1, c2 = expand_in_frame(br, list(base_frame), plan)
    x1, x2 = base_frame
    if signature == (1, 1):
        val = x1.apply(c2) - x2.apply(c1) - c1 * c1 - c2 * c2
    else:
        val = x1.apply(c2) + x2.apply(c1) + c1 * c1 - c2 * c2
    return simplify(val)


def symmetric_case_check(s: SubPRStructure) -> dict:
    """Verdicts for h = 0 and L_X0 omega = 0, plus the dim-3 flatness flag."""
    h = h_invariant(s)
    m = len(s.frame)
    reeb = s.reeb_index
    h_verdicts = {}
    for i in range(m):
        for j in range(i, m):
            h_verdicts[(i + 1, j + 1)] = is_zero(h.h[i][j], s.plan)
    lie_omega = {}
    for i in range(m):
        for j in range(i + 1, m):
            acc = s.x0.apply(s.omega[i][j])
            for k in range(m):
                acc = acc - s.c(reeb, i, k) * s.omega[k][j]
                acc = acc - s.c(reeb, j, k) * s.omega[i][k]
            lie_omega[(i + 1, j + 1)] = is_zero(acc, s.plan)
    out = {
        "h": h_verdicts,
        "lie_omega": lie_omega,
        "h_zero": all(v.is_zero for v in h_verdicts.values()),
        "lie_omega_zero": all(v.is_zero for v in lie_omega.values()),
    }
    if s.dim == 3:
        kappa = kappa_dim3(s)
        kappa_zero = is_zero(kappa, s.plan).is_zero
        out["flat"] = out["h_zero"] and kappa_zero
    return out
