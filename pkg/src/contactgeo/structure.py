"""Contact data of sub-pseudo-Riemannian structures.

Given an oriented orthonormal frame (X_1, ..., X_2n) of a contact
distribution, builds the normalized annihilating 1-form, the Reeb field, the
skew form on the distribution, all structural functions of the completed
frame, the Lie-derivative invariant h with its endomorphism, the curvature
invariant kappa, and the one-parameter metric extensions.

Index conventions: positions 0..2n-1 are the distribution frame fields,
position 2n (the last) is the Reeb field.  Public kappa accessors take the
1-based distribution indices used in the report output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import sympy as sp

from .calculus import (
    KForm,
    SingularMatrixError,
    VectorField,
    evaluate_form,
    expand_in_frame,
    exterior_derivative,
    invert_matrix,
    lie_bracket,
    solve_linear,
    wedge_power,
)
from .symexpr import (
    Chart,
    Expr,
    SamplingPlan,
    SymExprError,
    ZeroVerdict,
    eval_at,
    exp as expfn,
    is_zero,
    ln,
    simplify,
    sqrt as sqrtfn,
)

__all__ = [
    "SubPRStructure",
    "FrameMetric",
    "HData",
    "ContactConditionError",
    "SignObstructionError",
    "EngineDefectError",
    "build_structure",
    "h_invariant",
    "extend_metric",
    "kappa_dim3",
    "kappa_general",
    "exterior_power_metric",
    "wedge_gram",
    "orientation_flip",
]


class ContactConditionError(SymExprError):
    """The given frame does not span a contact distribution."""


class SignObstructionError(SymExprError):
    """Even-n normalization has no real solution of constant sign."""


class EngineDefectError(SymExprError):
    """An internal cross-check failed; indicates a bug, not bad input."""


def _require(verdict: ZeroVerdict, what: str):
    if not verdict.is_zero:
        raise EngineDefectError(f"{what}: {verdict.describe()}")


@dataclass(frozen=True)
class SubPRStructure:
    """Immutable contact structure with all derived data computed at build time."""

    chart: Chart
    frame: tuple[VectorField, ...]
    signature: tuple[int, ...]
    plan: SamplingPlan
    alpha: KForm
    dalpha: KForm
    x0: VectorField
    omega: tuple[tuple[Expr, ...], ...]
    brackets: dict

    @property
    def n(self) -> int:
        return len(self.frame) // 2

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def reeb_index(self) -> int:
        return len(self.frame)

    @property
    def fields(self) -> tuple[VectorField, ...]:
        return self.frame + (self.x0,)

    def s(self, k: int) -> int:
        return self.signature[k]

    def c(self, i: int, j: int, k: int) -> Expr:
        """Structural function: [E_i, E_j] = sum_k c(i,j,k) E_k."""
        if i == j:
            return self.chart.zero
        if i < j:
            return self.brackets[(i, j)][k]
        return -self.brackets[(j, i)][k]

    def apply_field(self, k: int, f: Expr) -> Expr:
        return self.fields[k].apply(f)

    def is_lorentzian(self) -> bool:
        return any(s < 0 for s in self.signature)


def _annihilator(chart: Chart, frame: Sequence[VectorField]) -> KForm:
    """Cofactor 1-form annihilating all frame fields."""
    d = chart.dim
    rows = [[f.coeffs[a].sym for a in range(d)] for f in frame]
    comps = {}
    for a in range(d):
        cols = [c for c in range(d) if c != a]
        minor = sp.Matrix([[rows[r][c] for c in cols] for r in range(d - 1)])
        val = simplify(Expr(chart, (-1) ** a * minor.det(method="berkowitz")))
        comps[(a,)] = val
    return KForm.build(chart, 1, comps)


def _sample_signs(e: Expr, chart: Chart, plan: SamplingPlan) -> set[int]:
    signs = set()
    for pt in chart.sample_points(plan):
        v = eval_at(e, pt)
        signs.add(1 if v > 0 else (-1 if v < 0 else 0))
    return signs


def _real_nth_root(ratio: Expr, n: int, chart: Chart, plan: SamplingPlan) -> Expr:
    """Real n-th root of constant sign on the sample domain."""
    if n == 1:
        return simplify(ratio)
    signs = _sample_signs(ratio, chart, plan)
    if 0 in signs or len(signs) != 1:
        raise ContactConditionError(
            "normalization factor changes sign on the sample domain"
        )
    sign = signs.pop()
    if sign < 0:
        if n % 2 == 0:
            raise SignObstructionError(
                f"no real {n}-th root: normalization target has the wrong sign"
            )
        return -_real_nth_root(simplify(-ratio), n, chart, plan)
    if n == 2:
        return simplify(sqrtfn(ratio))
    return simplify(expfn(ln(ratio) / n))


def build_structure(
    chart: Chart,
    frame: Sequence[VectorField],
    signature: Sequence[int],
    plan: SamplingPlan | None = None,
) -> SubPRStructure:
    """Normalize the contact form, solve for the Reeb field and expand all
    frame brackets.  The contact condition is verified, not assumed."""
    plan = plan or SamplingPlan()
    frame = tuple(f.simplified() for f in frame)
    signature = tuple(int(s) for s in signature)
    d = chart.dim
    if d % 2 == 0 or d < 3:
        raise SymExprError("structure chart dimension must be odd and >= 3")
    if len(frame) != d - 1:
        raise SymExprError("frame must have 2n fields on a (2n+1)-chart")
    if any(s not in (-1, 1) for s in signature) or len(signature) != d - 1:
        raise SymExprError("signature must list +1/-1 per frame field")
    n = (d - 1) // 2

    alpha0 = _annihilator(chart, frame)
    if not alpha0.comps:
        raise ContactConditionError("frame fields are linearly dependent")
    dalpha0 = exterior_derivative(alpha0)
    v = evaluate_form(wedge_power(dalpha0, n) if n > 1 else dalpha0, list(frame))
    if is_zero(v, plan).is_zero:
        raise ContactConditionError(
            "contact condition fails: the distribution volume (d alpha)^n vanishes"
        )
    # Normalization target under the determinant wedge convention: the n-fold
    # power of the skew form on an orthonormal symplectic-compatible frame
    # evaluates to (-1)^n n!, which pins omega(X_i, X_j) = c_ij^0 exactly.
    target = chart.constant((-1) ** n * math.factorial(n))
    ratio = simplify(target / v)
    f = _real_nth_root(ratio, n, chart, plan)
    alpha = alpha0.scale(f)
    dalpha = exterior_derivative(alpha)

    x0 = _solve_reeb(chart, frame, alpha, dalpha, plan)

    fields = list(frame) + [x0]
    omega_rows = []
    for i in range(2 * n):
        row = []
        for j in range(2 * n):
            row.append(simplify(-evaluate_form(dalpha, [frame[i], frame[j]])))
        omega_rows.append(tuple(row))
    omega = tuple(omega_rows)

    brackets = {}
    for i in range(d):
        for j in range(i + 1, d):
            br = lie_bracket(fields[i], fields[j])
            coeffs = expand_in_frame(br, fields, plan)
            brackets[(i, j)] = tuple(coeffs)

    structure = SubPRStructure(
        chart=chart,
        frame=frame,
        signature=signature,
        plan=plan,
        alpha=alpha,
        dalpha=dalpha,
        x0=x0,
        omega=omega,
        brackets=brackets,
    )
    _validate_structure(structure)
    return structure


def _solve_reeb(
    chart: Chart,
    frame: Sequence[VectorField],
    alpha: KForm,
    dalpha: KForm,
    plan: SamplingPlan,
) -> VectorField:
    """Unique field with d alpha(X0, X_j) = 0 for all j and alpha(X0) = 1."""
    d = chart.dim
    dmat = [[chart.zero for _ in range(d)] for _ in range(d)]
    for (a, b), val in dalpha.comps.items():
        dmat[a][b] = val
        dmat[b][a] = -val
    matrix = []
    rhs = []
    for j in range(d - 1):
        row = []
        for a in range(d):
            acc = chart.zero
            for b in range(d):
                acc = acc + dmat[a][b] * frame[j].coeffs[b]
            row.append(simplify(acc))
        matrix.append(row)
        rhs.append(chart.zero)
    matrix.append([alpha.component((a,)) for a in range(d)])
    rhs.append(chart.one)
    try:
        coords = solve_linear(matrix, rhs, plan)
    except SingularMatrixError as exc:
        raise ContactConditionError(f"Reeb system is singular: {exc}") from exc
    x0 = VectorField(chart, tuple(coords)).simplified()
    # Full-kernel verification: d alpha(X0, d/da) must vanish for every a.
    for a in range(d):
        acc = chart.zero
        for b in range(d):
            acc = acc + dmat[a][b] * x0.coeffs[b]
        _require(is_zero(acc, plan), "Reeb field does not lie in ker(d alpha)")
    acc = chart.zero
    for a in range(d):
        acc = acc + alpha.component((a,)) * x0.coeffs[a]
    _require(is_zero(acc - 1, plan), "alpha(X0) != 1")
    return x0


def _validate_structure(s: SubPRStructure):
    reeb = s.reeb_index
    for i in range(len(s.frame)):
        acc = s.chart.zero
        for a in range(s.dim):
            acc = acc + s.alpha.component((a,)) * s.frame[i].coeffs[a]
        _require(is_zero(acc, s.plan), f"alpha(X_{i + 1}) != 0")
        _require(
            is_zero(s.c(reeb, i, reeb), s.plan),
            f"[X0, X_{i + 1}] has a Reeb component",
        )
    for i in range(len(s.frame)):
        for j in range(i + 1, len(s.frame)):
            diff = s.c(i, j, reeb) - s.omega[i][j]
            _require(
                is_zero(diff, s.plan),
                f"c_({i + 1})({j + 1})^0 != omega(X_{i + 1}, X_{j + 1})",
            )
    if s.n == 1:
        _require(is_zero(s.omega[0][1] - 1, s.plan), "dim-3 normalization c_12^0 != 1")


@dataclass(frozen=True)
class HData:
    """The invariant h, its endomorphism and the endomorphism determinant."""

    h: tuple[tuple[Expr, ...], ...]
    h_sharp: tuple[tuple[Expr, ...], ...]
    det_h_sharp: Expr

    def is_zero_matrix(self, plan: SamplingPlan | None = None) -> bool:
        return all(is_zero(e, plan).is_zero for row in self.h for e in row)


def h_invariant(s: SubPRStructure) -> HData:
    """Half Lie derivative of the frame metric along the Reeb field.

    Computed from the cached structural functions and, independently, from
    freshly expanded Reeb brackets; the two must agree symbolically.
    """
    m = len(s.frame)
    reeb = s.reeb_index
    h_rows = []
    for i in range(m):
        row = []
        for j in range(m):
            val = (s.c(reeb, i, j) * s.s(j) + s.c(reeb, j, i) * s.s(i)) * sp.Rational(-1, 2)
            row.append(simplify(val))
        h_rows.append(tuple(row))

    fresh = []
    for i in range(m):
        br = lie_bracket(s.x0, s.frame[i])
        fresh.append(expand_in_frame(br, list(s.fields), s.plan))
    for i in range(m):
        for j in range(m):
            other = (fresh[i][j] * s.s(j) + fresh[j][i] * s.s(i)) * sp.Rational(-1, 2)
            diff = h_rows[i][j] - other
            _require(
                is_zero(diff, s.plan),
                "h frame formula disagrees with the Lie-derivative route",
            )

    sharp_rows = []
    for i in range(m):
        sharp_rows.append(tuple(simplify(h_rows[i][j] * s.s(i)) for j in range(m)))
    det = simplify(
        Expr(s.chart, sp.Matrix([[e.sym for e in row] for row in sharp_rows]).det())
    )
    return HData(h=tuple(h_rows), h_sharp=tuple(sharp_rows), det_h_sharp=det)


@dataclass(frozen=True)
class FrameMetric:
    """Symmetric (0,2) tensor in the completed frame basis (X_1..X_2n, X_0)."""

    structure: SubPRStructure
    matrix: tuple[tuple[Expr, ...], ...]
    reeb_norm: Expr | None = None

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def entry(self, i: int, j: int) -> Expr:
        return self.matrix[i][j]

    def inverse(self) -> list[list[Expr]]:
        return invert_matrix([list(row) for row in self.matrix], self.structure.plan)

    def coordinate_matrix(self) -> list[list[Expr]]:
        """Same tensor in the coordinate basis."""
        s = self.structure
        d = s.dim
        p = [[s.fields[i].coeffs[a] for a in range(d)] for i in range(d)]
        pinv = invert_matrix(p, s.plan)
        out = []
        for a in range(d):
            row = []
            for b in range(d):
                acc = s.chart.zero
                for i in range(d):
                    for j in range(d):
                        acc = acc + pinv[a][i] * self.matrix[i][j] * pinv[b][j]
                row.append(simplify(acc))
            out.append(row)
        return out


def extend_metric(s: SubPRStructure, c: Expr) -> FrameMetric:
    """Extension of the frame metric with G(X0, X0) = c, G(X0, D) = 0."""
    if not isinstance(c, Expr):
        c = s.chart.constant(c)
    if is_zero(c, s.plan).is_zero:
        raise SymExprError("extension requires a nowhere-zero c")
    d = s.dim
    rows = []
    for i in range(d):
        row = []
        for j in range(d):
            if i != j:
                row.append(s.chart.zero)
            elif i < d - 1:
                row.append(s.chart.constant(s.s(i)))
            else:
                row.append(c)
        rows.append(tuple(row))
    return FrameMetric(structure=s, matrix=tuple(rows), reeb_norm=c)


def kappa_dim3(s: SubPRStructure) -> Expr:
    """The dimension-3 curvature invariant of the structure."""
    if s.dim != 3:
        raise SymExprError("kappa_dim3 requires a 3-dimensional structure")
    if s.signature not in ((1, 1), (-1, 1)):
        raise SymExprError(
            "signature must be (+,+) or (-,+) with the time-like field first"
        )
    reeb = s.reeb_index
    c12_1 = s.c(0, 1, 0)
    c12_2 = s.c(0, 1, 1)
    c01_2 = s.c(reeb, 0, 1)
    c02_1 = s.c(reeb, 1, 0)
    if s.signature == (1, 1):
        val = (
            s.apply_field(0, c12_2)
            - s.apply_field(1, c12_1)
            - c12_1 * c12_1
            - c12_2 * c12_2
            + (c01_2 - c02_1) / 2
        )
    else:
        val = (
            s.apply_field(0, c12_2)
            + s.apply_field(1, c12_1)
            + c12_1 * c12_1
            - c12_2 * c12_2
            + (c01_2 + c02_1) / 2
        )
    return simplify(val)


def kappa_general(s: SubPRStructure, i: int, j: int, cross_check: bool = True) -> Expr:
    """The c-independent part of the distribution sectional curvature on the
    frame pair (X_i, X_j); indices are 1-based distribution indices."""
    m = len(s.frame)
    if not (1 <= i <= m and 1 <= j <= m) or i == j:
        raise SymExprError(f"indices must be distinct in 1..{m}")
    p, q = i - 1, j - 1
    reeb = s.reeb_index
    val = s.apply_field(p, s.c(p, q, q)) * s.s(q) - s.apply_field(q, s.c(p, q, p)) * s.s(p)
    for k in range(m):
        val = val - s.c(p, q, k) ** 2 * s.s(k)
    for k in range(m):
        term = s.c(p, q, k) * s.s(k) + s.c(q, k, p) * s.s(p) - s.c(p, k, q) * s.s(q)
        val = val + term * term / (4 * s.s(k))
    val = val + s.c(p, q, reeb) * (s.c(reeb, p, q) * s.s(q) - s.c(reeb, q, p) * s.s(p)) / 2
    val = simplify(val)
    if cross_check and s.dim == 3:
        diff = val - kappa_dim3(s)
        _require(is_zero(diff, s.plan), "kappa_general disagrees with kappa_dim3")
    return val


def exterior_power_metric(signature: Sequence[int], k: int) -> dict:
    """Gram extension to the k-th exterior power of the orthonormal frame:
    diagonal on increasing multi-indices, value prod of the signs."""
    import itertools

    m = len(signature)
    if k > m:
        raise SymExprError("exterior power degree exceeds frame rank")
    out = {}
    for idx in itertools.combinations(range(m), k):
        prod = 1
        for a in idx:
            prod *= signature[a]
        out[idx] = prod
    return out


def wedge_gram(
    u: Sequence[Expr],
    v: Sequence[Expr],
    w: Sequence[Expr],
    t: Sequence[Expr],
    signature: Sequence[int],
) -> Expr:
    """g(u ^ v, w ^ t) for distribution coefficient vectors (Gram determinant)."""

    def inner(a, b):
        acc = a[0].chart.zero
        for sk, ak, bk in zip(signature, a, b):
            acc = acc + ak * bk * sk
        return acc

    return simplify(inner(u, w) * inner(v, t) - inner(u, t) * inner(v, w))


def orientation_flip(s: SubPRStructure) -> SubPRStructure:
    """Rebuild the structure with the orientation of the distribution reversed
    (first frame field negated); all derived data is recomputed."""
    new_frame = (-s.frame[0],) + s.frame[1:]
    return build_structure(s.chart, new_frame, s.signature, s.plan)
