"""Finite and infinitesimal isometry verification, Heisenberg translation and
structure-group families in dimension 5, isometry-algebra rank counts, and
the metric/symplectic compatibility data (complex structure, frequencies)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy as sp

from .calculus import (
    PointMap,
    VectorField,
    expand_in_frame,
    lie_bracket,
    pullback_form,
    pullback_metric,
    pushforward,
)
from .structure import SubPRStructure, extend_metric
from .symexpr import (
    Chart,
    Expr,
    SymExprError,
    ZeroVerdict,
    differentiate,
    eval_at,
    is_zero,
    simplify,
)

__all__ = [
    "IsometryVerdict",
    "FrequencyData",
    "InverseCheckError",
    "is_isometry",
    "alpha_reeb_consequence",
    "is_infinitesimal_isometry",
    "bch_left_translation",
    "bch_product",
    "appendix_family",
    "structure_group_algebra",
    "heisenberg_isometry_generators",
    "algebra_dimension",
    "compatibility_and_frequencies",
]


class InverseCheckError(SymExprError):
    """The supplied inverse does not invert the candidate map."""


@dataclass(frozen=True)
class IsometryVerdict:
    """Condition-by-condition verdicts for a candidate isometry."""

    preserves_distribution: dict
    frame_transition: tuple
    metric_preserved: dict
    lambda_value: Expr
    lambda_is_one: ZeroVerdict
    reeb_preserved: dict
    alpha_scaling: dict

    @property
    def passed(self) -> bool:
        return (
            all(v.is_zero for v in self.preserves_distribution.values())
            and all(v.is_zero for v in self.metric_preserved.values())
            and self.lambda_is_one.is_zero
            and all(v.is_zero for v in self.reeb_preserved.values())
            and all(v.is_zero for v in self.alpha_scaling.values())
        )

    def failures(self) -> list[str]:
        out = []
        for name, table in (
            ("distribution", self.preserves_distribution),
            ("metric", self.metric_preserved),
            ("reeb", self.reeb_preserved),
            ("alpha_scaling", self.alpha_scaling),
        ):
            for key, v in table.items():
                if not v.is_zero:
                    out.append(f"{name}{key}: {v.describe()}")
        if not self.lambda_is_one.is_zero:
            out.append(f"lambda != 1: {self.lambda_is_one.describe()}")
        return out


def is_isometry(f: PointMap, f_inverse: PointMap, s: SubPRStructure) -> IsometryVerdict:
    """Check distribution preservation, orthogonality of the frame transition,
    the contact-form scaling lambda, and Reeb preservation for a candidate."""
    if f_inverse is None:
        raise InverseCheckError("candidate map has no inverse supplied")
    for composed in (f.compose(f_inverse), f_inverse.compose(f)):
        if not composed.is_identity(s.plan):
            raise InverseCheckError("f and f_inverse do not compose to the identity")
    m = len(s.frame)
    fields = list(s.fields)
    coeffs_rows = []
    preserves = {}
    for i in range(m):
        pushed = pushforward(f, s.frame[i], f_inverse)
        coeffs = expand_in_frame(pushed, fields, s.plan)
        coeffs_rows.append(coeffs)
        preserves[(i + 1,)] = is_zero(coeffs[s.reeb_index], s.plan)
    transition = tuple(tuple(coeffs_rows[i][j] for j in range(m)) for i in range(m))
    metric = {}
    for i in range(m):
        for j in range(i, m):
            acc = s.chart.zero
            for k in range(m):
                acc = acc + transition[i][k] * transition[j][k] * s.s(k)
            want = s.s(i) if i == j else 0
            metric[(i + 1, j + 1)] = is_zero(acc - want, s.plan)
    pulled = pullback_form(f, s.alpha)
    lam = s.chart.zero
    for (a,), val in pulled.comps.items():
        lam = lam + val * s.x0.coeffs[a]
    lam = simplify(lam)
    scaling = {}
    diff = pulled - s.alpha.scale(lam)
    for a in range(s.dim):
        scaling[(a,)] = is_zero(diff.component((a,)), s.plan)
    lam_is_one = is_zero(lam - 1, s.plan)
    pushed_x0 = pushforward(f, s.x0, f_inverse)
    reeb = {
        (a,): is_zero(pushed_x0.coeffs[a] - s.x0.coeffs[a], s.plan)
        for a in range(s.dim)
    }
    return IsometryVerdict(
        preserves_distribution=preserves,
        frame_transition=transition,
        metric_preserved=metric,
        lambda_value=lam,
        lambda_is_one=lam_is_one,
        reeb_preserved=reeb,
        alpha_scaling=scaling,
    )


def alpha_reeb_consequence(
    f: PointMap, f_inverse: PointMap, s: SubPRStructure
) -> dict:
    """For a passing isometry: lambda = 1, the Reeb field is preserved, and
    the unit extension metric is preserved under pullback."""
    verdict = is_isometry(f, f_inverse, s)
    out = {
        "lambda_is_one": verdict.lambda_is_one,
        "reeb_preserved": verdict.reeb_preserved,
        "isometry_passed": verdict.passed,
    }
    g1 = extend_metric(s, s.chart.one).coordinate_matrix()
    pulled = pullback_metric(f, g1)
    ext = {}
    for a in range(s.dim):
        for b in range(a, s.dim):
            ext[(a, b)] = is_zero(pulled[a][b] - g1[a][b], s.plan)
    out["extension_metric_preserved"] = ext
    return out


def is_infinitesimal_isometry(v: VectorField, s: SubPRStructure) -> dict:
    """Flow-level checks: alpha([V, X_i]) = 0 and L_V g = 0 on frame pairs."""
    m = len(s.frame)
    coeffs = []
    distribution = {}
    for i in range(m):
        br = lie_bracket(v, s.frame[i])
        c = expand_in_frame(br, list(s.fields), s.plan)
        coeffs.append(c)
        distribution[(i + 1,)] = is_zero(c[s.reeb_index], s.plan)
    metric = {}
    for i in range(m):
        for j in range(i, m):
            acc = coeffs[i][j] * s.s(j) + coeffs[j][i] * s.s(i)
            metric[(i + 1, j + 1)] = is_zero(acc, s.plan)
    passed = all(v2.is_zero for v2 in distribution.values()) and all(
        v2.is_zero for v2 in metric.values()
    )
    return {"distribution": distribution, "metric": metric, "passed": passed}


# --------------------------------------------------------------------------
# Dimension-5 Heisenberg model maps.
# --------------------------------------------------------------------------

_H5 = ("x1", "y1", "x2", "y2", "z")


def _check_h5(chart: Chart):
    if chart.names != _H5:
        raise SymExprError(f"expected the dimension-5 chart {_H5}")


def bch_product(t: Sequence[Fraction], u: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Group product of translation parameters in exponential coordinates."""
    t = [Fraction(a) for a in t]
    u = [Fraction(a) for a in u]
    z = t[4] + u[4] + Fraction(1, 2) * (t[0] * u[1] - t[1] * u[0] + t[2] * u[3] - t[3] * u[2])
    return (t[0] + u[0], t[1] + u[1], t[2] + u[2], t[3] + u[3], z)


def bch_left_translation(
    t: Sequence, chart: Chart
) -> tuple[PointMap, PointMap]:
    """Left translation by t in exponential coordinates, with its inverse
    (translation by the group inverse -t):

    q -> (x1+t1, y1+t2, x2+t3, y2+t4,
          z + t5 + (t1 y1 - t2 x1 + t3 y2 - t4 x2)/2).
    """
    _check_h5(chart)
    t = [Fraction(a) for a in t]

    def build(params):
        t1, t2, t3, t4, t5 = (chart.constant(a) for a in params)
        x1, y1, x2, y2, z = (chart.coord(n) for n in _H5)
        zc = z + t5 + (t1 * y1 - t2 * x1 + t3 * y2 - t4 * x2) / 2
        return PointMap(chart, (x1 + t1, y1 + t2, x2 + t3, y2 + t4, simplify(zc)))

    inverse_params = [-a for a in t]
    return build(t), build(inverse_params)


def _linear_map(chart: Chart, matrix: sp.Matrix) -> PointMap:
    """(sigma(x1, y1, x2, y2), z) for a 4x4 linear part sigma."""
    comps = []
    for a in range(4):
        acc = sp.Integer(0)
        for b in range(4):
            acc = acc + matrix[a, b] * chart.symbol(_H5[b])
        comps.append(Expr(chart, acc))
    comps.append(chart.coord("z"))
    return PointMap(chart, tuple(comps))


def _rot(c, s):
    return sp.Matrix([[c, -s], [s, c]])


def _boost(ch, sh):
    return sp.Matrix([[ch, sh], [sh, ch]])


def _block(top_left, bottom_right):
    return sp.Matrix(sp.BlockDiagMatrix(top_left, bottom_right))


def _swap_compose(block_mat):
    """block_mat acting after the block swap (x1,y1) <-> (x2,y2)."""
    swap = sp.Matrix([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]])
    return block_mat * swap


_I2 = sp.eye(2)


def _family_lines(case: int, c, s, ch, sh):
    """Printed appendix lines per case; each entry is
    (label, linear matrix or None, inverse builder key)."""
    if case == 1:
        return {
            1: _swap_compose(_block(_rot(c, s), _I2)),
            2: _block(_rot(c, s), _I2),
            3: _block(_I2, _rot(c, s)),
            # Printed line 4 repeats x2/y2 in the last two slots; it is kept
            # verbatim (singular for every theta) next to the corrected form.
            "4-printed": sp.Matrix(
                [[0, 0, 1, 0], [0, 0, 0, 1], [c, -s, 0, 0], [0, 0, s, c]]
            ),
            "4-corrected": _swap_compose(_block(_I2, _rot(c, s))),
        }
    if case == 2:
        return {
            1: _block(_boost(ch, sh), _I2),
            2: _block(_I2, _rot(c, s)),
        }
    if case == 3:
        return {
            1: _block(_boost(ch, sh), _I2),
            2: _block(_I2, _boost(ch, sh)),
            3: _swap_compose(_block(_boost(ch, sh), _I2)),
            4: _swap_compose(_block(_I2, _boost(ch, sh))),
        }
    raise SymExprError("case must be 1, 2 or 3")


_CASE_SIGNATURES = {
    1: (1, 1, 1, 1),
    2: (-1, 1, 1, 1),
    3: (-1, 1, -1, 1),
}

# Inverse of each family line is another line at -theta.
_INVERSE_LINE = {
    (1, 1): "4-corrected",
    (1, 2): 2,
    (1, 3): 3,
    (1, "4-corrected"): 1,
    (2, 1): 1,
    (2, 2): 2,
    (3, 1): 1,
    (3, 2): 2,
    (3, 3): 4,
    (3, 4): 3,
}


def _trig(chart: Chart, theta) -> tuple:
    if isinstance(theta, Expr):
        t = theta
    else:
        t = chart.constant(Fraction(theta))
    return (
        Expr(chart, sp.cos(t.sym)).sym,
        Expr(chart, sp.sin(t.sym)).sym,
        Expr(chart, sp.cosh(t.sym)).sym,
        Expr(chart, sp.sinh(t.sym)).sym,
    )


def appendix_family(case: int, index, theta, chart: Chart) -> list[dict]:
    """Structure-group family member(s) for the given case and line index.

    Returns one entry per variant: the printed map always, plus the natural
    correction when the printed line is internally inconsistent.  Each entry
    carries the map and its inverse (None when the printed map is singular).
    """
    _check_h5(chart)
    c, s, ch, sh = _trig(chart, theta)
    cm, sm, chm, shm = _trig(chart, -theta)
    lines = _family_lines(case, c, s, ch, sh)
    lines_neg = _family_lines(case, cm, sm, chm, shm)
    out = []
    if case == 1 and index == 4:
        printed = lines["4-printed"]
        out.append(
            {
                "label": "printed",
                "map": _linear_map(chart, printed),
                "inverse": None,
                "note": "printed line 4 is singular for every theta",
            }
        )
        corrected = lines["4-corrected"]
        inv = lines_neg[_INVERSE_LINE[(1, "4-corrected")]]
        out.append(
            {
                "label": "corrected",
                "map": _linear_map(chart, corrected),
                "inverse": _linear_map(chart, inv),
                "note": "fourth component read as the rotated (x1, y1) pair",
            }
        )
        return out
    if index not in lines:
        raise SymExprError(f"case {case} has no family line {index}")
    mat = lines[index]
    inv_key = _INVERSE_LINE[(case, index)]
    inv = lines_neg[inv_key]
    out.append(
        {
            "label": "printed",
            "map": _linear_map(chart, mat),
            "inverse": _linear_map(chart, inv),
            "note": "",
        }
    )
    return out


def family_signature(case: int) -> tuple[int, ...]:
    return _CASE_SIGNATURES[case]


# --------------------------------------------------------------------------
# Isometry algebra: translations plus the structure-group algebra, solved
# exactly as the matrices N with N^T g + g N = 0 and N^T W + W N = 0.
# --------------------------------------------------------------------------


def _rational_nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of the nullspace of a rational matrix, deterministic order."""
    mat = [row[:] for row in rows]
    nrows = len(mat)
    pivot_cols = []
    r = 0
    for col in range(ncols):
        piv = None
        for rr in range(r, nrows):
            if mat[rr][col] != 0:
                piv = rr
                break
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        scale = mat[r][col]
        mat[r] = [x / scale for x in mat[r]]
        for rr in range(nrows):
            if rr != r and mat[rr][col] != 0:
                factor = mat[rr][col]
                mat[rr] = [a - factor * b for a, b in zip(mat[rr], mat[r])]
        pivot_cols.append(col)
        r += 1
    free_cols = [c for c in range(ncols) if c not in pivot_cols]
    basis = []
    for fc in free_cols:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for rr, pc in enumerate(pivot_cols):
            vec[pc] = -mat[rr][fc]
        basis.append(vec)
    return basis


def structure_group_algebra(signature: Sequence[int]) -> list[list[list[Fraction]]]:
    """Basis of the matrices preserving both the frame metric diag(signature)
    and the model symplectic pairing on (x1, y1, ..., xn, yn)."""
    m = len(signature)
    if m % 2 != 0:
        raise SymExprError("signature length must be even")
    g = [[Fraction(signature[a]) if a == b else Fraction(0) for b in range(m)] for a in range(m)]
    w = [[Fraction(0)] * m for _ in range(m)]
    for i in range(0, m, 2):
        w[i][i + 1] = Fraction(1)
        w[i + 1][i] = Fraction(-1)
    rows = []
    # Unknowns N[a][b] flattened row-major; conditions are the symmetric part
    # of N^T g + g N and the symmetric-in-the-w-sense part of N^T w + w N.
    for bilinear in (g, w):
        for a in range(m):
            for b in range(m):
                row = [Fraction(0)] * (m * m)
                for k in range(m):
                    row[k * m + a] += bilinear[k][b]
                    row[k * m + b] += bilinear[a][k]
                rows.append(row)
    basis = _rational_nullspace(rows, m * m)
    return [
        [[vec[a * m + b] for b in range(m)] for a in range(m)] for vec in basis
    ]


def heisenberg_isometry_generators(s: SubPRStructure) -> list[VectorField]:
    """Translation generators plus linear structure-group generators for the
    flat dimension-5 model structures."""
    chart = s.chart
    _check_h5(chart)
    x1, y1, x2, y2, z = (chart.coord(n) for n in _H5)
    zero, one = chart.zero, chart.one
    half = chart.constant(Fraction(1, 2))
    translations = [
        VectorField(chart, (one, zero, zero, zero, y1 * half)),
        VectorField(chart, (zero, one, zero, zero, -x1 * half)),
        VectorField(chart, (zero, zero, one, zero, y2 * half)),
        VectorField(chart, (zero, zero, zero, one, -x2 * half)),
        VectorField(chart, (zero, zero, zero, zero, one)),
    ]
    coords = [x1, y1, x2, y2]
    linear = []
    for mat in structure_group_algebra(s.signature):
        comps = []
        for a in range(4):
            acc = chart.zero
            for b in range(4):
                if mat[a][b] != 0:
                    acc = acc + coords[b] * mat[a][b]
            comps.append(simplify(acc))
        comps.append(zero)
        linear.append(VectorField(chart, tuple(comps)))
    return translations + linear


def algebra_dimension(
    generators: Sequence[VectorField],
    point: dict,
    s: SubPRStructure,
    tolerance: float = 1e-9,
) -> dict:
    """Numeric rank of the 1-jets of verified infinitesimal isometries at a
    point, with the dimension bound (n+1)^2 for the isometry algebra."""
    reports = []
    for v in generators:
        rep = is_infinitesimal_isometry(v, s)
        if not rep["passed"]:
            raise SymExprError("a supplied generator is not an infinitesimal isometry")
        reports.append(rep)
    d = s.dim
    jets = []
    for v in generators:
        row = []
        for a in range(d):
            row.append(eval_at(v.coeffs[a], point))
        for a in range(d):
            for name in s.chart.names:
                row.append(eval_at(differentiate(v.coeffs[a], name), point))
        jets.append(row)
    mat = np.array(jets, dtype=float)
    svals = np.linalg.svd(mat, compute_uv=False)
    scale = svals[0] if len(svals) and svals[0] > 0 else 1.0
    rank = int(np.sum(svals > tolerance * max(1.0, scale)))
    n = s.n
    bound = (n + 1) ** 2
    return {
        "rank": rank,
        "bound": bound,
        "within_bound": rank <= bound,
        "generators": len(generators),
    }


@dataclass(frozen=True)
class FrequencyData:
    """The operator J with omega(X, Y) = g(J X, Y), its compatibility flag,
    and (Riemannian case) the positive spectra of J at sample points."""

    j_matrix: tuple
    compatible: bool | None
    frequencies: tuple | None
    frequencies_constant: bool | None
    block_sizes: tuple | None
    predicted_dim: int | None
    bound: int
    within_bound: bool | None


def compatibility_and_frequencies(
    s: SubPRStructure, point: dict | None = None
) -> FrequencyData:
    """J = g^{-1} omega as an endomorphism of the distribution; fundamental
    frequencies are the positive imaginary parts of its eigenvalues.
    Frequency analysis is restricted to positive-definite g."""
    m = len(s.frame)
    # Column convention: J(X_j) = sum_k jmat[k][j] X_k, from g(J X_j, X_k)
    # = omega(X_j, X_k).
    jmat = [[simplify(s.omega[j][k] * s.s(k)) for j in range(m)] for k in range(m)]
    riemannian = all(x == 1 for x in s.signature)
    compatible: bool | None = None
    if riemannian:
        ok = True
        for k in range(m):
            for j in range(m):
                acc = s.chart.zero
                for mm in range(m):
                    acc = acc + jmat[k][mm] * jmat[mm][j]
                if k == j:
                    acc = acc + 1
                if not is_zero(acc, s.plan).is_zero:
                    ok = False
        compatible = ok
    bound = (s.n + 1) ** 2
    if not riemannian:
        return FrequencyData(
            j_matrix=tuple(tuple(row) for row in jmat),
            compatible=None,
            frequencies=None,
            frequencies_constant=None,
            block_sizes=None,
            predicted_dim=None,
            bound=bound,
            within_bound=None,
        )
    points = s.chart.sample_points(s.plan)
    if point is not None:
        points = [point] + points
    spectra = []
    for pt in points:
        num = np.array(
            [[eval_at(jmat[k][j], pt) for j in range(m)] for k in range(m)],
            dtype=float,
        )
        eig = np.linalg.eigvals(num)
        pos = sorted(float(abs(v.imag)) for v in eig if v.imag > 1e-12)
        spectra.append(tuple(pos))
    base = spectra[0]
    tol = max(s.plan.tolerance, 1e-9)
    constant = all(
        len(sp_) == len(base) and all(abs(a - b) <= tol * (1 + abs(a)) for a, b in zip(sp_, base))
        for sp_ in spectra
    )
    if not constant:
        return FrequencyData(
            j_matrix=tuple(tuple(row) for row in jmat),
            compatible=compatible,
            frequencies=tuple(base),
            frequencies_constant=False,
            block_sizes=None,
            predicted_dim=None,
            bound=bound,
            within_bound=None,
        )
    blocks = []
    for b in base:
        if blocks and abs(blocks[-1][0] - b) <= 1e-7 * (1 + abs(b)):
            blocks[-1][1] += 1
        else:
            blocks.append([b, 1])
    sizes = tuple(size for _, size in blocks)
    predicted = 2 * s.n + 1 + sum(k * k for k in sizes)
    return FrequencyData(
        j_matrix=tuple(tuple(row) for row in jmat),
        compatible=compatible,
        frequencies=tuple(base),
        frequencies_constant=True,
        block_sizes=sizes,
        predicted_dim=predicted,
        bound=bound,
        within_bound=predicted <= bound,
    )
