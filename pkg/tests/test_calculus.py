"""Vector fields, forms, brackets, pullbacks and symbolic solves."""

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from contactgeo.calculus import (
    KForm,
    PointMap,
    SingularMatrixError,
    VectorField,
    coordinate_field,
    evaluate_form,
    expand_in_frame,
    exterior_derivative,
    lie_bracket,
    one_form,
    pullback_form,
    pullback_metric,
    pushforward,
    wedge,
)
from contactgeo.symexpr import Chart, is_zero, parse, simplify


@pytest.fixture()
def heis(chart3):
    x1 = VectorField.from_texts(chart3, ["1", "0", "-y/2"])
    x2 = VectorField.from_texts(chart3, ["0", "1", "x/2"])
    return x1, x2


class TestLieBracket:
    def test_coordinate_fields_commute(self, chart3):
        b = lie_bracket(coordinate_field(chart3, 0), coordinate_field(chart3, 1))
        assert all(c.sym == 0 for c in b.coeffs)

    def test_heisenberg_bracket(self, chart3, heis):
        x1, x2 = heis
        b = lie_bracket(x1, x2)
        assert [c.sym for c in b.coeffs] == [0, 0, 1]

    def test_linear_field_bracket(self, chart3):
        v = VectorField.from_texts(chart3, ["0", "x", "0"])
        w = coordinate_field(chart3, 0)
        b = lie_bracket(v, w)
        assert [c.sym for c in b.coeffs] == [0, -1, 0]


class TestExteriorDerivative:
    def test_contact_form(self, chart3):
        alpha = one_form(
            chart3, [parse("y/2", chart3), parse("-x/2", chart3), chart3.one]
        )
        d = exterior_derivative(alpha)
        assert d.comps == {(0, 1): chart3.constant(-1)}

    def test_x_dy(self, chart3):
        form = one_form(chart3, [chart3.zero, chart3.coord("x"), chart3.zero])
        d = exterior_derivative(form)
        assert d.component((0, 1)).sym == 1

    def test_dd_zero_on_scalar(self, chart3):
        f = parse("x^2*y + sin(z)*x", chart3)
        df = exterior_derivative(KForm.from_scalar(f))
        ddf = exterior_derivative(df)
        assert all(simplify(v).sym == 0 for v in ddf.comps.values())


class TestWedge:
    def test_anticommutative(self, chart3):
        dx = one_form(chart3, [chart3.one, chart3.zero, chart3.zero])
        dy = one_form(chart3, [chart3.zero, chart3.one, chart3.zero])
        assert wedge(dx, dy).comps == wedge(dy, dx).scale(-1).comps

    def test_square_vanishes(self, chart3):
        dx = one_form(chart3, [chart3.one, chart3.zero, chart3.zero])
        assert wedge(dx, dx).comps == {}

    def test_volume_on_coordinate_frame(self, chart3):
        dx = one_form(chart3, [chart3.one, chart3.zero, chart3.zero])
        dy = one_form(chart3, [chart3.zero, chart3.one, chart3.zero])
        dz = one_form(chart3, [chart3.zero, chart3.zero, chart3.one])
        vol = wedge(dx, wedge(dy, dz))
        fields = [coordinate_field(chart3, i) for i in range(3)]
        assert evaluate_form(vol, fields).sym == 1


class TestEvaluateForm:
    def test_heisenberg_pairing(self, chart3, heis):
        x1, x2 = heis
        dx = one_form(chart3, [chart3.one, chart3.zero, chart3.zero])
        dy = one_form(chart3, [chart3.zero, chart3.one, chart3.zero])
        assert evaluate_form(wedge(dx, dy), [x1, x2]).sym == 1

    def test_repeated_field_vanishes(self, chart3, heis):
        x1, _ = heis
        dx = one_form(chart3, [chart3.one, chart3.zero, chart3.zero])
        dz = one_form(chart3, [chart3.zero, chart3.zero, chart3.one])
        assert evaluate_form(wedge(dx, dz), [x1, x1]).sym == 0

    def test_dz_on_dz_field(self, chart3):
        dz = one_form(chart3, [chart3.zero, chart3.zero, chart3.one])
        assert evaluate_form(dz, [coordinate_field(chart3, 2)]).sym == 1


class TestPushPull:
    def test_translation_preserves_invariant_field(self, chart3, heis):
        x1, _ = heis
        f = PointMap.from_texts(chart3, ["x + 1", "y", "z - y/2"])
        finv = PointMap.from_texts(chart3, ["x - 1", "y", "z + y/2"])
        pushed = pushforward(f, x1, finv)
        assert all(
            simplify(a - b).sym == 0 for a, b in zip(pushed.coeffs, x1.coeffs)
        )

    def test_pullback_identity(self, chart3):
        dz = one_form(chart3, [chart3.zero, chart3.zero, chart3.one])
        ident = PointMap.identity(chart3)
        assert pullback_form(ident, dz).comps == dz.comps

    def test_pullback_commutes_with_d(self, chart3):
        f = PointMap.from_texts(chart3, ["x + y^2", "y - x*z", "z + x*y"])
        form = one_form(
            chart3,
            [parse("x*y", chart3), parse("z^2", chart3), parse("y", chart3)],
        )
        lhs = pullback_form(f, exterior_derivative(form))
        rhs = exterior_derivative(pullback_form(f, form))
        diff = lhs - rhs
        assert all(simplify(v).sym == 0 for v in diff.comps.values())

    def test_pullback_metric_identity_map(self, chart3):
        g = [[chart3.one if i == j else chart3.zero for j in range(3)] for i in range(3)]
        out = pullback_metric(PointMap.identity(chart3), g)
        for i in range(3):
            for j in range(3):
                assert out[i][j].sym == (1 if i == j else 0)


class TestExpandInFrame:
    def test_reeb_in_heisenberg_frame(self, chart3, heis):
        x1, x2 = heis
        x0 = coordinate_field(chart3, 2)
        coeffs = expand_in_frame(x0, [x1, x2, x0])
        assert [c.sym for c in coeffs] == [0, 0, 1]

    def test_frame_field_itself(self, chart3, heis):
        x1, x2 = heis
        x0 = coordinate_field(chart3, 2)
        coeffs = expand_in_frame(x1, [x1, x2, x0])
        assert [c.sym for c in coeffs] == [1, 0, 0]

    def test_hyperbolic_bracket_expansion(self):
        chart = Chart(("x", "y", "z"), [(-1, 1), (0.5, 2), (-1, 1)]).with_excluded("y")
        h1 = VectorField.from_texts(chart, ["y", "0", "1"])
        h2 = VectorField.from_texts(chart, ["0", "y", "0"])
        x0 = coordinate_field(chart, 2)
        coeffs = expand_in_frame(lie_bracket(h1, h2), [h1, h2, x0])
        assert [c.sym for c in coeffs] == [-1, 0, 1]

    def test_singular_frame(self, chart3):
        v = coordinate_field(chart3, 0)
        with pytest.raises(SingularMatrixError):
            expand_in_frame(v, [v, v, coordinate_field(chart3, 2)])


_CHART = Chart(("x", "y", "z"))


def _fields():
    coeff = st.integers(-2, 2)

    def build(cs):
        comps = []
        for k in range(3):
            c0, c1 = cs[2 * k], cs[2 * k + 1]
            e = _CHART.constant(c0) + _CHART.coord(k % 3) * c1
            comps.append(e)
        return VectorField(_CHART, tuple(comps))

    return st.lists(coeff, min_size=6, max_size=6).map(build)


class TestProperties:
    @settings(max_examples=30, deadline=None)
    @given(_fields(), _fields(), _fields())
    def test_jacobi_identity(self, x, y, z):
        total = (
            lie_bracket(x, lie_bracket(y, z))
            + lie_bracket(y, lie_bracket(z, x))
            + lie_bracket(z, lie_bracket(x, y))
        )
        assert all(sp.expand(c.sym) == 0 for c in total.coeffs)

    @settings(max_examples=30, deadline=None)
    @given(_fields(), _fields())
    def test_cartan_formula_for_one_forms(self, x, y):
        alpha = one_form(
            _CHART,
            [parse("x*y", _CHART), parse("z", _CHART), parse("y^2", _CHART)],
        )
        d = exterior_derivative(alpha)
        lhs = evaluate_form(d, [x, y])

        def pair(form, v):
            acc = _CHART.zero
            for (a,), val in form.comps.items():
                acc = acc + val * v.coeffs[a]
            return acc

        rhs = x.apply(pair(alpha, y)) - y.apply(pair(alpha, x)) - pair(
            alpha, lie_bracket(x, y)
        )
        assert sp.expand((lhs - rhs).sym) == 0

    @settings(max_examples=25, deadline=None)
    @given(_fields())
    def test_expand_recombines(self, v):
        chart = Chart(("x", "y", "z"))
        x1 = VectorField.from_texts(chart, ["1", "0", "-y/2"])
        x2 = VectorField.from_texts(chart, ["0", "1", "x/2"])
        x0 = coordinate_field(chart, 2)
        frame = [x1, x2, x0]
        w = VectorField(chart, tuple(chart.constant(0) + c for c in v.coeffs))
        coeffs = expand_in_frame(w, frame)
        recombined = [chart.zero] * 3
        for c, f in zip(coeffs, frame):
            for a in range(3):
                recombined[a] = recombined[a] + c * f.coeffs[a]
        assert all(
            is_zero(recombined[a] - w.coeffs[a]).is_zero for a in range(3)
        )
