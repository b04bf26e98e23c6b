"""Expression layer: grammar, printing, calculus, zero testing."""

import math
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from contactgeo.symexpr import (
    Chart,
    EvalDomainError,
    Expr,
    ParseError,
    SamplingPlan,
    SymExprError,
    UnknownFunctionError,
    UnknownIdentifierError,
    differentiate,
    eval_at,
    is_zero,
    parse,
    print_expr,
    simplify,
)


class TestChart:
    def test_rejects_duplicate_names(self):
        with pytest.raises(ValueError):
            Chart(("x", "x", "z"))

    def test_rejects_bad_identifier(self):
        with pytest.raises(ValueError):
            Chart(("x", "2y", "z"))

    def test_rejects_function_name_collision(self):
        with pytest.raises(ValueError):
            Chart(("x", "sin", "z"))

    def test_rejects_degenerate_interval(self):
        with pytest.raises(ValueError):
            Chart(("x", "y"), [(0.0, 0.0), (-1.0, 1.0)])

    def test_excluded_loci_guard_sampling(self):
        chart = Chart(("x", "y", "z"), [(-1, 1)] * 3).with_excluded("y")
        for pt in chart.sample_points(SamplingPlan(samples=40)):
            assert abs(pt["y"]) >= 1e-6


class TestParser:
    def test_sum_with_rational_coefficient(self, chart3):
        e = parse("x - (1/2)*y", chart3)
        x, y = chart3.symbol("x"), chart3.symbol("y")
        assert e.sym == x - sp.Rational(1, 2) * y

    def test_trig_not_auto_simplified(self, chart3):
        e = parse("sin(z)^2 + cos(z)^2", chart3)
        assert e.sym != 1

    def test_syntax_error_position(self, chart3):
        with pytest.raises(ParseError) as err:
            parse("x + * y", chart3)
        assert err.value.position == 4

    def test_unknown_identifier(self, chart3):
        with pytest.raises(UnknownIdentifierError):
            parse("x + w", chart3)

    def test_unknown_function(self, chart3):
        with pytest.raises(UnknownFunctionError):
            parse("tan(x)", chart3)

    def test_precedence_power_over_unary_minus(self, chart3):
        assert parse("-x^2", chart3).sym == -chart3.symbol("x") ** 2

    def test_left_associative_division(self, chart3):
        e = parse("8/2/2", chart3)
        assert e.sym == 2

    def test_zero_exponent_rejected(self, chart3):
        with pytest.raises(ParseError):
            parse("x^0", chart3)

    def test_negative_exponent(self, chart3):
        e = parse("x^-2", chart3)
        assert e.sym == chart3.symbol("x") ** -2

    def test_nested_functions(self, chart3):
        e = parse("exp(ln(x) / 3)", chart3)
        assert e.sym == sp.exp(sp.log(chart3.symbol("x")) / 3)


class TestPrinter:
    def test_round_trip_examples(self, chart3):
        for text in (
            "x - (1/2)*y",
            "sin(z)^2 + cos(z)^2",
            "1/(x + 2)",
            "sqrt(2)*x",
            "-x^3 + x*y/4",
            "exp(z)*cosh(x)",
        ):
            e = parse(text, chart3)
            again = parse(print_expr(e), chart3)
            assert sp.expand(again.sym - e.sym) == 0

    def test_no_floats_printable(self, chart3):
        with pytest.raises(SymExprError):
            Expr(chart3, sp.Float(0.5))


class TestDifferentiate:
    def test_power_rule(self, chart3):
        assert differentiate(parse("x^2", chart3), "x").sym == 2 * chart3.symbol("x")

    def test_chain_rule(self, chart3):
        assert differentiate(parse("sin(z)", chart3), "z").sym == sp.cos(chart3.symbol("z"))

    def test_constant_in_other_coordinate(self, chart3):
        assert differentiate(parse("y", chart3), "x").sym == 0

    def test_invalid_coordinate(self, chart3):
        with pytest.raises(SymExprError):
            differentiate(parse("x", chart3), "w")


class TestSimplify:
    def test_polynomial_cancellation(self, chart3):
        e = parse("(x+y)^2 - x^2 - 2*x*y - y^2", chart3)
        assert simplify(e).sym == 0

    def test_rational_halves(self, chart3):
        e = parse("y/2 - y/2", chart3)
        assert simplify(e).sym == 0

    def test_idempotent(self, chart3):
        e = parse("(x^2 - y^2)/(x - y) + sin(z)^2", chart3)
        once = simplify(e)
        twice = simplify(once)
        assert once.sym == twice.sym


class TestEval:
    def test_product(self, chart3):
        assert eval_at(parse("x*y", chart3), {"x": 2, "y": 3, "z": 0}) == 6

    def test_division_by_zero(self, chart3):
        with pytest.raises(EvalDomainError):
            eval_at(parse("1/y", chart3), {"x": 0, "y": 0, "z": 0})

    def test_exp_zero(self, chart3):
        assert eval_at(parse("exp(x - x)", chart3), {"x": 5, "y": 0, "z": 0}) == 1.0

    def test_ln_domain(self, chart3):
        with pytest.raises(EvalDomainError):
            eval_at(parse("ln(x)", chart3), {"x": -1, "y": 0, "z": 0})

    def test_sqrt_domain(self, chart3):
        with pytest.raises(EvalDomainError):
            eval_at(parse("sqrt(x)", chart3), {"x": -4, "y": 0, "z": 0})


class TestIsZero:
    def test_symbolic_zero(self, chart3):
        v = is_zero(parse("(x+y)^2 - x^2 - 2*x*y - y^2", chart3))
        assert v.kind == "symbolic_zero"

    def test_numeric_zero_trig(self, chart3):
        v = is_zero(parse("sin(z)^2 + cos(z)^2 - 1", chart3))
        assert v.kind == "numeric_zero"
        assert v.max_abs <= 1e-9
        assert v.samples_used == 20

    def test_nonzero_with_witness(self, chart3):
        v = is_zero(parse("x - y", chart3))
        assert v.kind == "nonzero"
        assert v.witness_point is not None
        assert abs(v.witness_value) > 1e-9

    def test_deterministic_for_seed(self, chart3):
        e = parse("x - y", chart3)
        v1 = is_zero(e, SamplingPlan(seed=7))
        v2 = is_zero(e, SamplingPlan(seed=7))
        assert v1.witness_point == v2.witness_point
        v3 = is_zero(e, SamplingPlan(seed=8))
        assert v3.kind == "nonzero"

    def test_exhausted_sampling_is_configuration_error(self):
        from contactgeo.symexpr import SamplingError

        chart = Chart(("x", "y")).with_excluded("x - x + 0*y")
        with pytest.raises(SamplingError):
            is_zero(chart.coord("x") - 5, SamplingPlan(samples=5))


# Random expression trees for the property tests.
def _exprs(chart):
    leaves = st.one_of(
        st.integers(-5, 5).map(lambda n: chart.constant(n)),
        st.sampled_from([chart.coord(i) for i in range(chart.dim)]),
        st.fractions(min_value=-3, max_value=3).map(
            lambda q: chart.constant(Fraction(q).limit_denominator(6))
        ),
    )

    def extend(children):
        from contactgeo.symexpr import cos, sin

        return st.one_of(
            st.tuples(children, children).map(lambda ab: ab[0] + ab[1]),
            st.tuples(children, children).map(lambda ab: ab[0] * ab[1]),
            st.tuples(children, children).map(lambda ab: ab[0] - ab[1]),
            children.map(lambda a: -a),
            children.map(lambda a: a ** 2),
            children.map(sin),
            children.map(cos),
        )

    return st.recursive(leaves, extend, max_leaves=8)


_CHART = Chart(("x", "y", "z"))


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(_exprs(_CHART))
    def test_parse_print_round_trip(self, e):
        again = parse(print_expr(e), _CHART)
        assert again.sym == e.sym or sp.expand(again.sym - e.sym) == 0

    @settings(max_examples=40, deadline=None)
    @given(_exprs(_CHART), _exprs(_CHART))
    def test_leibniz_rule(self, f, g):
        d_prod = differentiate(f * g, "x")
        expected = f * differentiate(g, "x") + g * differentiate(f, "x")
        assert sp.expand((d_prod - expected).sym) == 0

    @settings(max_examples=40, deadline=None)
    @given(_exprs(_CHART), _exprs(_CHART))
    def test_differentiate_additive(self, f, g):
        lhs = differentiate(f + g, "y")
        rhs = differentiate(f, "y") + differentiate(g, "y")
        assert sp.expand((lhs - rhs).sym) == 0

    @settings(max_examples=40, deadline=None)
    @given(_exprs(_CHART))
    def test_simplify_idempotent(self, e):
        once = simplify(e)
        assert simplify(once).sym == once.sym

    @settings(max_examples=30, deadline=None)
    @given(_exprs(_CHART))
    def test_simplify_preserves_value(self, e):
        pt = {"x": 0.37, "y": -0.81, "z": 0.44}
        try:
            before = eval_at(e, pt)
            after = eval_at(simplify(e), pt)
        except EvalDomainError:
            return
        scale = max(1.0, abs(before))
        assert math.isclose(before, after, rel_tol=1e-12, abs_tol=1e-12 * scale)
