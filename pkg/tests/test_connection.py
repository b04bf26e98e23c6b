"""Levi-Civita and Weyl connections: closed form, Koszul, verification."""

from fractions import Fraction

import pytest
import sympy as sp

from contactgeo.calculus import KForm
from contactgeo.connection import (
    FrameContext,
    closed_form_connection,
    covariant_derivative,
    levi_civita_general,
    verify_connection,
    weyl_connection_general,
)
from contactgeo.structure import extend_metric
from contactgeo.symexpr import (
    Chart,
    differentiate,
    exp as expfn,
    is_zero,
    ln,
    simplify,
)


def _entries_equal(a, b, plan):
    d = len(a.gamma)
    for i in range(d):
        for j in range(d):
            for k in range(d):
                if not is_zero(a.gamma[i][j][k] - b.gamma[i][j][k], plan).is_zero:
                    return False, (i, j, k)
    return True, None


class TestClosedFormAgainstKoszul:
    @pytest.mark.parametrize(
        "name,c_text",
        [
            ("heisenberg3-riem", "1"),
            ("heisenberg3-lor", "-1"),
            ("hyperbolic-lift", "2"),
            ("twisted-heisenberg", "exp(z)"),
            ("boosted-heisenberg-lor", "2"),
            ("heisenberg5-case2", "1"),
        ],
    )
    def test_agreement(self, corpus, plan, name, c_text):
        s = corpus(name)
        c = expfn(s.chart.coord("z")) if c_text == "exp(z)" else s.chart.constant(Fraction(c_text))
        closed = closed_form_connection(s, c)
        koszul = levi_civita_general(
            FrameContext.from_structure(s), extend_metric(s, c).matrix
        )
        equal, where = _entries_equal(closed, koszul, plan)
        assert equal, f"mismatch at {where}"


class TestPrintedTables:
    def test_flat_riemannian_entries(self, corpus):
        # Positions: 0, 1 are the frame fields, 2 is the Reeb slot.
        s = corpus("heisenberg3-riem")
        nabla = closed_form_connection(s, 1)
        assert nabla.gamma[0][1][2].sym == sp.Rational(1, 2)
        assert nabla.gamma[1][0][2].sym == sp.Rational(-1, 2)
        assert nabla.gamma[0][2][1].sym == sp.Rational(-1, 2)
        assert all(nabla.gamma[2][2][k].sym == 0 for k in range(3))

    def test_flat_lorentzian_second_leg(self, corpus):
        # With vanishing twists the second-leg derivative keeps only the
        # Reeb term pattern of the indefinite table.
        s = corpus("heisenberg3-lor")
        nabla = closed_form_connection(s, 2)
        assert nabla.gamma[1][1][2].sym == 0
        assert nabla.gamma[1][1][0].sym == 0
        assert nabla.gamma[0][2][1].sym == -1
        assert nabla.gamma[1][2][0].sym == -1

    def test_boosted_second_leg_line(self, corpus):
        # Structure with c_01^1 = 1, c_02^2 = -1: the sub-Riemannian table
        # line for the second leg reads (1/c) c_02^2 X_0 + c_12^2 X_1.
        s = corpus("boosted-heisenberg")
        c = s.chart.constant(2)
        nabla = closed_form_connection(s, c)
        assert simplify(nabla.gamma[1][1][2] - s.c(2, 1, 1) / 2).sym == 0
        assert simplify(nabla.gamma[1][1][0] - s.c(0, 1, 1)).sym == 0

    def test_hyperbolic_table(self, corpus):
        # c_12^1 = -1: the mixed derivative gains a horizontal component.
        s = corpus("hyperbolic-lift")
        nabla = closed_form_connection(s, 1)
        assert nabla.gamma[0][1][2].sym == sp.Rational(1, 2)
        assert simplify(nabla.gamma[0][1][0]).sym == -1
        assert nabla.gamma[1][0][2].sym == sp.Rational(-1, 2)
        assert simplify(nabla.gamma[1][0][0]).sym == 0

    def test_dim5_mixed_leg(self, corpus):
        s = corpus("heisenberg5-case2")
        nabla = closed_form_connection(s, 1)
        # First conjugate pair still couples through the Reeb slot.
        assert nabla.gamma[0][1][4].sym == sp.Rational(1, 2)
        # The sign of the time-like leg enters the Reeb derivative of its
        # conjugate partner.
        assert nabla.gamma[1][4][0].sym == sp.Rational(-1, 2)
        s1 = corpus("heisenberg5-case1")
        nabla1 = closed_form_connection(s1, 1)
        assert nabla1.gamma[1][4][0].sym == sp.Rational(1, 2)


class TestFunctionValuedC:
    def test_derivative_terms(self, corpus, plan):
        s = corpus("heisenberg3-riem")
        c = expfn(s.chart.coord("z"))
        nabla = closed_form_connection(s, c)
        constant = closed_form_connection(s, 1)
        # Horizontal-horizontal entries keep the constant-c shape; entries
        # involving the Reeb direction gain derivative-of-c terms.
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    assert is_zero(
                        nabla.gamma[i][j][k] - constant.gamma[i][j][k], plan
                    ).is_zero
        expected = simplify(s.frame[0].apply(c) / (2 * c))
        assert simplify(nabla.gamma[0][2][2] - expected).sym == 0
        rep = verify_connection(nabla)
        assert rep.all_zero

    def test_reeb_flow_not_geodesic_for_nonconstant_c(self, corpus, plan):
        s = corpus("heisenberg3-riem")
        c = expfn(s.chart.coord("z"))
        nabla = levi_civita_general(
            FrameContext.from_structure(s), extend_metric(s, c).matrix
        )
        nonzero = [
            k for k in range(3) if not is_zero(nabla.gamma[2][2][k], plan).is_zero
        ]
        assert nonzero, "a c depending on horizontal directions bends Reeb curves"


class TestWeyl:
    def test_zero_eta_is_levi_civita(self, corpus, plan):
        s = corpus("heisenberg3-riem")
        ctx = FrameContext.from_structure(s)
        metric = extend_metric(s, 1).matrix
        eta = KForm.build(s.chart, 1, {})
        w = weyl_connection_general(ctx, metric, eta)
        lc = levi_civita_general(ctx, metric)
        equal, _ = _entries_equal(w, lc, plan)
        assert equal

    def test_compatibility_law(self, corpus):
        s = corpus("heisenberg3-lor")
        ctx = FrameContext.from_structure(s)
        metric = extend_metric(s, 2).matrix
        eta = s.alpha.scale(4)
        w = weyl_connection_general(ctx, metric, eta)
        rep = verify_connection(w)
        assert rep.all_zero

    def test_corrupted_connection_detected(self, corpus):
        s = corpus("heisenberg3-riem")
        ctx = FrameContext.from_structure(s)
        metric = extend_metric(s, 1).matrix
        lc = levi_civita_general(ctx, metric)
        gamma = [[[e for e in row] for row in gi] for gi in lc.gamma]
        gamma[0][1][2] = gamma[0][1][2] + 1
        broken = type(lc)(
            ctx=ctx,
            gamma=tuple(tuple(tuple(r) for r in gi) for gi in gamma),
            metric=metric,
            eta_values=None,
            provenance="corrupted",
        )
        rep = verify_connection(broken)
        assert not rep.all_zero
        assert rep.worst() is not None

    def test_conformal_rescaling_consistency(self, corpus, plan):
        # Replacing G by phi^2 G and eta by eta + 2 d(ln phi) keeps the
        # compatibility law satisfied.
        s = corpus("heisenberg3-riem")
        ctx = FrameContext.from_structure(s)
        phi = expfn(s.chart.coord("z"))
        base = extend_metric(s, 1).matrix
        scaled = tuple(
            tuple(simplify(e * phi * phi) for e in row) for row in base
        )
        ln_phi = ln(phi)
        dln = KForm.build(
            s.chart,
            1,
            {
                (a,): simplify(2 * differentiate(ln_phi, s.chart.names[a]))
                for a in range(3)
            },
        )
        eta = s.alpha.scale(2) + dln
        w = weyl_connection_general(ctx, scaled, eta)
        rep = verify_connection(w)
        assert rep.all_zero


class TestCovariantDerivative:
    def test_metric_parallel_under_its_connection(self, corpus, plan):
        s = corpus("hyperbolic-lift")
        ctx = FrameContext.from_structure(s)
        metric = extend_metric(s, 1).matrix
        lc = levi_civita_general(ctx, metric)
        for direction in range(3):
            out = covariant_derivative(lc, [list(r) for r in metric], "0,2", direction)
            assert all(is_zero(e, plan).is_zero for row in out for e in row)

    def test_identity_endomorphism_parallel(self, corpus, plan):
        s = corpus("heisenberg3-riem")
        ctx = FrameContext.from_structure(s)
        lc = levi_civita_general(ctx, extend_metric(s, 1).matrix)
        ident = [
            [s.chart.one if i == j else s.chart.zero for j in range(3)]
            for i in range(3)
        ]
        for direction in range(3):
            out = covariant_derivative(lc, ident, "1,1", direction)
            assert all(is_zero(e, plan).is_zero for row in out for e in row)

    def test_contact_form_derivative_is_skew(self, corpus):
        # nabla alpha on the flat structure: the only nonzero entries are the
        # horizontal pair, with value -1/2 independently of c (forced by the
        # uniqueness of the Levi-Civita connection).
        s = corpus("heisenberg3-riem")
        for c_val in (1, 2):
            nabla = closed_form_connection(s, c_val)
            alpha_vals = [s.chart.zero, s.chart.zero, s.chart.one]
            rows = [
                covariant_derivative(nabla, alpha_vals, "0,1", i) for i in range(3)
            ]
            mat = [[simplify(rows[i][j]).sym for j in range(3)] for i in range(3)]
            assert mat[0][1] == sp.Rational(-1, 2)
            assert mat[1][0] == sp.Rational(1, 2)
            assert all(
                mat[i][j] == 0 for i in range(3) for j in range(3) if (i, j) not in ((0, 1), (1, 0))
            )


class TestCoordinateFrames:
    def test_flat_coordinate_metric_has_zero_connection(self, plan):
        chart = Chart(("x", "y", "z"))
        ctx = FrameContext.coordinate(chart, plan)
        metric = tuple(
            tuple(chart.one if i == j else chart.zero for j in range(3))
            for i in range(3)
        )
        lc = levi_civita_general(ctx, metric)
        assert all(
            lc.gamma[i][j][k].sym == 0
            for i in range(3)
            for j in range(3)
            for k in range(3)
        )
