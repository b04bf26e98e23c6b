"""Riemann/Ricci machinery, the sectional decomposition and polarization."""

import pytest
import sympy as sp

from contactgeo.connection import FrameContext, levi_civita_general
from contactgeo.curvature import (
    DegeneratePlaneError,
    check_curvature_symmetries,
    curvature_biquadratic,
    decomposition_residual,
    polarize_biquadratic,
    r_d_tensor,
    ricci,
    riemann,
    sectional,
    sectional_span,
)
from contactgeo.structure import extend_metric, h_invariant
from contactgeo.symexpr import Chart, exp as expfn, is_zero, simplify


def _lc_curvature(s, c):
    nabla = levi_civita_general(
        FrameContext.from_structure(s), extend_metric(s, c).matrix
    )
    return riemann(nabla)


class TestRiemann:
    def test_flat_coordinate_connection(self, plan):
        chart = Chart(("x", "y", "z"))
        ctx = FrameContext.coordinate(chart, plan)
        metric = tuple(
            tuple(chart.one if i == j else chart.zero for j in range(3))
            for i in range(3)
        )
        curv = riemann(levi_civita_general(ctx, metric))
        assert all(
            curv.riemann[i][j][k][l].sym == 0
            for i in range(3)
            for j in range(3)
            for k in range(3)
            for l in range(3)
        )

    def test_flat_heisenberg_biquadratic(self, corpus):
        curv = _lc_curvature(corpus("heisenberg3-riem"), 1)
        assert curvature_biquadratic(curv, 0, 1).sym == sp.Rational(-3, 4)
        # Reeb-horizontal value c^2/4 at c = 1.
        assert curv.lowered[2][0][0][2].sym == sp.Rational(1, 4)

    def test_lorentzian_reeb_values(self, corpus):
        s = corpus("heisenberg3-lor")
        curv = _lc_curvature(s, 2)
        # c^2/4 and -c^2/4 on the two legs at c = 2.
        assert simplify(curv.lowered[2][0][0][2]).sym == 1
        assert simplify(curv.lowered[2][1][1][2]).sym == -1

    def test_symmetries(self, corpus, plan):
        for name in ("twisted-heisenberg", "heisenberg3-lor"):
            curv = _lc_curvature(corpus(name), 1)
            worst = check_curvature_symmetries(curv, plan)
            assert all(v.is_zero for v in worst.values()), worst

    def test_off_diagonal_vanishes_with_symmetric_reeb_flow(self, corpus, plan):
        # For h = 0 the mixed lowered entries G(R(X_i,X_j)X_k, X_i), j != k,
        # vanish; this is what forces the diagonal Ricci shape.
        s = corpus("hyperbolic-lift")
        curv = _lc_curvature(s, 1)
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    if j == k or j == i or k == i:
                        continue
                    assert is_zero(curv.lowered[i][j][k][i], plan).is_zero


class TestSectional:
    def test_flat_riemannian(self, corpus):
        curv = _lc_curvature(corpus("heisenberg3-riem"), 1)
        assert sectional(curv, 0, 1).sym == sp.Rational(-3, 4)

    def test_hyperbolic_unit_extension(self, corpus):
        curv = _lc_curvature(corpus("hyperbolic-lift"), 1)
        assert simplify(sectional(curv, 0, 1)).sym == sp.Rational(-7, 4)

    def test_null_plane_rejected(self, corpus):
        s = corpus("heisenberg3-lor")
        curv = _lc_curvature(s, 1)
        u = (s.chart.one, s.chart.one, s.chart.zero)
        w = (s.chart.zero, s.chart.zero, s.chart.one)
        with pytest.raises(DegeneratePlaneError):
            sectional_span(curv, u, w)

    def test_span_matches_frame_pair(self, corpus):
        s = corpus("hyperbolic-lift")
        curv = _lc_curvature(s, 1)
        u = (s.chart.one, s.chart.zero, s.chart.zero)
        v = (s.chart.zero, s.chart.one, s.chart.zero)
        assert simplify(sectional_span(curv, u, v) - sectional(curv, 0, 1)).sym == 0


class TestRicci:
    def test_flat_riemannian_diagonal(self, corpus):
        curv = _lc_curvature(corpus("heisenberg3-riem"), 1)
        ric, ric_sym, scalar = ricci(curv)
        assert [[e.sym for e in row] for row in ric] == [
            [sp.Rational(-1, 2), 0, 0],
            [0, sp.Rational(-1, 2), 0],
            [0, 0, sp.Rational(1, 2)],
        ]
        assert scalar.sym == sp.Rational(-1, 2)

    def test_lorentzian_pattern(self, corpus, plan):
        s = corpus("heisenberg3-lor")
        for c_val in (1, 2):
            curv = _lc_curvature(s, c_val)
            ric, _, _ = ricci(curv)
            c = sp.Rational(c_val)
            expected = [[-c / 2, 0, 0], [0, c / 2, 0], [0, 0, -c * c / 2]]
            for i in range(3):
                for j in range(3):
                    assert simplify(ric[i][j] - expected[i][j]).sym == 0


class TestDecomposition:
    @pytest.mark.parametrize(
        "name", ["twisted-heisenberg", "twisted-heisenberg-lor", "boosted-heisenberg-lor"]
    )
    def test_residual_zero_nonsymmetric(self, corpus, name):
        s = corpus(name)
        res = decomposition_residual(s, 2)
        assert all(d["verdict"].is_zero for d in res.values())

    def test_function_c(self, corpus):
        s = corpus("twisted-heisenberg")
        res = decomposition_residual(s, expfn(s.chart.coord("z")))
        assert all(d["verdict"].is_zero for d in res.values())

    def test_negative_c(self, corpus):
        s = corpus("hyperbolic-lift")
        res = decomposition_residual(s, -1)
        assert all(d["verdict"].is_zero for d in res.values())

    def test_flat_components(self, corpus):
        s = corpus("heisenberg3-riem")
        data = decomposition_residual(s, 1)[(1, 2)]
        assert simplify(data["kappa_d"]).sym == 0
        assert simplify(data["h_term"]).sym == 0
        assert simplify(data["kappa_c"]).sym == sp.Rational(-3, 4)
        assert simplify(data["omega_term"]).sym == 1

    def test_dim5_pair_dependence(self, corpus):
        s = corpus("heisenberg5-case1")
        res = decomposition_residual(s, 1)
        assert simplify(res[(1, 2)]["kappa_c"]).sym == sp.Rational(-3, 4)
        assert simplify(res[(1, 3)]["kappa_c"]).sym == 0
        assert all(d["verdict"].is_zero for d in res.values())

    def test_balancing_c_recovers_invariant(self, corpus, plan):
        # With 3 c^2 / 4 = -det(h#) > 0 the two correction terms cancel and
        # the extension sectional value equals the invariant itself.
        s = corpus("boosted-heisenberg")
        h = h_invariant(s)
        assert h.det_h_sharp.sym == -1
        from contactgeo.symexpr import sqrt as sqrtfn

        c = simplify(2 / sqrtfn(s.chart.constant(3)))
        data = decomposition_residual(s, c)[(1, 2)]
        assert data["verdict"].is_zero
        from contactgeo.structure import kappa_general

        kappa_c = data["kappa_c"]
        diff = simplify(kappa_c - kappa_general(s, 1, 2))
        assert is_zero(diff, plan).is_zero


class TestPolarization:
    def test_reproduces_riemann(self, corpus):
        s = corpus("heisenberg3-riem")
        curv = _lc_curvature(s, 1)
        m = 2

        def b(u, v):
            acc = s.chart.zero
            for a in range(m):
                for bb in range(m):
                    for c in range(m):
                        for d in range(m):
                            acc = acc + curv.lowered[a][bb][c][d] * u[a] * v[bb] * v[c] * u[d]
            return acc

        table = polarize_biquadratic(b, m, s.chart)
        for a in range(m):
            for bb in range(m):
                for c in range(m):
                    for d in range(m):
                        diff = table[a][bb][c][d] - curv.lowered[a][bb][c][d]
                        assert simplify(diff).sym == 0

    def test_omega_square_diagonal(self, corpus):
        s = corpus("heisenberg5-case1")
        m = 4

        def b(u, v):
            om = s.chart.zero
            for a in range(m):
                for bb in range(m):
                    om = om + s.omega[a][bb] * u[a] * v[bb]
            return om * om

        table = polarize_biquadratic(b, m, s.chart)
        for a in range(m):
            for bb in range(m):
                diag = table[a][bb][bb][a]
                assert simplify(diag - s.omega[a][bb] * s.omega[a][bb]).sym == 0

    def test_zero_biquadratic(self, corpus):
        s = corpus("heisenberg3-riem")
        table = polarize_biquadratic(lambda u, v: s.chart.zero, 2, s.chart)
        assert all(
            table[a][b][c][d].sym == 0
            for a in range(2)
            for b in range(2)
            for c in range(2)
            for d in range(2)
        )


class TestDistributionTensor:
    def test_flat_vanishes(self, corpus):
        for name in ("heisenberg3-riem", "heisenberg3-lor"):
            t = r_d_tensor(corpus(name), 1)
            assert all(
                simplify(t[a][b][c][d]).sym == 0
                for a in range(2)
                for b in range(2)
                for c in range(2)
                for d in range(2)
            )

    def test_hyperbolic_matches_base_curvature(self, corpus, plan):
        # The diagonal value on the frame pair equals the base Gauss
        # curvature with the usual gram sign.
        s = corpus("hyperbolic-lift")
        t = r_d_tensor(s, 1)
        assert simplify(t[0][1][1][0]).sym == -1

    def test_c_independence_twisted(self, corpus, plan):
        s = corpus("twisted-heisenberg")
        t1 = r_d_tensor(s, 1)
        t2 = r_d_tensor(s, 2)
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    for d in range(2):
                        assert is_zero(t1[a][b][c][d] - t2[a][b][c][d], plan).is_zero
