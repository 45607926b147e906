"""Riemann, Ricci, scalar, Schouten and Weyl tensors on G, I and the univariate family."""

import numpy as np
import numpy.testing as npt
import pytest

from tractor_holo.core import closed_forms
from tractor_holo.core.curvature import (
    AnalyticGeometry,
    conformal_rescale,
    constant_curvature_defect,
    coordinate_blocks,
    curvature_pack,
    einstein_defect,
    raised_weyl,
    scalar,
    schouten,
    sectional,
    symmetry_residuals,
    weyl,
)
from tractor_holo.core.errors import RejectedInputError
from tractor_holo.core.gaussian import BIVARIATE, INDEPENDENCE, UNIVARIATE, to_natural


class TestScalarCurvature:
    def test_bivariate_is_constant(self, g_base, g_point, box, rng):
        for p in [g_base, g_point] + box.sample(BIVARIATE, rng, 5):
            assert scalar(BIVARIATE, p) == pytest.approx(-4.5, abs=1e-9)

    def test_independence_is_constant(self, i_point, box, rng):
        for p in [i_point] + box.sample(INDEPENDENCE, rng, 5):
            assert scalar(INDEPENDENCE, p) == pytest.approx(-2.0, abs=1e-9)
            assert scalar(INDEPENDENCE, to_natural(p)) == pytest.approx(-2.0, abs=1e-9)

    def test_univariate_gaussian_curvature(self, u_point):
        pack = curvature_pack(UNIVARIATE, u_point)
        assert pack.scal == pytest.approx(-1.0, abs=1e-12)
        assert sectional(UNIVARIATE, u_point, 0, 1) == pytest.approx(-0.5, abs=1e-12)
        assert pack.schouten is None and pack.weyl is None

    def test_numeric_path_agrees(self, g_point):
        numeric = curvature_pack(BIVARIATE, g_point, method="numeric")
        assert numeric.scal == pytest.approx(-4.5, abs=1e-5)

    def test_unknown_method(self, g_point):
        with pytest.raises(RejectedInputError):
            curvature_pack(BIVARIATE, g_point, method="symbolic")


class TestIndependenceClosedForms:
    def test_einstein(self, i_point):
        assert einstein_defect(INDEPENDENCE, to_natural(i_point)) < 1e-9
        assert einstein_defect(INDEPENDENCE, i_point) < 1e-9

    def test_riemann_components(self, i_point):
        pack = curvature_pack(INDEPENDENCE, to_natural(i_point))
        for (a, b, c, d), value in closed_forms.i_riemann(i_point.coords).items():
            assert pack.riemann.entries[a - 1, b - 1, c - 1, d - 1] == pytest.approx(value, rel=1e-9)

    def test_metric_ricci_and_sectional(self, i_point):
        pack = curvature_pack(INDEPENDENCE, to_natural(i_point))
        npt.assert_allclose(pack.metric.entries, closed_forms.i_metric(i_point.coords), atol=1e-10)
        npt.assert_allclose(pack.ricci.entries, closed_forms.i_ricci(i_point.coords), atol=1e-9)
        npt.assert_allclose(pack.sectional, closed_forms.i_sectional(i_point.coords), atol=1e-9)

    def test_schouten_is_a_multiple_of_the_metric(self, i_base, i_point):
        for p in (i_base, to_natural(i_point)):
            p_ab, j_trace = schouten(INDEPENDENCE, p)
            g = curvature_pack(INDEPENDENCE, p).metric.entries
            npt.assert_allclose(p_ab.entries, -g / 12.0, atol=1e-10)
            assert j_trace == pytest.approx(-1.0 / 3.0, abs=1e-12)

    def test_weyl_component_from_metric(self, i_point):
        theta = to_natural(i_point)
        g = curvature_pack(INDEPENDENCE, theta).metric.entries
        c = weyl(INDEPENDENCE, theta).entries
        assert c[0, 1, 2, 3] == pytest.approx(g[0, 2] * g[1, 3] / 6.0, rel=1e-9)
        mu1, mu2, s1, s2 = i_point.coords
        assert c[0, 1, 2, 3] == pytest.approx(2.0 / 3.0 * mu1 * mu2 * s1 * s2, rel=1e-9)

    def test_product_structure(self, i_point):
        pack = curvature_pack(INDEPENDENCE, to_natural(i_point))
        assert coordinate_blocks(pack.riemann) == [(0, 2), (1, 3)]
        assert constant_curvature_defect(pack) > 1e-3


class TestBivariateClosedForms:
    def test_not_einstein(self, g_base):
        assert einstein_defect(BIVARIATE, g_base) > 1e-3

    def test_weyl_component(self, g_point, g_base):
        order = closed_forms.G_DISPLAY_ORDER
        for p in (g_base, g_point):
            c = weyl(BIVARIATE, p).entries
            assert c[order[0], order[1], order[2], order[3]] == pytest.approx(
                closed_forms.g_weyl_1234(p.coords), rel=1e-9)

    def test_ricci_closed_form(self, g_point):
        pack = curvature_pack(BIVARIATE, g_point)
        npt.assert_allclose(closed_forms.to_display(pack.ricci.entries), closed_forms.g_ricci(g_point.coords),
                            atol=1e-9)

    def test_indecomposable(self, g_base):
        assert len(coordinate_blocks(curvature_pack(BIVARIATE, g_base).riemann)) == 1


class TestIdentities:
    @pytest.mark.parametrize("method", ["analytic", "numeric"])
    def test_symmetry_residuals(self, g_point, method):
        pack = curvature_pack(BIVARIATE, g_point, method=method)
        scale = max(1.0, float(np.max(np.abs(pack.riemann.entries))))
        tol = 1e-10 if method == "analytic" else 1e-5
        for name, value in symmetry_residuals(pack).items():
            assert value / scale < tol, name

    def test_degenerate_sectional_plane(self, g_point):
        with pytest.raises(RejectedInputError):
            sectional(BIVARIATE, g_point, 2, 2)

    def test_low_dimensional_tensors_rejected(self, u_point):
        with pytest.raises(RejectedInputError):
            schouten(UNIVARIATE, u_point)
        with pytest.raises(RejectedInputError):
            weyl(UNIVARIATE, u_point)

    def test_weyl_is_conformally_invariant(self, i_point):
        x = np.asarray(i_point.coords)
        upsilon = lambda y: 0.1 * y[0] - 0.05 * y[2] + 0.02 * y[1] * y[3]
        rescaled = conformal_rescale(INDEPENDENCE, upsilon, i_point).pack(x)
        original = AnalyticGeometry(INDEPENDENCE).pack(x)
        npt.assert_allclose(raised_weyl(rescaled), raised_weyl(original), atol=1e-5)
        assert rescaled.scal != pytest.approx(original.scal, abs=1e-3)
