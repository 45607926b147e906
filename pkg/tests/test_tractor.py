"""Tractor bundle: metric, normal connection, conformal changes and curvature."""

import numpy as np
import numpy.testing as npt
import pytest

from tractor_holo.core.curvature import AnalyticGeometry, rescale
from tractor_holo.core.errors import ChartMismatchError, InconsistencyError, RejectedInputError
from tractor_holo.core.gaussian import BIVARIATE, INDEPENDENCE
from tractor_holo.core.geometry import array_partial, orthonormalize
from tractor_holo.core.tractor import (
    FISHER_RAO_SCALE,
    ConformalFactor,
    Tractor,
    TractorConnection,
    conformal_change_matrix,
    connection_gauge_residual,
    coordinate_frame,
    fisher_rao_connection,
    norm_type,
    refine_fixed_vectors,
    tractor_conformal_change,
    tractor_curvature,
    tractor_derivative,
    tractor_gram,
    tractor_inner,
)

PARALLEL = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 1.0 / 12.0])


@pytest.fixture
def factor():
    return ConformalFactor.linear((0.1, -0.05, 0.08, 0.03), offset=0.2)


@pytest.fixture
def rescaled(factor):
    geometry = rescale(AnalyticGeometry(INDEPENDENCE), factor.upsilon)
    return TractorConnection(geometry, scale=f"{FISHER_RAO_SCALE}|{factor.name}")


class TestTractorMetric:
    def test_gram_signature(self, g_point, i_point):
        for m, p in ((BIVARIATE, g_point), (INDEPENDENCE, i_point)):
            gram = fisher_rao_connection(m).fiber_metric(np.asarray(p.coords))
            assert orthonormalize(gram).signature == (1, m.dim + 1)

    def test_coordinate_frame(self, i_base):
        frame = coordinate_frame(i_base)
        assert len(frame.vectors) == 6
        npt.assert_allclose(frame.gram, tractor_gram(np.diag([1.0, 1.0, 0.5, 0.5])), atol=1e-14)

    def test_inner_product_of_parallel_tractor(self, i_base):
        v = Tractor.from_array(PARALLEL, i_base)
        assert tractor_inner(v, v) == pytest.approx(1.0 / 6.0)

    def test_mismatched_bases(self, i_base, i_point):
        v = Tractor.from_array(PARALLEL, i_base)
        w = Tractor.from_array(PARALLEL, i_point)
        with pytest.raises(ChartMismatchError):
            tractor_inner(v, w)

    def test_wrong_length(self, i_base):
        with pytest.raises(RejectedInputError):
            Tractor(1.0, (0.0, 0.0), 0.0, i_base)

    def test_norm_type(self):
        assert norm_type(1.0) == "positive"
        assert norm_type(-1.0) == "negative"
        assert norm_type(1e-12) == "null"


class TestTractorConnection:
    @pytest.mark.parametrize("manifold", [BIVARIATE, INDEPENDENCE])
    def test_preserves_tractor_metric(self, manifold, g_point, i_point):
        x = np.asarray((g_point if manifold is BIVARIATE else i_point).coords)
        connection = fisher_rao_connection(manifold)
        gram = connection.fiber_metric(x)
        mats = connection.matrices(x)
        for b in range(manifold.dim):
            d_gram = array_partial(connection.fiber_metric, x, b)
            npt.assert_allclose(mats[b].T @ gram + gram @ mats[b], d_gram, atol=1e-8)

    def test_primary_slot(self, g_point):
        field = lambda x: np.concatenate([[x[0] * x[2]], 0.1 * x, [x[4]]])
        for b in range(5):
            derivative = tractor_derivative(field, g_point, b)
            x = np.asarray(g_point.coords)
            expected = array_partial(lambda y: field(y)[0], x, b) - 0.1 * (
                fisher_rao_connection(BIVARIATE).fiber_metric(x)[1 + b, 1:6] @ x)
            assert derivative.sigma == pytest.approx(expected, abs=1e-8)

    def test_constant_field_is_parallel_on_independence(self, i_base, i_point):
        for p in (i_base, i_point):
            for b in range(4):
                derivative = tractor_derivative(lambda x: PARALLEL, p, b)
                npt.assert_allclose(derivative.array, 0.0, atol=1e-12)

    def test_constant_field_is_not_parallel_on_bivariate(self, g_base):
        v = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0 / 12.0])
        worst = max(np.max(np.abs(tractor_derivative(lambda x: v, g_base, b).array)) for b in range(5))
        assert worst > 1e-3

    def test_direction_out_of_range(self, i_base):
        with pytest.raises(RejectedInputError):
            tractor_derivative(lambda x: PARALLEL, i_base, 4)


class TestConformalChange:
    def test_identity_and_constant_factor(self):
        """Convention à poids (composantes trivialisées dans chaque échelle) : Υ constant multiplie σ par e^Υ et les autres fentes par e^{−Υ}"""
        g = np.diag([1.0, 2.0, 0.5, 3.0])
        npt.assert_allclose(conformal_change_matrix(g, 0.0, np.zeros(4)), np.eye(6), atol=1e-15)
        weights = [np.exp(0.3)] + [np.exp(-0.3)] * 5
        npt.assert_allclose(conformal_change_matrix(g, 0.3, np.zeros(4)), np.diag(weights), atol=1e-15)

    def test_tractor_metric_is_invariant(self, i_point, factor, rescaled):
        v = Tractor.from_array([0.7, 0.1, -0.4, 0.3, 0.2, -1.1], i_point)
        w = Tractor.from_array([-0.2, 0.5, 0.2, -0.3, 1.0, 0.4], i_point)
        v_hat = tractor_conformal_change(v, factor)
        w_hat = tractor_conformal_change(w, factor)
        assert v_hat.scale == f"{FISHER_RAO_SCALE}|{factor.name}"
        assert tractor_inner(v_hat, w_hat, rescaled.geometry) == pytest.approx(tractor_inner(v, w), abs=1e-10)

    def test_round_trip(self, i_point, factor, rescaled):
        v = Tractor.from_array([0.7, 0.1, -0.4, 0.3, 0.2, -1.1], i_point)
        back = tractor_conformal_change(tractor_conformal_change(v, factor), factor.inverse(), rescaled.geometry)
        assert back.scale == FISHER_RAO_SCALE
        npt.assert_allclose(back.array, v.array, atol=1e-10)

    def test_other_scale_needs_geometry(self, i_point, factor):
        v_hat = tractor_conformal_change(Tractor.from_array(PARALLEL, i_point), factor)
        with pytest.raises(RejectedInputError):
            tractor_inner(v_hat, v_hat)

    def test_connection_transforms_as_a_gauge_field(self, i_point, factor, rescaled):
        connection = fisher_rao_connection(INDEPENDENCE)
        assert connection_gauge_residual(connection, rescaled, factor, np.asarray(i_point.coords)) < 1e-5

    def test_gradient_consistency(self, i_point):
        bad = ConformalFactor(lambda x: float(x[0] ** 2), lambda x: np.zeros(4), "bad")
        with pytest.raises(InconsistencyError):
            bad.check_gradient(np.asarray(i_point.coords))
        assert ConformalFactor.linear((1.0, 2.0, 3.0, 4.0)).check_gradient(np.asarray(i_point.coords)) < 1e-6


class TestTractorCurvature:
    def test_antisymmetric_and_metric_skew(self, g_point):
        x = np.asarray(g_point.coords)
        connection = fisher_rao_connection(BIVARIATE)
        gram = connection.fiber_metric(x)
        omega = connection.curvature_operators(x)
        npt.assert_allclose(omega, -np.swapaxes(omega, 0, 1), atol=1e-12)
        scale = max(1.0, float(np.max(np.abs(omega))))
        for a in range(5):
            for b in range(5):
                skew = omega[a, b].T @ gram + gram @ omega[a, b]
                assert np.max(np.abs(skew)) / scale < 1e-6

    def test_annihilates_parallel_tractor(self, i_point):
        for a, b in ((0, 1), (0, 2), (1, 3), (2, 3)):
            omega = tractor_curvature(i_point, a, b)
            npt.assert_allclose(omega @ PARALLEL, 0.0, atol=1e-6)

    def test_loop_estimate_matches_derivatives(self, i_base):
        fd = tractor_curvature(i_base, 0, 2, method="fd")
        loop = tractor_curvature(i_base, 0, 2, method="loop")
        assert np.max(np.abs(fd)) > 1e-3
        npt.assert_allclose(loop, fd, atol=1e-2 * max(1.0, float(np.max(np.abs(fd)))))

    def test_same_direction_rejected(self, i_base):
        with pytest.raises(RejectedInputError):
            tractor_curvature(i_base, 1, 1)


class TestFixedVectorRefinement:
    @staticmethod
    def rotations():
        out = []
        for angle in (0.4, -1.1, 2.0):
            m = np.eye(4)
            m[2:, 2:] = [[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]]
            out.append(m)
        return out

    def test_each_line_keeps_its_own_direction(self):
        guesses = [np.array([1.0, 0.02, 0.01, -0.01]), np.array([-0.03, 1.0, 0.0, 0.02])]
        first, second = refine_fixed_vectors(self.rotations(), guesses)
        npt.assert_allclose(first, np.array([1.0, 0.02, 0.0, 0.0]) / np.hypot(1.0, 0.02), atol=1e-12)
        npt.assert_allclose(second, np.array([-0.03, 1.0, 0.0, 0.0]) / np.hypot(0.03, 1.0), atol=1e-12)
        assert abs(first @ second) < 0.1

    def test_guess_orthogonal_to_fixed_space(self):
        with pytest.raises(InconsistencyError):
            refine_fixed_vectors(self.rotations(), [np.array([0.0, 0.0, 1.0, 0.0]), np.array([0.0, 0.0, 0.0, 1.0])])
