"""Parallel transport, loop families and the principal matrix logarithm."""

import numpy as np
import numpy.testing as npt
import pytest
from scipy.linalg import expm

from tractor_holo.core.errors import DomainError, LogFailureError, RejectedInputError, StepUnderflowError
from tractor_holo.core.transport import (
    Connection,
    LineSegment,
    LoopDomain,
    LoopKind,
    LoopPath,
    coord_rectangle,
    geodesic_segment,
    loop_family,
    matrix_log,
    parallel_transport,
)

ROTATION = np.array([[0.0, 1.0], [-1.0, 0.0]])


class LinearConnection(Connection):
    """A_0 = 0 et A_1 = x0 · B sur le plan, courbure Ω_01 = B partout"""

    dim = 2
    rank = 2
    name = "linear"

    def __init__(self, generator: np.ndarray, contains=None):
        self.b = generator
        self._contains = contains

    def matrices(self, x):
        return np.stack([np.zeros((2, 2)), x[0] * self.b])

    def fiber_metric(self, x):
        return np.eye(2)

    def contains(self, x):
        return True if self._contains is None else bool(self._contains(x))


class ConstantConnection(Connection):
    dim = 1
    rank = 2

    def __init__(self, generator: np.ndarray):
        self.b = generator

    def matrices(self, x):
        return self.b[None]

    def fiber_metric(self, x):
        return np.eye(2)


@pytest.fixture
def plane():
    return LoopDomain(contains=lambda x: True, sample=lambda rng: rng.uniform(-1.0, 1.0, size=2))


class TestParallelTransport:
    def test_flat_connection(self):
        result = parallel_transport(ConstantConnection(np.zeros((2, 2))), LineSegment([0.0], [1.0]))
        npt.assert_array_equal(result.matrix, np.eye(2))
        assert result.steps == 800
        assert not result.refined

    def test_constant_connection_is_an_exponential(self):
        b = 0.5 * ROTATION
        result = parallel_transport(ConstantConnection(b), LineSegment([0.0], [1.0]))
        npt.assert_allclose(result.matrix, expm(-b), atol=1e-10)
        assert result.error < 1e-9

    def test_rectangle_holonomy(self):
        eps = 0.1
        loop = coord_rectangle(np.zeros(2), 0, 1, eps)
        holonomy = parallel_transport(LinearConnection(ROTATION), loop).matrix
        npt.assert_allclose(matrix_log(holonomy), -eps ** 2 * ROTATION, atol=1e-10)

    def test_curvature_operators(self):
        omega = LinearConnection(ROTATION).curvature_operators(np.array([0.3, -0.2]))
        npt.assert_allclose(omega[0, 1], ROTATION, atol=1e-8)
        npt.assert_allclose(omega[1, 0], -ROTATION, atol=1e-8)

    def test_path_leaving_domain(self):
        connection = LinearConnection(ROTATION, contains=lambda x: x[0] < 0.5)
        with pytest.raises(DomainError):
            parallel_transport(connection, LineSegment([0.0, 0.0], [1.0, 0.0]))

    def test_step_underflow(self):
        connection = ConstantConnection(50.0 * ROTATION)
        with pytest.raises(StepUnderflowError):
            parallel_transport(connection, LineSegment([0.0], [1.0]), steps_per_unit=10, max_steps=50)


class TestLoops:
    def test_rectangle_closes_and_flips(self):
        loop = coord_rectangle(np.array([0.0, 0.0]), 0, 1, 0.2, contains=lambda x: x[0] <= 0.0)
        assert loop.kind is LoopKind.COORD_RECTANGLE
        assert loop.params["sign_a"] == -1.0
        assert loop.params["sign_b"] == 1.0
        assert loop.length == pytest.approx(0.8)

    def test_unclosed_loop_rejected(self):
        with pytest.raises(RejectedInputError):
            LoopPath(np.zeros(2), [LineSegment([0.0, 0.0], [1.0, 0.0])], LoopKind.RANDOM_POLYLINE)

    def test_family_is_deterministic(self, plane):
        first = loop_family(np.zeros(2), "random_polyline", 3, 7, plane)
        second = loop_family(np.zeros(2), "random_polyline", 3, 7, plane)
        assert len(first) == 3
        for a, b in zip(first, second):
            npt.assert_array_equal(a.sample(), b.sample())

    def test_family_counts(self):
        space = LoopDomain(contains=lambda x: True, sample=lambda rng: rng.uniform(-1.0, 1.0, size=3))
        assert len(loop_family(np.zeros(3), "coord_rectangle", 1, 0, space)) == 9
        assert len(loop_family(np.zeros(3), "mixed", 2, 0, space)) == 11

    def test_family_rejections(self, plane):
        with pytest.raises(RejectedInputError):
            loop_family(np.zeros(2), "random_polyline", 0, 0, plane)
        with pytest.raises(RejectedInputError):
            loop_family(np.zeros(2), "spiral", 1, 0, plane)
        with pytest.raises(RejectedInputError):
            loop_family(np.zeros(2), "geodesic_triangle", 1, 0, plane)
        outside = LoopDomain(contains=lambda x: False, sample=plane.sample)
        with pytest.raises(DomainError):
            loop_family(np.zeros(2), "mixed", 1, 0, outside)

    def test_geodesic_in_flat_space_is_straight(self):
        segment = geodesic_segment(lambda x: np.zeros((2, 2, 2)), np.array([0.0, 0.0]), np.array([1.0, 2.0]))
        npt.assert_allclose(segment.point(0.5), [0.5, 1.0], atol=1e-8)
        npt.assert_allclose(segment.velocity(0.25), [1.0, 2.0], atol=1e-8)
        assert segment.length == pytest.approx(np.sqrt(5.0), rel=1e-8)


class TestMatrixLog:
    def test_round_trip(self):
        generator = np.array([[0.1, 0.3, 0.0], [-0.3, 0.0, 0.2], [0.0, -0.2, -0.1]])
        npt.assert_allclose(matrix_log(expm(generator)), generator, atol=1e-12)

    def test_negative_axis_rejected(self):
        with pytest.raises(LogFailureError):
            matrix_log(-np.eye(2))
