"""Points, tensors, finite differences and signature-aware frames."""

import numpy as np
import numpy.testing as npt
import pytest

from tractor_holo.core.errors import DegeneracyError, InconsistencyError, RejectedInputError
from tractor_holo.core.geometry import (
    DOWN,
    UP,
    Chart,
    ManifoldId,
    Point,
    TensorValue,
    array_gradient,
    central_difference,
    contract,
    lower_index,
    orthonormalize,
    raise_index,
)


class TestPoint:
    def test_coordinates_are_floats(self):
        p = Point.source(ManifoldId.INDEPENDENCE, (0, 1, 2, 3))
        assert p.coords == (0.0, 1.0, 2.0, 3.0)
        assert p.chart is Chart.SOURCE
        assert p.dim == 4

    def test_wrong_length_rejected(self):
        with pytest.raises(RejectedInputError):
            Point.source(ManifoldId.BIVARIATE, (0.0, 0.0, 1.0, 1.0))

    def test_shifted_keeps_chart(self):
        p = Point.natural(ManifoldId.UNIVARIATE, (0.5, -0.25))
        q = p.shifted(1, -0.25)
        assert q.chart is Chart.NATURAL
        assert q.coords == (0.5, -0.5)


class TestTensorValue:
    def test_declared_symmetry_is_checked(self):
        with pytest.raises(InconsistencyError):
            TensorValue((DOWN, DOWN), np.array([[1.0, 2.0], [0.0, 1.0]]), symmetries=((0, 1),))

    def test_unequal_dimensions_rejected(self):
        with pytest.raises(RejectedInputError):
            TensorValue((DOWN, DOWN), np.zeros((2, 3)))

    def test_entries_are_read_only(self):
        t = TensorValue((DOWN,), np.ones(3))
        with pytest.raises(ValueError):
            t.entries[0] = 2.0

    def test_raise_then_lower_round_trip(self):
        g = TensorValue((DOWN, DOWN), np.array([[2.0, 0.5], [0.5, 1.0]]), symmetries=((0, 1),))
        v = TensorValue((DOWN,), np.array([1.0, -3.0]))
        up = raise_index(v, 0, g)
        assert up.valences == (UP,)
        npt.assert_allclose(lower_index(up, 0, g).entries, v.entries, atol=1e-14)

    def test_raise_contravariant_slot_rejected(self):
        g = TensorValue((DOWN, DOWN), np.eye(2))
        with pytest.raises(RejectedInputError):
            raise_index(TensorValue((UP,), np.ones(2)), 0, g)

    def test_slot_out_of_range(self):
        g = TensorValue((DOWN, DOWN), np.eye(2))
        with pytest.raises(RejectedInputError):
            raise_index(TensorValue((DOWN,), np.ones(2)), 1, g)
        with pytest.raises(RejectedInputError):
            lower_index(TensorValue((UP,), np.ones(2)), 3, g)

    def test_singular_metric_is_degenerate(self):
        g = TensorValue((DOWN, DOWN), np.array([[1.0, 1.0], [1.0, 1.0]]))
        with pytest.raises(DegeneracyError):
            raise_index(TensorValue((DOWN,), np.ones(2)), 0, g)

    def test_contract_mixed_pair(self):
        t = TensorValue((UP, DOWN), np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert contract(t, 0, 1) == pytest.approx(5.0)
        with pytest.raises(RejectedInputError):
            contract(TensorValue((DOWN, DOWN), np.eye(2)), 0, 1)


class TestFiniteDifferences:
    def test_central_difference_of_quadratic(self):
        p = Point.source(ManifoldId.UNIVARIATE, (1.5, 2.0))
        value = central_difference(lambda q: q.coords[0] ** 2 * q.coords[1], p, 0, inside=lambda q: True)
        assert value == pytest.approx(6.0, rel=1e-10)

    def test_stencil_outside_domain_raises(self):
        from tractor_holo.core.errors import DomainError

        p = Point.source(ManifoldId.UNIVARIATE, (0.0, 1e-7))
        with pytest.raises(DomainError):
            central_difference(lambda q: q.coords[1], p, 1)

    def test_array_gradient_of_linear_map(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        grad = array_gradient(lambda x: a @ x, np.array([0.3, -0.1]))
        npt.assert_allclose(grad, a.T, atol=1e-9)


class TestOrthonormalize:
    def test_lorentzian_signature(self):
        frame = orthonormalize(np.diag([2.0, -3.0, 0.5]))
        assert frame.signature == (1, 2)
        npt.assert_allclose(frame.matrix.T @ np.diag([2.0, -3.0, 0.5]) @ frame.matrix, frame.eta, atol=1e-12)

    def test_tractor_type_gram(self):
        gram = np.zeros((4, 4))
        gram[0, 3] = gram[3, 0] = 1.0
        gram[1:3, 1:3] = np.eye(2)
        assert orthonormalize(gram).signature == (1, 3)

    def test_degenerate_form(self):
        with pytest.raises(DegeneracyError) as info:
            orthonormalize(np.diag([1.0, 0.0, 1.0]))
        assert info.value.smallest_eigenvalue == pytest.approx(0.0)

    def test_non_symmetric_form(self):
        with pytest.raises(RejectedInputError):
            orthonormalize(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_frame_change_round_trip(self):
        frame = orthonormalize(np.diag([1.0, -1.0, 4.0]))
        operator = np.arange(9.0).reshape(3, 3)
        npt.assert_allclose(frame.from_frame(frame.to_frame(operator)), operator, atol=1e-12)
