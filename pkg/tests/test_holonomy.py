"""Holonomy algebra estimates, invariant subspaces, classification and the metric cone."""

import numpy as np
import numpy.testing as npt
import pytest

from tractor_holo.core.curvature import AnalyticGeometry
from tractor_holo.core.errors import AmbiguousRankError, RejectedInputError
from tractor_holo.core.gaussian import BIVARIATE, INDEPENDENCE
from tractor_holo.core.geometry import orthonormalize
from tractor_holo.core.holonomy import (
    HolonomyEstimate,
    InvariantSubspace,
    MetricCone,
    analyse_holonomy,
    classify_group,
    close_under_brackets,
    cone_holonomy_crosscheck,
    cone_metric,
    holonomy_algebra_estimate,
    independence_cone,
    invariant_subspaces,
)
from tractor_holo.core.tractor import solve_parallel_tractor

ROTATIONS = [
    np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]),
    np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]),
    np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
]


def synthetic_estimate(base, signature, dimension, basis=(), subspaces=(), gram=None):
    size = sum(signature)
    return HolonomyEstimate(
        base=base,
        coords=np.asarray(base.coords),
        connection="synthetic",
        signature=signature,
        algebra_basis=tuple(basis),
        coordinate_basis=tuple(basis),
        dimension=dimension,
        singular_values=(1.0,) * dimension,
        gap=float("inf"),
        gram=np.eye(size) if gram is None else gram,
        invariant_subspaces=tuple(subspaces),
    )


def line(kind):
    return InvariantSubspace(np.eye(6)[:, :1], kind, (1.0,), 0.0, 0.0)


class TestClassification:
    def test_full_algebra(self, i_base):
        assert classify_group(synthetic_estimate(i_base, (1, 5), 15)) == "SO^0(1,5)"
        assert classify_group(synthetic_estimate(i_base, (1, 5), 15), n=4) == "SO^0(1,5)"

    def test_fixed_line(self, i_base):
        assert classify_group(synthetic_estimate(i_base, (1, 5), 10, subspaces=[line("positive")])) == "SO^0(1,4)"
        assert classify_group(synthetic_estimate(i_base, (1, 5), 10, subspaces=[line("negative")])) == "SO^0(0,5)"

    def test_unclassified(self, i_base):
        assert classify_group(synthetic_estimate(i_base, (1, 5), 7)) == "unclassified"
        assert classify_group(synthetic_estimate(i_base, (1, 5), 10, subspaces=[line("null")])) == "unclassified"

    def test_dimension_mismatch(self, i_base):
        with pytest.raises(RejectedInputError):
            classify_group(synthetic_estimate(i_base, (1, 5), 15), n=5)


class TestAlgebraTools:
    def test_brackets_complete_so3(self):
        dimension, s, basis, gap, rounds, closure = close_under_brackets(ROTATIONS[:2], rank_tol=1e-6)
        assert dimension == 3
        assert len(basis) == 3
        assert closure < 1e-12
        assert rounds >= 1

    def test_invariant_axis_of_a_rotation(self, i_base):
        est = synthetic_estimate(i_base, (0, 3), 1, basis=[ROTATIONS[2]])
        subspace = invariant_subspaces(est).invariant_subspaces[0]
        npt.assert_allclose(subspace.basis[:, 0], [0.0, 0.0, 1.0], atol=1e-12)
        assert subspace.norm_type == "positive"
        assert subspace.invariance_residual < 1e-12
        assert subspace.complement_residual < 1e-12

    def test_no_invariant_subspace(self, i_base):
        est = synthetic_estimate(i_base, (0, 3), 3, basis=ROTATIONS)
        assert invariant_subspaces(est).invariant_subspaces == ()

    def test_wrong_manifold(self, i_base):
        with pytest.raises(RejectedInputError):
            holonomy_algebra_estimate(BIVARIATE, base=i_base)


class TestMetricCone:
    def test_ricci_flat(self, i_point, box, rng):
        cone = independence_cone()
        for p in [i_point] + box.sample(INDEPENDENCE, rng, 3):
            for t in (0.5, 1.0, 1.7):
                npt.assert_allclose(cone.ricci(np.append(p.coords, t)), 0.0, atol=1e-9)

    def test_signature_and_scaling(self, i_base):
        g1 = cone_metric(i_base, 1.0).entries
        g2 = cone_metric(i_base, 2.0).entries
        assert orthonormalize(g1).signature == (1, 4)
        npt.assert_allclose(g2[:4, :4], 4.0 * g1[:4, :4], atol=1e-14)
        assert g1[4, 4] == g2[4, 4] == -1.0

    def test_rejections(self, g_base, i_base):
        with pytest.raises(RejectedInputError):
            cone_metric(g_base, 1.0)
        with pytest.raises(RejectedInputError):
            cone_metric(i_base, 0.0)
        with pytest.raises(RejectedInputError):
            MetricCone(AnalyticGeometry(INDEPENDENCE), 0.0)


@pytest.mark.slow
class TestHolonomyEstimates:
    def test_independence(self, small_config):
        est = analyse_holonomy(INDEPENDENCE, config=small_config)
        assert est.signature == (1, 5)
        assert est.dimension == 10
        assert est.label == "SO^0(1,4)"
        assert est.gap > 1e3
        assert est.invariant_subspaces[0].norm_type == "positive"

    def test_bivariate(self, small_config):
        est = analyse_holonomy(BIVARIATE, config=small_config)
        assert est.dimension == 21
        assert est.label == "SO^0(1,6)"
        assert est.invariant_subspaces == ()
        assert solve_parallel_tractor(BIVARIATE, estimate=est) == []

    def test_parallel_tractor(self, small_config):
        found = solve_parallel_tractor(INDEPENDENCE, config=small_config, paths=small_config.parallel_paths)
        assert len(found) == 1
        npt.assert_allclose(found[0].tractor.array, [1.0, 0.0, 0.0, 0.0, 0.0, 1.0 / 12.0], atol=1e-5)
        assert found[0].inner == pytest.approx(1.0 / 6.0, abs=1e-5)
        assert found[0].norm_type == "positive"
        assert found[0].residual < 1e-6

    def test_cone_matches_tractor_holonomy(self, small_config):
        est = cone_holonomy_crosscheck(config=small_config)
        assert est.signature == (1, 4)
        assert est.dimension == 10
        assert est.label == "SO^0(1,4)"

    def test_ambiguous_rank(self, small_config):
        config = small_config.model_copy(update={
            "gap_min": 1e300, "loop_scheme": "coord_rectangle", "loop_scales": (0.1,), "curvature_points": 0,
        })
        with pytest.raises(AmbiguousRankError) as info:
            holonomy_algebra_estimate(INDEPENDENCE, config=config)
        assert len(info.value.singular_values) > 0
