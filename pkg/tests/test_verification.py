"""End-to-end verification commands on reduced configurations."""

import numpy as np
import numpy.testing as npt
import pytest

from tractor_holo.core import closed_forms
from tractor_holo.core.curvature import curvature_pack
from tractor_holo.core.gaussian import BIVARIATE, christoffel
from tractor_holo.core.verification import cmd_holonomy, cmd_tensors, cmd_verify_all


def failed(report):
    return [(r.name, r.detail.get("error", r.detail.get("deviation"))) for r in report.failures]


@pytest.fixture
def g_points(g_base, g_point, box, rng):
    return [g_base, g_point] + box.sample(BIVARIATE, rng, 20)


class TestClosedForms:
    def test_christoffel_matches_corrected_display(self, g_points):
        for p in g_points:
            computed = closed_forms.to_display(christoffel(BIVARIATE, p).entries)
            expected = closed_forms.g_christoffel_corrected(p.coords)
            for c in range(5):
                npt.assert_allclose(computed[c], expected[c], atol=1e-8, err_msg=f"Γ^{c + 1} at {p.coords}")

    def test_riemann_blocks_match_corrected_display(self, g_points):
        for p in g_points:
            computed = closed_forms.G_RIEMANN_SIGN * closed_forms.to_display(
                curvature_pack(BIVARIATE, p).riemann.entries)
            blocks = closed_forms.g_riemann_blocks_corrected(p.coords)
            assert len(blocks) == 10
            for (a, b), block in blocks.items():
                npt.assert_allclose(computed[a - 1, b - 1], block, atol=1e-8, err_msg=f"R_{a}{b}cd at {p.coords}")

    def test_corrected_blocks_are_antisymmetric(self, g_point):
        for block in closed_forms.g_riemann_blocks_corrected(g_point.coords).values():
            npt.assert_allclose(block, -block.T, atol=1e-12)

    def test_christoffel_errata_differ_from_printed(self, g_point):
        printed = closed_forms.g_christoffel(g_point.coords)
        corrected = closed_forms.g_christoffel_corrected(g_point.coords)
        changed = {tuple(int(i) + 1 for i in idx) for idx in zip(*np.nonzero(np.abs(printed - corrected) > 1e-6))}
        assert changed == set(closed_forms.G_CHRISTOFFEL_ERRATA)
        # the printed connection is not symmetric in its lower indices
        assert not np.allclose(printed, printed.transpose(0, 2, 1))
        npt.assert_allclose(corrected, corrected.transpose(0, 2, 1), atol=1e-14)

    def test_riemann_errata_differ_from_printed(self, g_point):
        printed = closed_forms.g_riemann_blocks(g_point.coords)
        corrected = closed_forms.g_riemann_blocks_corrected(g_point.coords)
        changed = set()
        for key in printed:
            for idx in zip(*np.nonzero(np.abs(printed[key] - corrected[key]) > 1e-6)):
                changed.add(key + tuple(int(i) + 1 for i in idx))
        assert changed == set(closed_forms.G_RIEMANN_ERRATA)


class TestTensorCommand:
    def test_both_manifolds(self, small_config):
        report = cmd_tensors(small_config)
        assert report.manifolds == ["bivariate", "independence"]
        assert report.passed, failed(report)
        names = {r.name for r in report.records}
        assert {"bivariate.scal", "bivariate.weyl_1234", "independence.schouten",
                "independence.riemann_product_blocks"} <= names

    def test_bivariate_displays_are_checked_with_errata(self, small_config):
        report = cmd_tensors(small_config.model_copy(update={"manifold": "bivariate"}))
        records = {r.name: r for r in report.records}
        for name in ("christoffel_closed_form", "riemann_blocks_closed_form"):
            assert records[f"bivariate.{name}"].kind == "check"
            assert records[f"bivariate.{name}"].passed
        printed = records["bivariate.riemann_blocks_printed"]
        assert printed.kind == "report"
        assert max(printed.computed) > 1e-3
        assert records["bivariate.christoffel_printed"].computed > 1e-3

    def test_printed_discrepancies_are_reported_not_failed(self, small_config):
        report = cmd_tensors(small_config.model_copy(update={"manifold": "independence"}))
        printed = {r.name: r for r in report.records if r.kind == "report"}
        assert "independence.weyl_1234_printed" in printed
        assert "independence.potential_printed" in printed
        assert all(r.passed for r in printed.values())


@pytest.mark.slow
class TestHolonomyCommand:
    def test_independence(self, small_config):
        report = cmd_holonomy(small_config.model_copy(update={"manifold": "independence"}))
        assert report.passed, failed(report)
        sections = {s.manifold: s for s in report.holonomy}
        assert sections["independence"].dimension == 10
        assert sections["independence"].label == "SO^0(1,4)"
        assert sections["independence-cone"].dimension == 10

    def test_verify_all(self, small_config):
        report, status = cmd_verify_all(small_config)
        assert status == 0, failed(report)
        assert report.command == "verify-all"
        assert any(r.name.startswith("univariate.") for r in report.records)
