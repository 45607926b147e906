#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Commandes de vérification : tenseurs, holonomie et suite complète.

Chaque contrôle produit un CheckRecord ; une erreur numérique sur un point
est capturée dans l'enregistrement et n'interrompt pas la commande.
"""

from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from . import closed_forms
from .curvature import (
    AnalyticGeometry,
    NumericGeometry,
    constant_curvature_defect,
    coordinate_blocks,
    curvature_pack,
    einstein_defect,
    symmetry_residuals,
)
from .errors import TractorHoloError
from .gaussian import (
    BIVARIATE,
    INDEPENDENCE,
    UNIVARIATE,
    ManifoldSpec,
    alpha_connection,
    alpha_connection_integral,
    christoffel,
    christoffel_from_metric,
    christoffel_lowered,
    fisher_oracle,
    metric,
    metric_from_potential,
    potential_sign_check,
    to_natural,
)
from .geometry import ManifoldId, Point, array_partial, orthonormalize
from .holonomy import (
    analyse_holonomy,
    cone_holonomy_crosscheck,
    cone_metric,
    independence_cone,
)
from .report import (
    CheckRecord,
    EnvironmentSection,
    VerificationReport,
    check_record,
    failure_record,
    holonomy_section,
    report_record,
)
from .tractor import (
    ConformalFactor,
    TractorConnection,
    coordinate_frame,
    conformal_change_matrix,
    connection_gauge_residual,
    fisher_rao_connection,
    solve_parallel_tractor,
    tractor_curvature,
    tractor_derivative,
    tractor_gram,
)
from .transport import LineSegment, parallel_transport


TENSOR_STREAM = 2 ** 21
PROPERTY_STREAM = 2 ** 22
CLOSURE_TOL = 1e-6
PARALLEL_TOL = 1e-6
GAP_TARGET = 1e3

EXPECTED = {
    ManifoldId.BIVARIATE: {"dimension": 21, "label": "SO^0(1,6)", "anchor": "Hol(G, [g]) = SO^0(1,6)"},
    ManifoldId.INDEPENDENCE: {"dimension": 10, "label": "SO^0(1,4)", "anchor": "Hol(I, [g]) = SO^0(1,4)"},
}
MANIFOLD_NAMES = {ManifoldId.BIVARIATE: "bivariate", ManifoldId.INDEPENDENCE: "independence"}


def _environment(config) -> EnvironmentSection:
    return EnvironmentSection(seed=config.seed, config_hash=config.config_hash())


def _guarded(records: List[CheckRecord], name: str, anchor: str, build: Callable[[], List[CheckRecord]]):
    """Ajoute les enregistrements produits par `build`, ou un échec si une erreur survient"""
    try:
        records.extend(build())
    except (TractorHoloError, np.linalg.LinAlgError, ArithmeticError) as exc:
        logger.warning(f"[verify] {name} : {type(exc).__name__}: {exc}")
        records.append(failure_record(name, anchor, exc))


def _sample_points(m: ManifoldSpec, config, count: int, stream: int) -> List[Point]:
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(stream,)))
    return config.domain_box().sample(m, rng, count)


def _mismatches(computed: np.ndarray, printed: np.ndarray, tol: float) -> List[Dict]:
    """Entrées (indices à partir de 1) où l'affichage imprimé diffère du calcul"""
    out = []
    for index in zip(*np.nonzero(np.abs(computed - printed) > tol)):
        out.append({
            "index": [int(i) + 1 for i in index],
            "computed": float(computed[index]),
            "printed": float(printed[index]),
        })
    return out


# ---------------------------------------------------------------------------
# Tenseurs
# ---------------------------------------------------------------------------

def _bivariate_tensor_records(points: List[Point], config) -> List[CheckRecord]:
    records: List[CheckRecord] = []
    base = points[0]
    tol = config.check_tol

    def scal_records():
        values = [curvature_pack(BIVARIATE, p).scal for p in points]
        return [
            check_record("scal", closed_forms.SCAL_ANCHOR_G, values[0], closed_forms.G_SCAL, tol),
            check_record("scal_random_points", closed_forms.SCAL_ANCHOR_G, values, closed_forms.G_SCAL, tol,
                         points=len(values)),
        ]

    def metric_records():
        deviation = max(float(np.max(np.abs(
            closed_forms.to_display(metric(BIVARIATE, p).entries) - closed_forms.g_metric(p.coords))))
            for p in points)
        return [check_record("metric_closed_form", "Fisher-Rao metric on G", deviation, 0.0, tol)]

    def christoffel_records():
        worst = np.zeros((5, 5, 5))
        printed_worst = np.zeros((5, 5, 5))
        for p in points:
            computed = closed_forms.to_display(christoffel(BIVARIATE, p).entries)
            worst = np.maximum(worst, np.abs(computed - closed_forms.g_christoffel_corrected(p.coords)))
            printed_worst = np.maximum(printed_worst, np.abs(computed - closed_forms.g_christoffel(p.coords)))
        computed = closed_forms.to_display(christoffel(BIVARIATE, base).entries)
        printed = closed_forms.g_christoffel(base.coords)
        fd = christoffel_from_metric(BIVARIATE, base).entries - christoffel(BIVARIATE, base).entries
        errata = [list(key) for key in sorted(closed_forms.G_CHRISTOFFEL_ERRATA)]
        return [
            check_record("christoffel_closed_form", "non-vanishing components of ∇, errata applied",
                         float(np.max(worst)), 0.0, tol, points=len(points), errata=errata),
            report_record("christoffel_printed", "non-vanishing components of ∇, as printed",
                          float(np.max(printed_worst)), 0.0,
                          mismatched_entries=[[int(i) + 1 for i in idx]
                                              for idx in zip(*np.nonzero(printed_worst > tol))],
                          base_mismatches=_mismatches(computed, printed, tol)),
            check_record("christoffel_vs_metric_derivatives", "Γ = ½ g⁻¹(∂g + ∂g − ∂g)",
                         float(np.max(np.abs(fd))), 0.0, config.fd_tol),
        ]

    def riemann_records():
        blocks_worst: Dict[Tuple[int, int], float] = {}
        printed_worst: Dict[Tuple[int, int], float] = {}
        base_mismatch: Dict[str, List[Dict]] = {}
        for k, p in enumerate(points):
            computed = closed_forms.G_RIEMANN_SIGN * closed_forms.to_display(curvature_pack(BIVARIATE, p).riemann.entries)
            corrected = closed_forms.g_riemann_blocks_corrected(p.coords)
            for (a, b), block in closed_forms.g_riemann_blocks(p.coords).items():
                side = computed[a - 1, b - 1]
                blocks_worst[(a, b)] = max(blocks_worst.get((a, b), 0.0),
                                           float(np.max(np.abs(side - corrected[(a, b)]))))
                printed_worst[(a, b)] = max(printed_worst.get((a, b), 0.0), float(np.max(np.abs(side - block))))
                if k == 0:
                    base_mismatch[f"R_{a}{b}cd"] = _mismatches(side, block, tol)
        keys = sorted(blocks_worst)
        names = [f"R_{a}{b}cd" for a, b in keys]
        return [
            check_record("riemann_blocks_closed_form", "R_abcd blocks, opposite overall sign, errata applied",
                         [blocks_worst[key] for key in keys], 0.0, tol, blocks=names,
                         errata=[list(key) for key in sorted(closed_forms.G_RIEMANN_ERRATA)]),
            report_record("riemann_blocks_printed", "R_abcd blocks, opposite overall sign, as printed",
                          [printed_worst[key] for key in keys], 0.0, blocks=names,
                          base_mismatches=base_mismatch),
        ]

    def ricci_records():
        dev = max(float(np.max(np.abs(
            closed_forms.to_display(curvature_pack(BIVARIATE, p).ricci.entries) - closed_forms.g_ricci(p.coords))))
            for p in points)
        sect = max(float(np.max(np.abs(
            closed_forms.to_display(curvature_pack(BIVARIATE, p).sectional) - closed_forms.g_sectional(p.coords))))
            for p in points)
        return [
            check_record("ricci_closed_form", "Ric_ab on G", dev, 0.0, tol),
            check_record("sectional_closed_form", "sectional curvature matrix on G", sect, 0.0, tol),
        ]

    def weyl_records():
        order = closed_forms.G_DISPLAY_ORDER
        computed = [float(curvature_pack(BIVARIATE, p).weyl.entries[order[0], order[1], order[2], order[3]])
                    for p in points[:20]]
        printed = [closed_forms.g_weyl_1234(p.coords) for p in points[:20]]
        return [check_record("weyl_1234", "C_1234 = −σ2/4Δ²", computed, printed, tol, points=len(computed))]

    def einstein_records():
        defect = einstein_defect(BIVARIATE, base)
        return [check_record("einstein_obstruction", "G is not Einstein", defect, passed=defect > 1e-3)]

    def block_records():
        blocks = coordinate_blocks(curvature_pack(BIVARIATE, base).riemann)
        return [check_record("riemann_indecomposable", "one coupling block on G", [list(b) for b in blocks],
                             passed=len(blocks) == 1)]

    for name, anchor, build in (
        ("scal", closed_forms.SCAL_ANCHOR_G, scal_records),
        ("metric_closed_form", "Fisher-Rao metric on G", metric_records),
        ("christoffel", "non-vanishing components of ∇", christoffel_records),
        ("riemann_blocks", "R_abcd blocks", riemann_records),
        ("ricci_closed_form", "Ric_ab on G", ricci_records),
        ("weyl_1234", "C_1234 = −σ2/4Δ²", weyl_records),
        ("einstein_obstruction", "G is not Einstein", einstein_records),
        ("riemann_indecomposable", "one coupling block on G", block_records),
    ):
        _guarded(records, name, anchor, build)
    return records


def _independence_tensor_records(points: List[Point], config) -> List[CheckRecord]:
    records: List[CheckRecord] = []
    base = points[0]
    tol = config.check_tol
    m = INDEPENDENCE

    def natural_pack(p: Point):
        return curvature_pack(m, to_natural(p))

    def scal_records():
        packs = [natural_pack(p) for p in points]
        defects = [einstein_defect(m, to_natural(p)) for p in points]
        return [
            check_record("scal", closed_forms.SCAL_ANCHOR_I, packs[0].scal, closed_forms.I_SCAL, tol),
            check_record("scal_random_points", closed_forms.SCAL_ANCHOR_I, [pk.scal for pk in packs],
                         closed_forms.I_SCAL, tol, points=len(packs)),
            check_record("einstein_defect", "g is an Einstein metric", max(defects), None, 1e-9,
                         points=len(defects)),
        ]

    def closed_form_records():
        metric_dev = ricci_dev = sect_dev = riemann_dev = 0.0
        for p in points:
            pack = natural_pack(p)
            metric_dev = max(metric_dev, float(np.max(np.abs(pack.metric.entries - closed_forms.i_metric(p.coords)))))
            ricci_dev = max(ricci_dev, float(np.max(np.abs(pack.ricci.entries - closed_forms.i_ricci(p.coords)))))
            sect_dev = max(sect_dev, float(np.max(np.abs(pack.sectional - closed_forms.i_sectional(p.coords)))))
            for (a, b, c, d), value in closed_forms.i_riemann(p.coords).items():
                riemann_dev = max(riemann_dev, abs(pack.riemann.entries[a - 1, b - 1, c - 1, d - 1] - value))
        return [
            check_record("metric_closed_form", "Fisher-Rao metric on I", metric_dev, 0.0, tol),
            check_record("riemann_1313_2424", "R_1313 = −σ1^3 and R_2424 = −σ2^3", riemann_dev, 0.0, tol),
            check_record("ricci_closed_form", "Ric_ab on I", ricci_dev, 0.0, tol),
            check_record("sectional_closed_form", "sectional curvature matrix on I", sect_dev, 0.0, tol),
        ]

    def christoffel_records():
        natural = to_natural(base)
        lowered = christoffel_lowered(m, natural).entries
        upper = christoffel(m, natural).entries
        printed = closed_forms.i_christoffel(base.coords)
        mismatches = []
        for (a, b, c), value in printed["lowered"].items():
            computed = float(lowered[a - 1, b - 1, c - 1])
            if abs(computed - value) > tol:
                mismatches.append({"component": f"Γ_{a}{b},{c}", "computed": computed, "printed": value})
        for (a, b, c), value in printed["upper"].items():
            computed = float(upper[c - 1, a - 1, b - 1])
            if abs(computed - value) > tol:
                mismatches.append({"component": f"Γ_{a}{b}^{c}", "computed": computed, "printed": value})
        listed = len(printed["lowered"]) + len(printed["upper"])
        return [report_record("christoffel_closed_form", "connection components on I", len(mismatches), 0,
                              listed=listed, mismatches=mismatches)]

    def schouten_records():
        pack = natural_pack(base)
        g = pack.metric.entries
        return [
            check_record("schouten", "P = (Ric − Jg)/(n−2)", pack.schouten.entries, -g / 12.0, tol),
            check_record("schouten_trace", "J = scal/(2(n−1))", pack.j_trace, -1.0 / 3.0, tol),
        ]

    def weyl_records():
        computed, independent, printed = [], [], []
        for p in points[:20]:
            pack = natural_pack(p)
            g = pack.metric.entries
            computed.append(float(pack.weyl.entries[0, 1, 2, 3]))
            independent.append(g[0, 2] * g[1, 3] / 6.0)
            printed.append(closed_forms.i_weyl_1234(p.coords))
        return [
            check_record("weyl_1234", "C_1234 = (1/6) g_13 g_24 on I", computed, independent, tol),
            report_record("weyl_1234_printed", "C_1234 on I, printed value", computed, printed,
                          independent=independent),
        ]

    def product_records():
        pack = natural_pack(base)
        blocks = coordinate_blocks(pack.riemann)
        defect = constant_curvature_defect(pack)
        return [
            check_record("riemann_product_blocks", "I splits as two coupled pairs", [list(b) for b in blocks],
                         passed=blocks == [(0, 2), (1, 3)]),
            check_record("constant_curvature_defect", "Einstein but not of constant curvature", defect,
                         passed=defect > 1e-3),
        ]

    for name, anchor, build in (
        ("scal", closed_forms.SCAL_ANCHOR_I, scal_records),
        ("closed_forms", "I displays", closed_form_records),
        ("christoffel_closed_form", "connection components on I", christoffel_records),
        ("schouten", "P = (Ric − Jg)/(n−2)", schouten_records),
        ("weyl_1234", "C_1234 on I", weyl_records),
        ("product_structure", "I splits as two coupled pairs", product_records),
    ):
        _guarded(records, name, anchor, build)
    return records


def _common_tensor_records(m: ManifoldSpec, points: List[Point], config) -> List[CheckRecord]:
    """Identités de courbure, oracles intégraux, α-connexions et potentiel"""
    records: List[CheckRecord] = []
    base = points[0]

    def identity_records():
        worst: Dict[str, float] = {}
        for p in points:
            for key, value in symmetry_residuals(curvature_pack(m, p)).items():
                worst[key] = max(worst.get(key, 0.0), value)
        scale = max(1.0, float(np.max(np.abs(curvature_pack(m, base).riemann.entries))))
        out = [check_record(f"identity_{key}", "Riemann symmetries, first Bianchi, trace-free Weyl",
                            value / scale, None, config.check_tol) for key, value in sorted(worst.items())]
        numeric = NumericGeometry(AnalyticGeometry(m).metric, m.dim, "numeric").pack(base.array)
        out.append(check_record("scal_numeric_path", "scal from metric differences", numeric.scal,
                                curvature_pack(m, base).scal, config.numeric_tol))
        return out

    def oracle_records():
        oracle_points = points[:config.mc_points]
        z_scores, gh_dev = [], 0.0
        for k, p in enumerate(oracle_points):
            g = metric(m, p).entries
            for a in range(m.dim):
                for b in range(a, m.dim):
                    mc = fisher_oracle(m, p, a, b, config.mc_samples, seed=config.seed + k)
                    z_scores.append(abs(mc.value - g[a, b]) / max(mc.stderr, 1e-300))
            for chart_point in (p, to_natural(p)):
                g = metric(m, chart_point).entries
                for a in range(m.dim):
                    for b in range(a, m.dim):
                        gh = fisher_oracle(m, chart_point, a, b, method="gauss_hermite", order=config.gh_order)
                        gh_dev = max(gh_dev, abs(gh.value - g[a, b]) / max(1.0, abs(g[a, b])))
        return [
            check_record("fisher_monte_carlo", "g_ab = E[(∂a l)(∂b l)]", max(z_scores) if z_scores else 0.0,
                         None, config.oracle_sigmas, unit="standard errors", estimates=len(z_scores)),
            check_record("fisher_gauss_hermite", "g_ab = E[(∂a l)(∂b l)]", gh_dev, None, config.fd_tol),
        ]

    def alpha_records():
        natural = to_natural(base)
        alpha0 = alpha_connection(m, natural, 0.0).entries
        levi = christoffel_lowered(m, natural).entries
        integral = alpha_connection_integral(m, base, 0.0).entries
        source_levi = christoffel_lowered(m, base).entries
        hessian = metric_from_potential(m, natural).entries
        return [
            check_record("alpha0_is_levi_civita", "only α-connection compatible with g is α = 0",
                         float(np.max(np.abs(alpha0 - levi))), None, config.numeric_tol),
            check_record("alpha0_integral_source_chart", "E[(∂a∂b l + ½ ∂a l ∂b l) ∂c l]",
                         float(np.max(np.abs(integral - source_levi))), None, config.fd_tol),
            check_record("metric_is_potential_hessian", "g = ∂a∂b φ",
                         float(np.max(np.abs(hessian - metric(m, natural).entries))), None, config.fd_tol),
        ]

    def potential_records():
        result = potential_sign_check(m, base)
        out = [check_record("potential_mean", "∂φ/∂η = μ", result["implemented"], result["mean"], config.fd_tol)]
        if "printed" in result:
            out.append(report_record("potential_printed", "printed potential φ(θ)", result["printed"],
                                     result["mean"], implemented=result["implemented"]))
        return out

    for name, anchor, build in (
        ("identities", "Riemann symmetries", identity_records),
        ("oracle", "g_ab = E[(∂a l)(∂b l)]", oracle_records),
        ("alpha_connections", "α-connections", alpha_records),
        ("potential", "∂φ/∂η = μ", potential_records),
    ):
        _guarded(records, name, anchor, build)
    return records


def tensor_records(m: ManifoldSpec, config) -> List[CheckRecord]:
    points = [config.base_point(m)] + _sample_points(m, config, config.n_random, TENSOR_STREAM)
    logger.info(f"[tensors] {m.id.value} : {len(points)} points")
    specific = _bivariate_tensor_records if m is BIVARIATE else _independence_tensor_records
    records = specific(points, config) + _common_tensor_records(m, points, config)
    for record in records:
        record.name = f"{MANIFOLD_NAMES[m.id]}.{record.name}"
    return records


def cmd_tensors(config) -> VerificationReport:
    """Reproduction des tenseurs fermés au point de base et en n_random points"""
    report = VerificationReport(command="tensors", manifolds=[], environment=_environment(config))
    for m in config.manifold_specs():
        report.manifolds.append(MANIFOLD_NAMES[m.id])
        report.records.extend(tensor_records(m, config))
    return report


# ---------------------------------------------------------------------------
# Holonomie
# ---------------------------------------------------------------------------

def _holonomy_records(m: ManifoldSpec, est, config, prefix: str = "") -> List[CheckRecord]:
    expected = EXPECTED[m.id]
    anchor = expected["anchor"]
    diagnostics = est.diagnostics
    records = [
        check_record(f"{prefix}holonomy_dimension", anchor, est.dimension, expected["dimension"], 0.0),
        check_record(f"{prefix}holonomy_label", anchor, est.label, expected["label"],
                     passed=est.label == expected["label"]),
        check_record(f"{prefix}singular_value_gap", "gap at the reported rank", est.gap,
                     passed=est.gap > GAP_TARGET, minimum=GAP_TARGET),
        check_record(f"{prefix}algebra_h_skew", "Aᵀη + ηA = 0", diagnostics["skew_residual"], None, config.skew_tol),
        check_record(f"{prefix}bracket_closure", "closed under [·,·]", diagnostics["closure_residual"], None,
                     CLOSURE_TOL),
        check_record(f"{prefix}transport_preserves_h", "MᵀHM = H", diagnostics["transport_defect"], None,
                     config.skew_tol),
    ]
    subspaces = est.invariant_subspaces
    if m is BIVARIATE:
        records.append(check_record(f"{prefix}no_invariant_subspace", "no Hol(G,[g])-invariant subspace",
                                    len(subspaces), passed=not subspaces))
    else:
        line = subspaces[0] if len(subspaces) == 1 else None
        records.append(check_record(
            f"{prefix}positive_invariant_line", "scal(g) < 0 ⟺ ⟨V,V⟩ > 0",
            [] if line is None else line.basis[:, 0],
            passed=line is not None and line.basis.shape[1] == 1 and line.norm_type == "positive",
        ))
        if line is not None:
            records.append(check_record(f"{prefix}invariant_complement", "V⊥ is Hol-invariant",
                                        line.complement_residual, None, config.skew_tol))
    return records


def _parallel_tractor_records(est, config) -> List[CheckRecord]:
    found = solve_parallel_tractor(INDEPENDENCE, estimate=est, paths=config.parallel_paths, seed=config.seed)
    records = [check_record("parallel_tractor_count", "∇^T V = 0 has one solution line", len(found),
                            passed=len(found) == 1)]
    if len(found) != 1:
        return records
    parallel = found[0]
    v = parallel.tractor.array
    representative = np.zeros_like(v)
    representative[0] = 1.0
    representative[-1] = 1.0 / 12.0
    line = est.invariant_subspaces[0].basis[:, 0]
    cosine = abs(float(line @ v)) / (np.linalg.norm(line) * np.linalg.norm(v))
    angle = float(np.arccos(min(1.0, cosine)))
    records.extend([
        check_record("parallel_tractor_representative", "V = (1, 0, 1/12)", v, representative, config.fd_tol),
        check_record("parallel_tractor_norm", "⟨V,V⟩ = 1/6 > 0", parallel.inner, 1.0 / 6.0, config.fd_tol,
                     norm_type=parallel.norm_type),
        check_record("parallel_tractor_residual", "∇^T V = 0 along random loops", parallel.residual, None,
                     PARALLEL_TOL, paths=config.parallel_paths),
        check_record("parallel_tractor_matches_invariant_line", "invariant line = parallel tractor", angle, None,
                     config.fd_tol, unit="radian"),
    ])
    return records


def _cone_records(config) -> Tuple[List[CheckRecord], Optional[object]]:
    base = config.base_point(INDEPENDENCE)
    cone = independence_cone()
    records: List[CheckRecord] = []

    g_cone = cone_metric(base, 1.0).entries
    signature = orthonormalize(g_cone, config.degeneracy_tol, config.frame_tol).signature
    records.append(check_record("cone_signature", "signature of g_C", list(signature), [1, 4],
                                passed=signature == (1, 4)))
    records.append(report_record("cone_signature_printed", "the signature of g_C = (1,5)", list(signature), [1, 5],
                                 tractor_fiber_signature=[1, 5]))
    spatial = cone_metric(base, 2.0).entries[:4, :4] - 4.0 * g_cone[:4, :4]
    records.append(check_record("cone_t_scaling", "g_C(p, 2t) = 4 g_C(p, t) on the base block",
                                float(np.max(np.abs(spatial))), None, config.check_tol))

    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(PROPERTY_STREAM, 1)))
    points = config.domain_box().sample(INDEPENDENCE, rng, 10)
    analytic, numeric = 0.0, 0.0
    numeric_geometry = NumericGeometry(cone.metric, cone.dim, "cone-numeric", contains=cone.contains)
    for p in points:
        y = np.append(p.array, rng.uniform(0.5, 2.0))
        analytic = max(analytic, float(np.max(np.abs(cone.ricci(y)))))
        numeric = max(numeric, float(np.max(np.abs(numeric_geometry.ricci(y)))))
    records.append(check_record("cone_ricci_flat", "with Ricci-flat metric", analytic, None, config.check_tol))
    records.append(check_record("cone_ricci_flat_numeric", "with Ricci-flat metric", numeric, None,
                                config.numeric_tol))

    est = None
    try:
        est = cone_holonomy_crosscheck(base, 1.0, config)
        records.extend([
            check_record("cone_holonomy_dimension", "Hol_x(M,[g]) = Hol_{x,1}(C(M), g_C)", est.dimension, 10, 0.0),
            check_record("cone_holonomy_label", "Hol_x(M,[g]) = Hol_{x,1}(C(M), g_C)", est.label, "SO^0(1,4)",
                         passed=est.label == "SO^0(1,4)"),
            check_record("cone_algebra_skew", "algebra preserves g_C", est.diagnostics["skew_residual"], None,
                         config.skew_tol),
        ])
    except TractorHoloError as exc:
        records.append(failure_record("cone_holonomy_dimension", "Hol_x(M,[g]) = Hol_{x,1}(C(M), g_C)", exc))
    return records, est


def holonomy_records(m: ManifoldSpec, config) -> Tuple[List[CheckRecord], list]:
    name = MANIFOLD_NAMES[m.id]
    anchor = EXPECTED[m.id]["anchor"]
    records: List[CheckRecord] = []
    sections = []
    try:
        est = analyse_holonomy(m, config.base_point(m), config)
    except TractorHoloError as exc:
        records.append(failure_record("holonomy_dimension", anchor, exc))
        est = None
    if est is not None:
        sections.append(holonomy_section(name, est))
        records.extend(_holonomy_records(m, est, config))
        if m is INDEPENDENCE:
            _guarded(records, "parallel_tractor", "∇^T V = 0", lambda: _parallel_tractor_records(est, config))

    if est is not None and config.stability_check:
        for label, update in (("doubled_loops", {"loops": 2 * config.loops}),
                              ("halved_step", {"ode_steps": 2 * config.ode_steps})):
            try:
                other = analyse_holonomy(m, config.base_point(m), config.model_copy(update=update))
                records.append(check_record(f"stability_{label}", "dimension stable under refinement",
                                            other.dimension, est.dimension, 0.0))
            except TractorHoloError as exc:
                records.append(failure_record(f"stability_{label}", "dimension stable under refinement", exc))

    if est is not None and config.basepoint_check:
        try:
            other = analyse_holonomy(m, config.alternate_point(m), config)
            records.append(check_record("basepoint_independence", "holonomy groups at two points are conjugate",
                                        other.dimension, est.dimension, 0.0,
                                        alternate_point=list(config.alternate_point(m).coords)))
        except TractorHoloError as exc:
            records.append(failure_record("basepoint_independence", "holonomy groups are conjugate", exc))

    if m is INDEPENDENCE:
        cone, cone_est = _cone_records(config)
        records.extend(cone)
        if cone_est is not None:
            sections.append(holonomy_section("independence-cone", cone_est))
            if est is not None:
                records.append(check_record("cone_matches_conformal_holonomy", "Hol_x(M,[g]) = Hol_{x,1}(C(M), g_C)",
                                            cone_est.dimension, est.dimension, 0.0))

    for record in records:
        record.name = f"{name}.{record.name}"
    return records, sections


def cmd_holonomy(config) -> VerificationReport:
    """Estimation de l'holonomie conforme, classification, et pour I cône et tracteur parallèle"""
    report = VerificationReport(command="holonomy", manifolds=[], environment=_environment(config))
    for m in config.manifold_specs():
        report.manifolds.append(MANIFOLD_NAMES[m.id])
        records, sections = holonomy_records(m, config)
        report.records.extend(records)
        report.holonomy.extend(sections)
    return report


# ---------------------------------------------------------------------------
# Propriétés du fibré tracteur
# ---------------------------------------------------------------------------

def _tractor_property_records(m: ManifoldSpec, config) -> List[CheckRecord]:
    records: List[CheckRecord] = []
    name = MANIFOLD_NAMES[m.id]
    base = config.base_point(m)
    connection = fisher_rao_connection(m)
    x = base.array
    n = m.dim
    points = _sample_points(m, config, 10, PROPERTY_STREAM)

    def frame_records():
        frame = coordinate_frame(base, connection)
        signature = orthonormalize(frame.gram).signature
        return [check_record("tractor_gram_signature", "h_AB of signature (1, n+1)", list(signature), [1, n + 1],
                             passed=signature == (1, n + 1))]

    def derivative_records():
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(PROPERTY_STREAM, 2)))
        coeffs = rng.normal(size=(n + 2, n + 1))

        def field(y: np.ndarray) -> np.ndarray:
            return coeffs @ np.append(1.0, y)

        g = connection.geometry.metric(x)
        primary = max(
            abs(tractor_derivative(field, base, b, connection).sigma - (coeffs[0, 1 + b] - g[b] @ field(x)[1:n + 1]))
            for b in range(n)
        )
        return [check_record("tractor_derivative_primary_slot", "∇_b σ − X_b", primary, None, config.fd_tol)]

    def compatibility_records():
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(PROPERTY_STREAM, 3)))
        a1, a2 = rng.normal(size=(n + 2, n + 1)), rng.normal(size=(n + 2, n + 1))

        def v_field(y):
            return a1 @ np.append(1.0, y)

        def w_field(y):
            return a2 @ np.append(0.5, np.sin(y))

        worst = 0.0
        for b in range(n):
            lhs = float(array_partial(lambda y: v_field(y) @ tractor_gram(connection.geometry.metric(y)) @ w_field(y),
                                      x, b))
            dv = tractor_derivative(v_field, base, b, connection).array
            dw = tractor_derivative(w_field, base, b, connection).array
            h = tractor_gram(connection.geometry.metric(x))
            worst = max(worst, abs(lhs - (dv @ h @ w_field(x) + v_field(x) @ h @ dw)))
        return [check_record("tractor_metric_compatibility", "metric compatible connection", worst, None,
                             config.fd_tol)]

    def conformal_records():
        factor = ConformalFactor.linear([0.1] + [0.0] * (n - 1), name="0.1μ1")
        factor.check_gradient(x)
        rescaled = TractorConnection(NumericGeometry(
            lambda y: np.exp(2.0 * factor.value(y)) * connection.geometry.metric(y),
            n, "0.1μ1", contains=connection.contains), scale="fisher-rao|0.1μ1")
        gauge = max(connection_gauge_residual(connection, rescaled, factor, p.array) for p in points)
        h = tractor_gram(connection.geometry.metric(x))
        h_hat = tractor_gram(rescaled.geometry.metric(x))
        c = conformal_change_matrix(connection.geometry.metric(x), factor.value(x), factor.grad(x))
        inverse = factor.inverse()
        back = conformal_change_matrix(rescaled.geometry.metric(x), inverse.value(x), inverse.grad(x))
        return [
            check_record("tractor_connection_conformal_invariance", "conformally invariant connection", gauge,
                         None, config.fd_tol, points=len(points)),
            check_record("tractor_metric_conformal_invariance", "h is conformally invariant",
                         float(np.max(np.abs(c.T @ h_hat @ c - h))), None, config.lin_tol),
            check_record("conformal_change_round_trip", "Υ then −Υ", float(np.max(np.abs(back @ c - np.eye(n + 2)))),
                         None, config.lin_tol),
        ]

    def transport_records():
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(PROPERTY_STREAM, 4)))
        target = config.domain_box().sample(m, rng, 1)[0].array
        result = parallel_transport(connection, LineSegment(x, target), steps_per_unit=config.ode_steps,
                                    min_steps=config.min_steps, tol=config.transport_tol)
        u = result.matrix
        defect = float(np.max(np.abs(u.T @ connection.fiber_metric(target) @ u - connection.fiber_metric(x))))
        length = float(np.linalg.norm(target - x))
        return [check_record("tractor_transport_preserves_h", "MᵀHM = H", defect / max(length, 1.0), None,
                             config.skew_tol, path_length=length)]

    def curvature_records():
        omega = connection.curvature_operators(x)
        h = connection.fiber_metric(x)
        skew = max(float(np.max(np.abs(omega[a, b].T @ h + h @ omega[a, b])))
                   for a in range(n) for b in range(n))
        antisym = float(np.max(np.abs(omega + np.swapaxes(omega, 0, 1))))
        loop = tractor_curvature(base, 0, 2, connection, method="loop")
        scale = max(1.0, float(np.max(np.abs(omega[0, 2]))))
        return [
            check_record("tractor_curvature_h_skew", "ΩᵀH + HΩ = 0", skew, None, config.skew_tol * 10),
            check_record("tractor_curvature_antisymmetry", "Ω_ab = −Ω_ba", antisym, None, config.lin_tol),
            report_record("tractor_curvature_loop_vs_fd", "log M ≈ −ε²Ω",
                          float(np.max(np.abs(loop - omega[0, 2]))) / scale, 0.0, plane=[1, 3]),
        ]

    builders = [
        ("tractor_gram_signature", frame_records),
        ("tractor_derivative", derivative_records),
        ("tractor_metric_compatibility", compatibility_records),
        ("tractor_conformal", conformal_records),
        ("tractor_transport", transport_records),
        ("tractor_curvature", curvature_records),
    ]
    if m is INDEPENDENCE:
        def einstein_field_records():
            v = np.zeros(n + 2)
            v[0], v[-1] = 1.0, 1.0 / 12.0
            worst = max(float(np.max(np.abs(tractor_derivative(lambda y: v, p, b, connection).array)))
                        for p in points for b in range(n))
            return [check_record("parallel_tractor_constant_field", "∇^T V = 0 for V = (1, 0, 1/12)", worst, None,
                                 config.check_tol)]
        builders.append(("parallel_tractor_constant_field", einstein_field_records))

    for label, build in builders:
        _guarded(records, label, "tractor connection", build)
    for record in records:
        record.name = f"{name}.{record.name}"
    return records


def _univariate_records(config) -> List[CheckRecord]:
    p = Point.source(UNIVARIATE.id, (0.3, 1.7))
    pack = curvature_pack(UNIVARIATE, p)
    k = float(pack.sectional[0, 1])
    return [
        check_record("univariate.gaussian_curvature", "K = −1/2", k, -0.5, config.check_tol),
        check_record("univariate.scal", "scal = −1", pack.scal, -1.0, config.check_tol),
    ]


def cmd_verify_all(config) -> Tuple[VerificationReport, int]:
    """
    Les deux suites sur G et I, plus les propriétés du fibré tracteur

    Returns:
        (rapport, code de sortie 0 si tout passe sinon 1)
    """
    report = VerificationReport(command="verify-all", manifolds=[], environment=_environment(config))
    for m in config.manifold_specs():
        logger.info(f"[verify-all] {m.id.value}")
        report.manifolds.append(MANIFOLD_NAMES[m.id])
        report.records.extend(tensor_records(m, config))
        report.records.extend(_tractor_property_records(m, config))
        records, sections = holonomy_records(m, config)
        report.records.extend(records)
        report.holonomy.extend(sections)
    _guarded(report.records, "univariate", "K = −1/2", lambda: _univariate_records(config))
    status = 0 if report.passed else 1
    logger.info(f"[verify-all] {len(report.records)} enregistrements, {len(report.failures)} échecs")
    return report, status
