#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tenseurs de courbure : Riemann, Ricci, scalaire, sectionnelle, Schouten, Weyl.

Convention : R^a_bcd = ∂cΓ^a_db − ∂dΓ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb,
R_abcd = g_ae R^e_bcd, Ric_ab = R^c_acb, k_ab = R_abab / (g_aa g_bb − g_ab²).

Deux chemins de calcul partagent l'assemblage : AnalyticGeometry (Christoffel
fermés et dérivées exactes) et NumericGeometry (différences centrées de la
métrique, utilisée pour les métriques conformes et le cône).
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from .errors import DegeneracyError, RejectedInputError
from .gaussian import (
    ManifoldSpec,
    as_source,
    domain_check,
    inverse_map_derivatives,
    require_domain,
    source_connection,
    source_metric_array,
)
from .geometry import DOWN, Chart, Point, TensorValue, array_gradient


ANALYTIC_TOL = 1e-8
NUMERIC_TOL = 1e-5


@dataclass(frozen=True)
class CurvaturePack:
    """Ensemble des tenseurs de courbure en un point"""
    metric: TensorValue
    riemann: TensorValue
    ricci: TensorValue
    scal: float
    sectional: np.ndarray
    schouten: Optional[TensorValue]
    j_trace: Optional[float]
    weyl: Optional[TensorValue]

    @property
    def dim(self) -> int:
        return self.metric.dim


def riemann_from_connection(g: np.ndarray, gamma: np.ndarray, d_gamma: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Args:
        g: métrique g_ab
        gamma: Γ^c_ab rangé [c, a, b]
        d_gamma: ∂_e Γ^c_ab rangé [e, c, a, b]

    Returns:
        (R^a_bcd, R_abcd)
    """
    up = (np.einsum("cadb->abcd", d_gamma)
          - np.einsum("dacb->abcd", d_gamma)
          + np.einsum("ace,edb->abcd", gamma, gamma)
          - np.einsum("ade,ecb->abcd", gamma, gamma))
    return up, np.einsum("ae,ebcd->abcd", g, up)


def ricci_from_connection(gamma: np.ndarray, d_gamma: np.ndarray) -> np.ndarray:
    """Ric_ab = R^c_acb sans former le tenseur de Riemann complet"""
    return (np.einsum("ccba->ab", d_gamma)
            - np.einsum("bcca->ab", d_gamma)
            + np.einsum("cce,eba->ab", gamma, gamma)
            - np.einsum("cbe,eca->ab", gamma, gamma))


def schouten_from_ricci(g: np.ndarray, ric: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """(P_ab, J, scal) avec J = scal/(2(n−1)) et P = (Ric − J g)/(n−2)"""
    n = g.shape[0]
    if n <= 2:
        raise RejectedInputError("Le tenseur de Schouten exige n ≥ 3")
    scal = float(np.einsum("ab,ab->", np.linalg.inv(g), ric))
    j_trace = scal / (2.0 * (n - 1))
    return (ric - j_trace * g) / (n - 2), j_trace, scal


def weyl_from_parts(g: np.ndarray, riemann_low: np.ndarray, ric: np.ndarray, scal: float) -> np.ndarray:
    """Décomposition standard de R avec le terme (g_ac g_bd − g_ad g_bc)"""
    n = g.shape[0]
    if n <= 3:
        raise RejectedInputError("Le tenseur de Weyl exige n ≥ 4")
    ricci_part = (np.einsum("ac,bd->abcd", ric, g)
                  - np.einsum("ad,bc->abcd", ric, g)
                  + np.einsum("bd,ac->abcd", ric, g)
                  - np.einsum("bc,ad->abcd", ric, g))
    metric_part = np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g)
    return (riemann_low
            - ricci_part / (n - 2)
            + scal / ((n - 1) * (n - 2)) * metric_part)


def sectional_matrix(g: np.ndarray, riemann_low: np.ndarray) -> np.ndarray:
    n = g.shape[0]
    k = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            area = g[a, a] * g[b, b] - g[a, b] ** 2
            k[a, b] = riemann_low[a, b, a, b] / area if area > 0 else np.nan
    return k


def assemble_pack(g: np.ndarray, gamma: np.ndarray, d_gamma: np.ndarray, tol: float = ANALYTIC_TOL) -> CurvaturePack:
    """Assemble tous les tenseurs de courbure à partir de (g, Γ, ∂Γ)"""
    n = g.shape[0]
    _, low = riemann_from_connection(g, gamma, d_gamma)
    ric = ricci_from_connection(gamma, d_gamma)
    scal = float(np.einsum("ab,ab->", np.linalg.inv(g), ric))
    schouten = j_trace = weyl = None
    if n >= 3:
        p_ab, j_trace, _ = schouten_from_ricci(g, ric)
        schouten = TensorValue((DOWN, DOWN), 0.5 * (p_ab + p_ab.T), symmetries=((0, 1),), sym_tol=tol)
    if n >= 4:
        weyl = TensorValue((DOWN,) * 4, weyl_from_parts(g, low, ric, scal), antisymmetries=((2, 3),), sym_tol=tol)
    return CurvaturePack(
        metric=TensorValue((DOWN, DOWN), g, symmetries=((0, 1),), sym_tol=tol),
        riemann=TensorValue((DOWN,) * 4, low, antisymmetries=((2, 3),), sym_tol=tol),
        ricci=TensorValue((DOWN, DOWN), ric, symmetries=((0, 1),), sym_tol=tol),
        scal=scal,
        sectional=sectional_matrix(g, low),
        schouten=schouten,
        j_trace=j_trace,
        weyl=weyl,
    )


class Geometry:
    """
    Métrique riemannienne évaluée sur des tableaux de coordonnées, avec sa
    connexion et ses courbures. Sert aussi d'échelle conforme pour les tracteurs.
    """

    name = "geometry"
    dim = 0
    tol = ANALYTIC_TOL

    def metric(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def connection(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(Γ^c_ab, ∂_e Γ^c_ab)"""
        raise NotImplementedError

    def christoffel(self, x: np.ndarray) -> np.ndarray:
        return self.connection(x)[0]

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(x)))

    def pack(self, x: np.ndarray) -> CurvaturePack:
        gamma, d_gamma = self.connection(x)
        return assemble_pack(self.metric(x), gamma, d_gamma, self.tol)

    def ricci(self, x: np.ndarray) -> np.ndarray:
        return ricci_from_connection(*self.connection(x))

    def schouten(self, x: np.ndarray) -> np.ndarray:
        p_ab, _, _ = schouten_from_ricci(self.metric(x), self.ricci(x))
        return 0.5 * (p_ab + p_ab.T)

    def tractor_data(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(g, Γ, P) en un seul passage"""
        g = self.metric(x)
        gamma, d_gamma = self.connection(x)
        p_ab, _, _ = schouten_from_ricci(g, ricci_from_connection(gamma, d_gamma))
        return g, gamma, 0.5 * (p_ab + p_ab.T)

    def einstein_defect(self, x: np.ndarray) -> float:
        g = self.metric(x)
        ric = self.ricci(x)
        scal = float(np.einsum("ab,ab->", np.linalg.inv(g), ric))
        return float(np.max(np.abs(ric - scal / g.shape[0] * g)))


class AnalyticGeometry(Geometry):
    """Métrique de Fisher-Rao en carte source, connexion et dérivées exactes"""

    def __init__(self, m: ManifoldSpec):
        self.manifold = m
        self.dim = m.dim
        self.name = f"fisher-rao:{m.id.value}"

    def metric(self, x: np.ndarray) -> np.ndarray:
        return source_metric_array(self.manifold, np.asarray(x, dtype=float))

    def connection(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return source_connection(self.manifold, np.asarray(x, dtype=float))

    def contains(self, x: np.ndarray) -> bool:
        return domain_check(Point.source(self.manifold.id, x))


class NumericGeometry(Geometry):
    """
    Connexion et courbure par différences centrées imbriquées d'une métrique

    Args:
        metric_fn: x ↦ g(x)
        dim: dimension
        name: identifiant de l'échelle
        contains: prédicat de domaine
        inner_step: pas relatif pour ∂g
        outer_step: pas relatif pour ∂Γ
    """

    tol = NUMERIC_TOL

    def __init__(
        self,
        metric_fn: Callable[[np.ndarray], np.ndarray],
        dim: int,
        name: str,
        contains: Optional[Callable[[np.ndarray], bool]] = None,
        inner_step: float = 1e-4,
        outer_step: float = 1e-3,
    ):
        self._metric_fn = metric_fn
        self.dim = dim
        self.name = name
        self._contains = contains
        self.inner_step = inner_step
        self.outer_step = outer_step

    def metric(self, x: np.ndarray) -> np.ndarray:
        g = np.asarray(self._metric_fn(np.asarray(x, dtype=float)), dtype=float)
        return 0.5 * (g + g.T)

    def christoffel(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = self.metric(x)
        dg = array_gradient(self.metric, x, self.inner_step)
        lowered = 0.5 * (dg + np.einsum("bad->abd", dg) - np.einsum("dab->abd", dg))
        gamma = np.einsum("cd,abd->cab", np.linalg.inv(g), lowered)
        return 0.5 * (gamma + np.swapaxes(gamma, 1, 2))

    def connection(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        return self.christoffel(x), array_gradient(self.christoffel, x, self.outer_step)

    def contains(self, x: np.ndarray) -> bool:
        if self._contains is None:
            return super().contains(x)
        return bool(self._contains(x))


def rescale(base: Geometry, upsilon: Callable[[np.ndarray], float], name: Optional[str] = None) -> NumericGeometry:
    """Métrique ĝ = e^{2Υ} g, connexion et courbures numériques"""
    return NumericGeometry(
        lambda x: np.exp(2.0 * upsilon(x)) * base.metric(x),
        base.dim,
        name or f"e^(2Υ)·{base.name}",
        contains=base.contains,
    )


# ---------------------------------------------------------------------------
# Opérations par variété
# ---------------------------------------------------------------------------

def _covariant_transform(tensor: np.ndarray, jac: np.ndarray) -> np.ndarray:
    out = tensor
    for axis in range(tensor.ndim):
        out = np.moveaxis(np.tensordot(out, jac, axes=([axis], [0])), -1, axis)
    return out


def curvature_pack(m: ManifoldSpec, p: Point, method: str = "analytic") -> CurvaturePack:
    """
    Courbures au point p, exprimées dans la carte de p

    Args:
        method: 'analytic' (Christoffel fermés) ou 'numeric' (différences de la métrique)
    """
    if p.manifold is not m.id:
        raise RejectedInputError(f"Point de {p.manifold.value} pour {m.id.value}")
    require_domain(p)
    q = as_source(p)
    if method == "analytic":
        geometry: Geometry = AnalyticGeometry(m)
    elif method == "numeric":
        analytic = AnalyticGeometry(m)
        geometry = NumericGeometry(analytic.metric, m.dim, analytic.name, contains=analytic.contains)
    else:
        raise RejectedInputError(f"Méthode de courbure inconnue : {method}")
    pack = geometry.pack(q.array)
    if p.chart is Chart.SOURCE:
        return pack

    jac, _ = inverse_map_derivatives(m, q)
    g = _covariant_transform(pack.metric.entries, jac)
    low = _covariant_transform(pack.riemann.entries, jac)
    ric = _covariant_transform(pack.ricci.entries, jac)
    tol = geometry.tol
    schouten = weyl = None
    if pack.schouten is not None:
        schouten = TensorValue((DOWN, DOWN), _covariant_transform(pack.schouten.entries, jac),
                               symmetries=((0, 1),), sym_tol=tol)
    if pack.weyl is not None:
        weyl = TensorValue((DOWN,) * 4, _covariant_transform(pack.weyl.entries, jac),
                           antisymmetries=((2, 3),), sym_tol=tol)
    return CurvaturePack(
        metric=TensorValue((DOWN, DOWN), 0.5 * (g + g.T), symmetries=((0, 1),), sym_tol=tol),
        riemann=TensorValue((DOWN,) * 4, low, antisymmetries=((2, 3),), sym_tol=tol),
        ricci=TensorValue((DOWN, DOWN), ric, symmetries=((0, 1),), sym_tol=tol),
        scal=pack.scal,
        sectional=sectional_matrix(g, low),
        schouten=schouten,
        j_trace=pack.j_trace,
        weyl=weyl,
    )


def riemann(m: ManifoldSpec, p: Point) -> TensorValue:
    return curvature_pack(m, p).riemann


def ricci(m: ManifoldSpec, p: Point) -> TensorValue:
    return curvature_pack(m, p).ricci


def scalar(m: ManifoldSpec, p: Point) -> float:
    return curvature_pack(m, p).scal


def sectional(m: ManifoldSpec, p: Point, a: int, b: int) -> float:
    """Courbure sectionnelle du 2-plan de coordonnées (a, b)"""
    if a == b:
        raise RejectedInputError("Le plan sectionnel exige a ≠ b")
    pack = curvature_pack(m, p)
    g = pack.metric.entries
    area = g[a, a] * g[b, b] - g[a, b] ** 2
    if area <= 1e-12 * max(1.0, abs(g[a, a] * g[b, b])):
        raise DegeneracyError(f"Plan ({a}, {b}) dégénéré", smallest_eigenvalue=float(area))
    return float(pack.riemann.entries[a, b, a, b] / area)


def schouten(m: ManifoldSpec, p: Point) -> Tuple[TensorValue, float]:
    if m.dim <= 2:
        raise RejectedInputError("Le tenseur de Schouten exige n ≥ 3")
    pack = curvature_pack(m, p)
    return pack.schouten, pack.j_trace


def weyl(m: ManifoldSpec, p: Point) -> TensorValue:
    if m.dim <= 3:
        raise RejectedInputError("Le tenseur de Weyl exige n ≥ 4")
    return curvature_pack(m, p).weyl


def einstein_defect(m: ManifoldSpec, p: Point) -> float:
    """max |Ric_ab − (scal/n) g_ab|"""
    pack = curvature_pack(m, p)
    g = pack.metric.entries
    return float(np.max(np.abs(pack.ricci.entries - pack.scal / m.dim * g)))


def conformal_rescale(
    m: ManifoldSpec,
    upsilon: Callable[[np.ndarray], float],
    p: Optional[Point] = None,
) -> NumericGeometry:
    """
    Évaluateurs de ĝ = e^{2Υ} g (carte source) et de ses courbures numériques

    Args:
        upsilon: Υ évalué sur les coordonnées source
        p: point optionnel dont on vérifie l'appartenance au domaine
    """
    if p is not None:
        require_domain(p)
    geometry = rescale(AnalyticGeometry(m), upsilon)
    logger.debug(f"[conformal_rescale] échelle {geometry.name}")
    return geometry


def raised_weyl(pack: CurvaturePack) -> np.ndarray:
    """C^a_bcd"""
    return np.einsum("ae,ebcd->abcd", np.linalg.inv(pack.metric.entries), pack.weyl.entries)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def symmetry_residuals(pack: CurvaturePack) -> Dict[str, float]:
    """Écarts aux identités de Riemann, de Ricci et au caractère sans trace de Weyl"""
    r = pack.riemann.entries
    ginv = np.linalg.inv(pack.metric.entries)
    out = {
        "antisym_first_pair": float(np.max(np.abs(r + np.swapaxes(r, 0, 1)))),
        "antisym_second_pair": float(np.max(np.abs(r + np.swapaxes(r, 2, 3)))),
        "pair_exchange": float(np.max(np.abs(r - np.transpose(r, (2, 3, 0, 1))))),
        "first_bianchi": float(np.max(np.abs(
            r + np.einsum("acdb->abcd", r) + np.einsum("adbc->abcd", r)))),
        "ricci_symmetry": float(np.max(np.abs(pack.ricci.entries - pack.ricci.entries.T))),
    }
    if pack.weyl is not None:
        c = pack.weyl.entries
        traces = [
            np.einsum("ac,abcd->bd", ginv, c),
            np.einsum("ad,abcd->bc", ginv, c),
            np.einsum("bc,abcd->ad", ginv, c),
            np.einsum("bd,abcd->ac", ginv, c),
            np.einsum("ab,abcd->cd", ginv, c),
        ]
        out["weyl_trace"] = float(max(np.max(np.abs(t)) for t in traces))
    if pack.schouten is not None:
        out["schouten_trace"] = float(abs(np.einsum("ab,ab->", ginv, pack.schouten.entries) - pack.j_trace))
    return out


def coordinate_blocks(t: TensorValue, rel_tol: float = 1e-10) -> List[Tuple[int, ...]]:
    """
    Composantes connexes du graphe de couplage des indices d'un tenseur :
    deux coordonnées sont liées si une composante non nulle les contient toutes deux.
    """
    entries = np.asarray(t.entries)
    n = entries.shape[0]
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    threshold = rel_tol * max(1.0, float(np.max(np.abs(entries))))
    for index in zip(*np.nonzero(np.abs(entries) > threshold)):
        first = find(int(index[0]))
        for other in index[1:]:
            root = find(int(other))
            if root != first:
                parent[root] = first
    groups: Dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(tuple(sorted(g)) for g in groups.values())


def constant_curvature_defect(pack: CurvaturePack) -> float:
    """max |R_abcd − K (g_ac g_bd − g_ad g_bc)| avec K = scal/(n(n−1))"""
    g = pack.metric.entries
    n = g.shape[0]
    k = pack.scal / (n * (n - 1))
    model = k * (np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g))
    return float(np.max(np.abs(pack.riemann.entries - model)))
