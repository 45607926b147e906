#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Formes closes de référence, transcrites telles qu'imprimées (coquilles comprises).

Les tableaux de G sont rangés dans l'ordre d'affichage (μ1, μ2, σ1, σ12, σ2) ;
G_DISPLAY_ORDER[k] donne l'indice de carte source correspondant à l'indice
affiché k. Les tableaux de I sont lus dans la carte naturelle, exprimés en
(μ1, μ2, σ1, σ2). Les indices des dictionnaires sont 1-based comme à l'affichage.

Les variantes *_corrected appliquent les errata G_CHRISTOFFEL_ERRATA et
G_RIEMANN_ERRATA ; ce sont elles que le calcul doit reproduire.
"""

from typing import Callable, Dict, List, Tuple

import numpy as np

from .geometry import ManifoldId


G_DISPLAY_ORDER = (0, 1, 2, 4, 3)

# Signe global des blocs R_abcd imprimés pour G par rapport à la convention
# R^a_bcd = ∂cΓ^a_db − ∂dΓ^a_cb + ΓΓ − ΓΓ utilisée dans tout le package.
G_RIEMANN_SIGN = -1.0

G_SCAL = -4.5
I_SCAL = -2.0
SCAL_ANCHOR_G = "scal = −9/2"
SCAL_ANCHOR_I = "scal = −2"


def _g_vars(coords) -> Tuple[float, float, float, float, float, float]:
    mu1, mu2, s1, s2, s12 = (float(c) for c in coords)
    return mu1, mu2, s1, s2, s12, s1 * s2 - s12 ** 2


def printed_potential_g(theta) -> float:
    t1, t2, t3, t4, t5 = theta
    delta = 1.0 / (4.0 * t3 * t5 - t4 ** 2)
    return float(np.log(2.0 * np.pi * np.sqrt(delta)) - delta * (t2 ** 2 * t3 - t1 * t2 * t4 + t1 ** 2 * t5))


def printed_potential_i(theta) -> float:
    t1, t2, t3, t4 = theta
    delta = 1.0 / (4.0 * t3 * t4)
    return float(np.log(2.0 * np.pi * np.sqrt(delta)) + delta * (t2 ** 2 * t3 + t1 ** 2 * t4))


PRINTED_POTENTIALS: Dict[ManifoldId, Callable] = {
    ManifoldId.BIVARIATE: printed_potential_g,
    ManifoldId.INDEPENDENCE: printed_potential_i,
}


def g_metric(coords) -> np.ndarray:
    _, _, s1, s2, s12, d = _g_vars(coords)
    d2 = d ** 2
    return np.array([
        [s2 / d, -s12 / d, 0, 0, 0],
        [-s12 / d, s1 / d, 0, 0, 0],
        [0, 0, s2 ** 2 / (2 * d2), -s12 * s2 / d2, s12 ** 2 / (2 * d2)],
        [0, 0, -s12 * s2 / d2, (s1 * s2 + s12 ** 2) / d2, -s1 * s12 / d2],
        [0, 0, s12 ** 2 / (2 * d2), -s1 * s12 / d2, s1 ** 2 / (2 * d2)],
    ], dtype=float)


def g_christoffel(coords) -> np.ndarray:
    """Γ^c_ab imprimés, rangés [c, a, b]"""
    _, _, s1, s2, s12, d = _g_vars(coords)
    h = 2 * d
    gamma = np.zeros((5, 5, 5))
    gamma[0] = [
        [0, 0, -s2 / h, s12 / h, 0],
        [0, 0, s12 / h, -s1 / h, 0],
        [-s2 / h, s12 / h, 0, 0, 0],
        [s12 / h, s1 / h, 0, 0, 0],
        [0, 0, 0, 0, 0],
    ]
    gamma[1] = [
        [0, 0, 0, -s2 / h, s12 / h],
        [0, 0, 0, s12 / h, -s1 / h],
        [0, 0, 0, 0, 0],
        [-s2 / h, s12 / h, 0, 0, 0],
        [s12 / h, s1 / h, 0, 0, 0],
    ]
    gamma[2] = [
        [1, 0, 0, 0, 0],
        [0, 0, 0, 0, 0],
        [0, 0, -s2 / d, s12 / d, 0],
        [0, 0, s12 / d, -s1 / d, 0],
        [0, 0, 0, 0, 0],
    ]
    gamma[3] = [
        [0, 0.5, 0, 0, 0],
        [0.5, 0, 0, 0, 0],
        [0, 0, 0, -s2 / h, s12 / h],
        [0, 0, -s2 / h, s12 / d, -s1 / h],
        [0, 0, s12 / h, -s1 / h, 0],
    ]
    gamma[4] = [
        [0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0],
        [0, 0, 0, 0, 0],
        [0, 0, 0, -s2 / h, s12 / h],
        [0, 0, 0, s12 / h, -s1 / h],
    ]
    return gamma


def _mean_cov_block(top: List[List[float]], bottom: List[List[float]]) -> np.ndarray:
    """Bloc 5×5 à lignes moyennes × colonnes covariance (top) et l'inverse (bottom)"""
    block = np.zeros((5, 5))
    block[0:2, 2:5] = top
    block[2:5, 0:2] = bottom
    return block


def _mean_cov_sign_block(mean: float, cov: List[List[float]]) -> np.ndarray:
    block = np.zeros((5, 5))
    block[0, 1], block[1, 0] = mean, -mean
    block[2:5, 2:5] = cov
    return block


def _g_riemann_brackets(coords) -> Dict[Tuple[int, int], np.ndarray]:
    """Contenu des crochets imprimés, avant le signe global"""
    _, _, s1, s2, s12, d = _g_vars(coords)
    q2, q3 = 4 * d ** 2, 4 * d ** 3
    h3 = 2 * d ** 3
    p = s1 * s2 + s12 ** 2
    blocks = {
        (1, 2): _mean_cov_sign_block(1 / (4 * d), [
            [0, -s2 / q2, s12 / q2],
            [s2 / q2, 0, -s1 / q2],
            [-s12 / q2, s1 / q2, 0],
        ]),
        (1, 3): _mean_cov_block(
            [[-s2 ** 3 / q3, s2 ** 2 * s12 / h3, -s2 * s12 ** 2 / q3],
             [s2 ** 2 * s12 / q3, -s2 * p / q3, s1 * s2 * s12 / q3]],
            [[s2 ** 2 / q3, -s2 ** 2 * s12 / q3],
             [-s2 ** 2 * s12 / h3, s2 * p / q3],
             [s2 * s12 ** 2 / q3, -s1 * s2 * s12 / q3]],
        ),
        (1, 4): _mean_cov_block(
            [[s2 ** 2 * s12 / h3, -s2 * (s1 * s2 + 3 * s12 ** 2) / q3, s12 * p / q3],
             [-s2 * s12 / h3, s12 * (3 * s1 * s2 + s12 ** 2) / q3, -s1 * p / q3]],
            [[-s2 ** 2 * s12 / h3, s2 * s12 / h3],
             [s2 * (s1 * s2 + 3 * s12 ** 2) / q3, -s12 * (3 * s1 * s2 + s12 ** 2) / q3],
             [-s12 * p / q3, s1 * p / q3]],
        ),
        (1, 5): _mean_cov_block(
            [[-s2 ** 2 * s12 ** 2 / q3, s12 * p / q3, -s1 * s12 ** 2 / q3],
             [s12 ** 3 / q3, -s1 * s12 ** 2 / h3, s1 ** 2 * s12 / q3]],
            [[s2 ** 2 * s12 ** 2 / q3, -s12 ** 3 / q3],
             [-s12 * p / q3, s1 * s12 ** 2 / h3],
             [s1 * s12 ** 2 / q3, -s1 ** 2 * s12 / q3]],
        ),
        (2, 3): _mean_cov_block(
            [[s2 ** 2 * s12 / q3, -s2 * s12 ** 2 / h3, s12 ** 3 / q3],
             [-s2 * s12 ** 2 / q3, s12 * p / q3, -s1 * s12 ** 2 / q3]],
            [[-s2 ** 2 * s12 / q3, s2 * s12 ** 2 / q3],
             [s2 * s12 ** 2 / h3, -s12 * p / q3],
             [-s12 ** 3 / q3, s1 * s12 ** 2 / q3]],
        ),
        (2, 4): _mean_cov_block(
            [[-s2 * p / q3, s12 * (3 * s1 * s2 + s12 ** 2) / q3, -s1 * s12 ** 2 / h3],
             [s12 * p / q3, -s1 * (s1 * s2 + 3 * s12 ** 2) / q3, s1 ** 2 * s12 / h3]],
            [[s2 * p / q3, -s12 * p / q3],
             [-s12 * (3 * s1 * s2 + s12 ** 2) / q3, s1 * (s1 * s2 + 3 * s12 ** 2) / q3],
             [s1 * s12 ** 2 / h3, -s1 ** 2 * s12 / h3]],
        ),
        (2, 5): _mean_cov_block(
            [[s1 * s2 * s12 / q3, -s1 * p / q3, s1 ** 2 * s12 / q3],
             [-s1 * s12 ** 2 / q3, s1 ** 2 * s12 / h3, -s1 ** 3 / q3]],
            [[-s1 * s2 * s12 / q3, s1 * s12 ** 2 / q3],
             [s1 * p / q3, -s1 ** 2 * s12 / h3],
             [-s1 ** 2 * s12 / q3, s1 ** 3 / q3]],
        ),
        (3, 4): _mean_cov_sign_block(s2 / q2, [
            [0, -s2 ** 2 / q3, s2 * s12 / q3],
            [s2 ** 2 / q3, 0, -s1 * s2 / q3],
            [-s2 * s12 / q3, s1 * s2 / q3, 0],
        ]),
        (3, 5): _mean_cov_sign_block(s12 / q2, [
            [0, s2 * s12 / q3, -s12 ** 2 / q3],
            [-s2 * s12 / q3, 0, s1 * s12 / q3],
            [s12 ** 2 / q3, -s1 * s12 / q3, 0],
        ]),
        (4, 5): _mean_cov_sign_block(-s1 / q2, [
            [0, -s1 * s2 / q3, s1 * s12 / q3],
            [s1 * s2 / q3, 0, -s1 ** 2 / q3],
            [-s1 * s12 / q3, s1 ** 2 / q3, 0],
        ]),
    }
    return blocks


def g_riemann_blocks(coords) -> Dict[Tuple[int, int], np.ndarray]:
    """Blocs R_abcd imprimés : clé (a, b) 1-based, tableau [c, d], signe global inclus"""
    return {key: -block for key, block in _g_riemann_brackets(coords).items()}


# ---------------------------------------------------------------------------
# Errata de G
# ---------------------------------------------------------------------------
#
# Valeurs corrigées des entrées imprimées fautives, en fonction de
# (σ1, σ2, σ12, Δ). Indices 1-based dans l'ordre affiché.
#
# Γ^c_ab, clé (c, a, b). Les composantes moyennes viennent de
# Γ^μ(μ', Σ') = −½ Σ'Σ⁻¹μ', les composantes covariance de
# Γ^Σ(Σ', Σ') = −Σ'Σ⁻¹Σ' ; l'affichage n'est pas symétrique en (a, b)
# pour les deux premières et porte 1/(2Δ) au lieu de 1/Δ pour le bloc σ2.
G_CHRISTOFFEL_ERRATA: Dict[Tuple[int, int, int], Callable[[float, float, float, float], float]] = {
    (1, 4, 2): lambda s1, s2, s12, d: -s1 / (2 * d),
    (2, 5, 2): lambda s1, s2, s12, d: -s1 / (2 * d),
    (5, 4, 4): lambda s1, s2, s12, d: -s2 / d,
    (5, 4, 5): lambda s1, s2, s12, d: s12 / d,
    (5, 5, 4): lambda s1, s2, s12, d: s12 / d,
    (5, 5, 5): lambda s1, s2, s12, d: -s1 / d,
}

# Contenu des crochets R_abcd (avant le signe global), clé (a, b, c, d).
# L'échange (μ1, σ1) ↔ (μ2, σ2) est une isométrie : les blocs 13, 14, 15 et
# 34 sont les images des blocs 25, 24, 23 et −45, et R_3412 = R_1234.
G_RIEMANN_ERRATA: Dict[Tuple[int, int, int, int], Callable[[float, float, float, float], float]] = {
    (1, 3, 3, 1): lambda s1, s2, s12, d: s2 ** 3 / (4 * d ** 3),
    (1, 4, 2, 3): lambda s1, s2, s12, d: -s2 * s12 ** 2 / (2 * d ** 3),
    (1, 4, 3, 2): lambda s1, s2, s12, d: s2 * s12 ** 2 / (2 * d ** 3),
    (1, 5, 1, 3): lambda s1, s2, s12, d: -s2 * s12 ** 2 / (4 * d ** 3),
    (1, 5, 3, 1): lambda s1, s2, s12, d: s2 * s12 ** 2 / (4 * d ** 3),
    (3, 4, 1, 2): lambda s1, s2, s12, d: -s2 / (4 * d ** 2),
    (3, 4, 2, 1): lambda s1, s2, s12, d: s2 / (4 * d ** 2),
}


def g_christoffel_corrected(coords) -> np.ndarray:
    """Γ^c_ab imprimés avec les errata appliqués, rangés [c, a, b]"""
    _, _, s1, s2, s12, d = _g_vars(coords)
    gamma = g_christoffel(coords)
    for (c, a, b), value in G_CHRISTOFFEL_ERRATA.items():
        gamma[c - 1, a - 1, b - 1] = value(s1, s2, s12, d)
    return gamma


def g_riemann_blocks_corrected(coords) -> Dict[Tuple[int, int], np.ndarray]:
    """
    Blocs R_abcd imprimés avec les errata appliqués

    Returns:
        Même forme que g_riemann_blocks (signe global inclus)
    """
    _, _, s1, s2, s12, d = _g_vars(coords)
    blocks = _g_riemann_brackets(coords)
    for (a, b, c, e), value in G_RIEMANN_ERRATA.items():
        blocks[(a, b)][c - 1, e - 1] = value(s1, s2, s12, d)
    return {key: -block for key, block in blocks.items()}


def g_ricci(coords) -> np.ndarray:
    _, _, s1, s2, s12, d = _g_vars(coords)
    d2 = d ** 2
    off = (3 * s12 ** 2 - s1 * s2) / (4 * d2)
    return -np.array([
        [s2 / (2 * d), -s12 / (2 * d), 0, 0, 0],
        [-s12 / (2 * d), s1 / (2 * d), 0, 0, 0],
        [0, 0, s2 ** 2 / (2 * d2), -s2 * s12 / d2, off],
        [0, 0, -s2 * s12 / d2, (3 * s1 * s2 + s12 ** 2) / (2 * d2), -s1 * s12 / d2],
        [0, 0, off, -s1 * s12 / d2, s1 ** 2 / (2 * d2)],
    ], dtype=float)


def g_sectional(coords) -> np.ndarray:
    _, _, s1, s2, s12, _ = _g_vars(coords)
    p = s1 * s2 + s12 ** 2
    a = (s1 * s2 + 3 * s12 ** 2) / (4 * p)
    b = s12 ** 2 / (2 * s1 * s2)
    c = s12 ** 2 / p
    return -np.array([
        [0, -0.25, 0.5, a, b],
        [-0.25, 0, b, a, 0.5],
        [0.5, b, 0, 0.5, c],
        [a, a, 0.5, 0, 0.5],
        [b, 0.5, c, 0.5, 0],
    ], dtype=float)


def g_weyl_1234(coords) -> float:
    """C_1234 = −σ2/(4Δ²), indices affichés (μ1, μ2, σ1, σ12)"""
    _, _, _, s2, _, d = _g_vars(coords)
    return -s2 / (4 * d ** 2)


def i_metric(coords) -> np.ndarray:
    mu1, mu2, s1, s2 = (float(c) for c in coords)
    return np.array([
        [s1, 0, 2 * mu1 * s1, 0],
        [0, s2, 0, 2 * mu2 * s2],
        [2 * mu1 * s1, 0, 2 * s1 * (2 * mu1 ** 2 + s1), 0],
        [0, 2 * mu2 * s2, 0, 2 * s2 * (2 * mu2 ** 2 + s2)],
    ], dtype=float)


def i_christoffel(coords) -> Dict[str, Dict[Tuple[int, int, int], float]]:
    """
    Composantes imprimées de la connexion sur I

    Returns:
        {'lowered': {(a, b, c): Γ_ab,c}, 'upper': {(a, b, c): Γ_ab^c}}
    """
    mu1, mu2, s1, s2 = (float(c) for c in coords)
    lowered = {
        (1, 3, 1): s1 ** 2,
        (3, 3, 1): 4 * mu1 * s1 ** 2,
        (2, 4, 2): s2 ** 2,
        (4, 4, 2): 4 * mu2 * s2 ** 2,
        (3, 3, 3): 4 * s1 ** 2 * (3 * mu2 ** 2 + s1),
    }
    upper = {
        (1, 1, 1): -mu1,
        (1, 3, 3): mu1,
        (3, 1, 1): s1 - 2 * mu1 ** 2,
        (1, 1, 3): 0.5,
        (2, 2, 4): 0.5,
        (3, 3, 1): -4 * mu1 ** 3,
        (3, 3, 3): 2 * (s1 + mu1 ** 2),
        (2, 2, 2): -mu2,
        (2, 4, 4): mu2,
        (4, 2, 2): s2 + 2 * mu2 ** 2,
        (4, 4, 2): -4 * mu2 ** 3,
        (4, 4, 4): 2 * (s2 + mu2 ** 2),
    }
    return {"lowered": lowered, "upper": upper}


def i_riemann(coords) -> Dict[Tuple[int, int, int, int], float]:
    _, _, s1, s2 = (float(c) for c in coords)
    return {(1, 3, 1, 3): -s1 ** 3, (2, 4, 2, 4): -s2 ** 3}


def i_ricci(coords) -> np.ndarray:
    mu1, mu2, s1, s2 = (float(c) for c in coords)
    return -np.array([
        [s1 / 2, 0, mu1 * s1, 0],
        [0, s2 / 2, 0, mu2 * s2],
        [mu1 * s1, 0, s1 * (2 * mu1 ** 2 + s1), 0],
        [0, mu2 * s2, 0, s2 * (2 * mu2 ** 2 + s2)],
    ], dtype=float)


def i_sectional(coords) -> np.ndarray:
    return -0.5 * np.array([
        [0, 0, 1, 0],
        [0, 0, 0, 1],
        [1, 0, 0, 0],
        [0, 1, 0, 0],
    ], dtype=float)


def i_weyl_1234(coords) -> float:
    mu1, mu2, s1, s2 = (float(c) for c in coords)
    return -7.0 / 3.0 * s1 * s2 * (2 * mu1 ** 2 + s1) * (2 * mu2 ** 2 + s2)


def to_display(array: np.ndarray) -> np.ndarray:
    """Réordonne tous les axes d'un tableau de carte source G dans l'ordre affiché"""
    out = np.asarray(array)
    for axis in range(out.ndim):
        out = np.take(out, G_DISPLAY_ORDER, axis=axis)
    return out
