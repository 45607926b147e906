#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Fibré tracteur standard de rang n+2 dans une échelle fixée.

Un tracteur est le triplet (σ, X^a, y) trivialisé dans l'échelle active ;
la métrique tracteur vaut h(V, W) = σ_V y_W + g(X_V, X_W) + y_V σ_W, de Gram
H = [[0, 0, 1], [0, g, 0], [1, 0, 0]] dans le repère de coordonnées
(1,0,0), (0,e_i,0), (0,0,1). La connexion ∇_b = ∂_b + A_b a pour blocs

    A_b = [[ 0,        −g_bc,   0    ],
           [ P_b^a,    Γ^a_bc,  δ^a_b],
           [ 0,        −P_bc,   0    ]]
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .curvature import AnalyticGeometry, Geometry
from .errors import ChartMismatchError, InconsistencyError, RejectedInputError
from .gaussian import ManifoldSpec, as_source, get_manifold, require_domain
from .geometry import MANIFOLD_DIMS, Point, array_gradient, array_partial, orthonormalize
from .transport import Connection, LoopDomain, coord_rectangle, loop_family, matrix_log, parallel_transport


FISHER_RAO_SCALE = "fisher-rao"
NORM_TOL = 1e-8


@dataclass(frozen=True)
class Tractor:
    """Triplet (σ, X^a, y) en un point de base, trivialisé dans l'échelle `scale`"""
    sigma: float
    x_up: Tuple[float, ...]
    y: float
    base: Point
    scale: str = FISHER_RAO_SCALE

    def __post_init__(self):
        x_up = tuple(float(v) for v in self.x_up)
        if len(x_up) != MANIFOLD_DIMS[self.base.manifold]:
            raise RejectedInputError(
                f"X^a de longueur {len(x_up)} pour une variété de dimension {MANIFOLD_DIMS[self.base.manifold]}"
            )
        object.__setattr__(self, "x_up", x_up)
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "y", float(self.y))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.sigma, *self.x_up, self.y])

    @classmethod
    def from_array(cls, values: Sequence[float], base: Point, scale: str = FISHER_RAO_SCALE) -> "Tractor":
        values = np.asarray(values, dtype=float)
        return cls(values[0], tuple(values[1:-1]), values[-1], base, scale)


@dataclass(frozen=True)
class TractorFrame:
    """Repère de n+2 tracteurs et leur matrice de Gram"""
    base: Point
    vectors: Tuple[Tractor, ...]
    gram: np.ndarray


@dataclass(frozen=True)
class ConformalFactor:
    """
    Facteur conforme ĝ = e^{2Υ} g, Υ évalué sur les coordonnées source

    Args:
        upsilon: x ↦ Υ(x)
        gradient: x ↦ ∂_a Υ (différences centrées si absent)
        name: étiquette ajoutée au nom d'échelle
    """
    upsilon: Callable[[np.ndarray], float]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "Υ"

    @classmethod
    def linear(cls, coefficients: Sequence[float], offset: float = 0.0, name: str = "Υ") -> "ConformalFactor":
        """Υ(x) = offset + c·x"""
        c = np.asarray(coefficients, dtype=float)
        return cls(lambda x: float(offset + c @ np.asarray(x, dtype=float)), lambda x: c.copy(), name)

    def value(self, x: np.ndarray) -> float:
        return float(self.upsilon(np.asarray(x, dtype=float)))

    def grad(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.gradient is None:
            return np.array([array_partial(self.upsilon, x, k) for k in range(x.size)], dtype=float)
        return np.asarray(self.gradient(x), dtype=float)

    def check_gradient(self, x: np.ndarray, tol: float = 1e-6) -> float:
        """Écart entre le gradient fourni et les différences centrées de Υ"""
        x = np.asarray(x, dtype=float)
        numeric = np.array([array_partial(self.upsilon, x, k) for k in range(x.size)], dtype=float)
        residual = float(np.max(np.abs(self.grad(x) - numeric)))
        if residual > tol:
            raise InconsistencyError(f"Gradient de {self.name} incohérent : écart {residual:.3e}")
        return residual

    def inverse(self) -> "ConformalFactor":
        """Υ ↦ −Υ"""
        upsilon = self.upsilon
        gradient = self.gradient
        name = self.name[1:] if self.name.startswith("-") else f"-{self.name}"
        return ConformalFactor(
            lambda x: -float(upsilon(x)),
            None if gradient is None else (lambda x: -np.asarray(gradient(x), dtype=float)),
            name,
        )


def _rescaled_tag(scale: str, factor: ConformalFactor) -> str:
    inverse = factor.inverse().name
    head, _, last = scale.rpartition("|")
    if head and last == inverse:
        return head
    return f"{scale}|{factor.name}"


def tractor_gram(g: np.ndarray) -> np.ndarray:
    """H = [[0,0,1],[0,g,0],[1,0,0]]"""
    n = g.shape[0]
    gram = np.zeros((n + 2, n + 2))
    gram[0, n + 1] = gram[n + 1, 0] = 1.0
    gram[1:n + 1, 1:n + 1] = g
    return gram


def tractor_matrices(g: np.ndarray, gamma: np.ndarray, schouten_ab: np.ndarray) -> np.ndarray:
    """Matrices A_b (forme (n, n+2, n+2)) à partir de g, Γ^a_bc et P_bc"""
    n = g.shape[0]
    p_mixed = np.linalg.solve(g, schouten_ab)  # [a, b] = P_b^a
    mats = np.zeros((n, n + 2, n + 2))
    for b in range(n):
        mats[b, 0, 1:n + 1] = -g[b]
        mats[b, 1:n + 1, 0] = p_mixed[:, b]
        mats[b, 1:n + 1, 1:n + 1] = gamma[:, b, :]
        mats[b, 1 + b, n + 1] = 1.0
        mats[b, n + 1, 1:n + 1] = -schouten_ab[b]
    return mats


class TractorConnection(Connection):
    """Connexion tracteur normale dans l'échelle donnée par `geometry`"""

    def __init__(self, geometry: Geometry, scale: str = FISHER_RAO_SCALE):
        self.geometry = geometry
        self.scale = scale
        self.dim = geometry.dim
        self.rank = geometry.dim + 2
        self.name = f"tractor[{scale}]"

    def matrices(self, x: np.ndarray) -> np.ndarray:
        return tractor_matrices(*self.geometry.tractor_data(np.asarray(x, dtype=float)))

    def fiber_metric(self, x: np.ndarray) -> np.ndarray:
        return tractor_gram(self.geometry.metric(np.asarray(x, dtype=float)))

    def contains(self, x: np.ndarray) -> bool:
        return self.geometry.contains(x)


def fisher_rao_connection(m: ManifoldSpec) -> TractorConnection:
    return TractorConnection(AnalyticGeometry(m))


def _scale_metric(v: Tractor, geometry: Optional[Geometry]) -> np.ndarray:
    base = as_source(v.base)
    if geometry is None:
        if v.scale != FISHER_RAO_SCALE:
            raise RejectedInputError(f"Échelle {v.scale} : la géométrie de l'échelle doit être fournie")
        geometry = AnalyticGeometry(get_manifold(base))
    return geometry.metric(base.array)


def tractor_inner(v: Tractor, w: Tractor, geometry: Optional[Geometry] = None) -> float:
    """
    h(V, W) = σ_V y_W + g(X_V, X_W) + y_V σ_W

    Raises:
        ChartMismatchError: points de base ou échelles différents
    """
    if v.base != w.base or v.scale != w.scale:
        raise ChartMismatchError("Tracteurs de bases ou d'échelles différentes")
    g = _scale_metric(v, geometry)
    return float(v.array @ tractor_gram(g) @ w.array)


def coordinate_frame(base: Point, connection: Optional[TractorConnection] = None) -> TractorFrame:
    """Repère (1,0,0), (0,e_i,0), (0,0,1) ; la signature de Gram doit être (1, n+1)"""
    require_domain(base)
    source = as_source(base)
    connection = connection or fisher_rao_connection(get_manifold(source))
    gram = connection.fiber_metric(source.array)
    signature = orthonormalize(gram).signature
    if signature != (1, connection.rank - 1):
        raise InconsistencyError(f"Signature tracteur {signature}, attendu (1, {connection.rank - 1})")
    vectors = tuple(Tractor.from_array(e, source, connection.scale) for e in np.eye(connection.rank))
    return TractorFrame(source, vectors, gram)


def tractor_derivative(
    field: Callable[[np.ndarray], np.ndarray],
    p: Point,
    b: int,
    connection: Optional[TractorConnection] = None,
) -> Tractor:
    """
    ∇_b V = (∂_bσ − X_b, ∂_bX^a + Γ^a_bc X^c + δ^a_b y + P_b^a σ, ∂_b y − P_bc X^c)

    Args:
        field: champ de composantes x ↦ (σ, X, y) sur les coordonnées source
    """
    require_domain(p)
    source = as_source(p)
    connection = connection or fisher_rao_connection(get_manifold(source))
    if not 0 <= b < connection.dim:
        raise RejectedInputError(f"Direction {b} hors de [0, {connection.dim})")
    x = source.array
    value = connection.matrices(x)[b] @ np.asarray(field(x), dtype=float)
    derivative = array_partial(field, x, b) + value
    return Tractor.from_array(derivative, source, connection.scale)


def conformal_change_matrix(g: np.ndarray, upsilon: float, gradient: np.ndarray) -> np.ndarray:
    """
    Matrice C telle que V̂ = C V pour ĝ = e^{2Υ} g

    (σ, X, y) ↦ (e^Υ σ, e^{−Υ}(X + Υ^♯σ), e^{−Υ}(y − Υ_b X^b − ½|Υ|² σ))
    """
    n = g.shape[0]
    sharp = np.linalg.solve(g, gradient)
    lower = np.eye(n + 2)
    lower[1:n + 1, 0] = sharp
    lower[n + 1, 0] = -0.5 * float(gradient @ sharp)
    lower[n + 1, 1:n + 1] = -gradient
    weights = np.diag([np.exp(upsilon)] + [np.exp(-upsilon)] * (n + 1))
    return weights @ lower


def tractor_conformal_change(v: Tractor, factor: ConformalFactor, geometry: Optional[Geometry] = None) -> Tractor:
    """Composantes de V dans l'échelle e^{2Υ}g ; `geometry` est l'échelle courante de V"""
    g = _scale_metric(v, geometry)
    x = as_source(v.base).array
    matrix = conformal_change_matrix(g, factor.value(x), factor.grad(x))
    return Tractor.from_array(matrix @ v.array, v.base, _rescaled_tag(v.scale, factor))


def connection_gauge_residual(
    connection: TractorConnection,
    rescaled: TractorConnection,
    factor: ConformalFactor,
    x: np.ndarray,
) -> float:
    """
    max_b |Â_b − (C A_b C⁻¹ − ∂_b C · C⁻¹)| : invariance conforme de la connexion
    """
    x = np.asarray(x, dtype=float)

    def change(y: np.ndarray) -> np.ndarray:
        return conformal_change_matrix(connection.geometry.metric(y), factor.value(y), factor.grad(y))

    c = change(x)
    c_inv = np.linalg.inv(c)
    d_c = array_gradient(change, x)
    expected = np.einsum("ij,bjk,kl->bil", c, connection.matrices(x), c_inv) - np.einsum("bij,jk->bik", d_c, c_inv)
    return float(np.max(np.abs(rescaled.matrices(x) - expected)))


def tractor_curvature(
    p: Point,
    a: int,
    b: int,
    connection: Optional[TractorConnection] = None,
    method: str = "fd",
    eps: float = 0.04,
) -> np.ndarray:
    """
    Courbure Ω_ab de la connexion tracteur

    Args:
        method: 'fd' (différences centrées des matrices A_b) ou 'loop'
            (rectangle de côté ε, log M ≈ −ε²Ω, extrapolation 2L(ε/2) − L(ε))
    """
    if a == b:
        raise RejectedInputError("tractor_curvature exige a ≠ b")
    require_domain(p)
    source = as_source(p)
    connection = connection or fisher_rao_connection(get_manifold(source))
    x = source.array
    if method == "fd":
        return connection.curvature(x, a, b)
    if method != "loop":
        raise RejectedInputError(f"Méthode de courbure tracteur inconnue : {method}")

    def loop_estimate(side: float) -> np.ndarray:
        loop = coord_rectangle(x, a, b, side)
        return -matrix_log(parallel_transport(connection, loop).matrix) / side ** 2

    return 2.0 * loop_estimate(0.5 * eps) - loop_estimate(eps)


@dataclass(frozen=True)
class ParallelTractor:
    """Tracteur parallèle trouvé au point de base"""
    tractor: Tractor
    norm_type: str
    inner: float
    residual: float


def norm_type(value: float, scale: float = 1.0, tol: float = NORM_TOL) -> str:
    if value > tol * scale:
        return "positive"
    if value < -tol * scale:
        return "negative"
    return "null"


def local_loop_domain(connection: Connection, base: np.ndarray, radius: float = 0.3) -> LoopDomain:
    """Tirage uniforme dans le cube de côté 2·radius autour de la base"""
    base = np.asarray(base, dtype=float)

    def sample(rng: np.random.Generator) -> np.ndarray:
        while True:
            candidate = base + rng.uniform(-radius, radius, size=base.size)
            if connection.contains(candidate):
                return candidate

    return LoopDomain(contains=connection.contains, sample=sample)


def refine_fixed_vectors(holonomies: Sequence[np.ndarray], guesses: Sequence[np.ndarray]) -> List[np.ndarray]:
    """
    Projette chaque estimation sur le sous-espace fixe commun des holonomies

    Le sous-espace est engendré par les len(guesses) plus petits vecteurs
    singuliers de la pile [M − 1] ; chaque vecteur est affiné à partir de sa
    propre estimation, puis ramené à la norme 1.

    Raises:
        InconsistencyError: si une estimation est orthogonale au sous-espace
    """
    size = len(guesses[0])
    defect = np.vstack([np.asarray(h) - np.eye(size) for h in holonomies])
    _, _, vt = np.linalg.svd(defect)
    fixed = vt[-len(guesses):]
    refined = []
    for guess in guesses:
        guess = np.asarray(guess, dtype=float)
        v = fixed.T @ (fixed @ guess)
        norm = float(np.linalg.norm(v))
        if norm < 1e-8 * float(np.linalg.norm(guess)):
            raise InconsistencyError("Estimation orthogonale au sous-espace fixe des holonomies")
        refined.append(v / norm)
    return refined


def solve_parallel_tractor(
    m: ManifoldSpec,
    config=None,
    estimate=None,
    paths: int = 20,
    seed: int = 0,
) -> List[ParallelTractor]:
    """
    Tracteurs parallèles : noyau commun de l'algèbre d'holonomie estimée, affiné
    en minimisant |M v − v| sur `paths` lacets aléatoires.

    Returns:
        Liste (éventuellement vide) de ParallelTractor ; σ normalisé à 1 si σ ≠ 0
    """
    from .holonomy import analyse_holonomy

    if estimate is None:
        estimate = analyse_holonomy(m, config=config)
    base = as_source(estimate.base)
    connection = fisher_rao_connection(m)
    x = base.array
    gram = connection.fiber_metric(x)

    lines = [s for s in estimate.invariant_subspaces if s.basis.shape[1] == 1]
    if not lines:
        logger.info(f"[parallel] aucun tracteur parallèle sur {m.id.value}")
        return []

    loops = loop_family(x, "random_polyline", paths, seed, local_loop_domain(connection, x))
    holonomies = [parallel_transport(connection, loop).matrix for loop in loops]
    results = []
    for refined in refine_fixed_vectors(holonomies, [line.basis[:, 0] for line in lines]):
        if abs(refined[0]) > 1e-8:
            refined = refined / refined[0]
        residual = max(float(np.linalg.norm(h @ refined - refined)) for h in holonomies) / float(np.linalg.norm(refined))
        inner = float(refined @ gram @ refined)
        kind = norm_type(inner, float(refined @ refined) * max(1.0, float(np.max(np.abs(gram)))))
        logger.info(f"[parallel] V = {np.round(refined, 6).tolist()}, ⟨V,V⟩ = {inner:.6g} ({kind}), résidu {residual:.2e}")
        results.append(ParallelTractor(Tractor.from_array(refined, base), kind, inner, residual))
    return results
