#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Estimation de l'algèbre d'holonomie par transport parallèle.

Deux sources de générateurs au point de base :
  - opérateurs de courbure Ω_ab(q) ramenés en base par transport rectiligne ;
  - logarithmes des holonomies de lacets (rectangles, lignes brisées, triangles).

Les générateurs sont exprimés dans un repère orthonormé de la forme de fibre,
normalisés, puis le rang est lu sur le saut des valeurs singulières après
fermeture par crochets.
"""

from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from scipy.linalg import null_space

from .curvature import AnalyticGeometry, Geometry
from .errors import AmbiguousRankError, DomainError, LogFailureError, RejectedInputError
from .gaussian import (
    INDEPENDENCE,
    DomainBox,
    ManifoldSpec,
    as_source,
    domain_check,
    require_domain,
    source_connection,
)
from .geometry import DOWN, FrameChange, ManifoldId, Point, TensorValue, orthonormalize
from .tractor import fisher_rao_connection, norm_type
from .transport import (
    Connection,
    LineSegment,
    LoopDomain,
    LoopPath,
    loop_family,
    matrix_log,
    parallel_transport,
)


BRACKET_ROUNDS = 4
BRACKET_MIN_NORM = 1e-6
KERNEL_TOL = 1e-6
POINT_STREAM = 2 ** 20


@dataclass(frozen=True)
class InvariantSubspace:
    """Sous-espace invariant de la fibre en base (colonnes de `basis`, repère de coordonnées)"""
    basis: np.ndarray
    norm_type: str
    norms: Tuple[float, ...]
    invariance_residual: float
    complement_residual: float


@dataclass(frozen=True)
class HolonomyEstimate:
    """
    Algèbre d'holonomie estimée

    algebra_basis est exprimée dans le repère orthonormé `frame` de la forme de
    fibre (chaque élément A vérifie Aᵀη + ηA ≈ 0) ; coordinate_basis est la
    même base dans le repère de coordonnées.
    """
    base: Point
    coords: np.ndarray
    connection: str
    signature: Tuple[int, int]
    algebra_basis: Tuple[np.ndarray, ...]
    coordinate_basis: Tuple[np.ndarray, ...]
    dimension: int
    singular_values: Tuple[float, ...]
    gap: float
    gram: np.ndarray
    invariant_subspaces: Tuple[InvariantSubspace, ...] = ()
    label: str = ""
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def fiber_dim(self) -> int:
        return sum(self.signature)


# ---------------------------------------------------------------------------
# Collecte des générateurs
# ---------------------------------------------------------------------------

def _transport_kwargs(config) -> Dict[str, Any]:
    return {
        "steps_per_unit": config.ode_steps,
        "min_steps": config.min_steps,
        "tol": config.transport_tol,
    }


def _loop_generator(connection: Connection, loop: LoopPath, gram: np.ndarray, kwargs: Dict[str, Any]):
    """(log M ou None, défaut de Gram |MᵀHM − H|, estimation d'erreur)"""
    try:
        result = parallel_transport(connection, loop, **kwargs)
    except DomainError as exc:
        return None, np.nan, np.nan, f"domaine : {exc}"
    m = result.matrix
    defect = float(np.max(np.abs(m.T @ gram @ m - gram)))
    try:
        return matrix_log(m), defect, result.error, ""
    except LogFailureError as exc:
        return None, defect, result.error, f"log : {exc}"


def _curvature_generators(connection: Connection, base: np.ndarray, point: np.ndarray,
                          kwargs: Dict[str, Any]) -> List[np.ndarray]:
    """T⁻¹ Ω_ab(q) T pour toutes les paires, T transport rectiligne base → q"""
    omega = connection.curvature_operators(point)
    if np.allclose(point, base):
        transport = np.eye(connection.rank)
    else:
        transport = parallel_transport(connection, LineSegment(base, point), **kwargs).matrix
    inverse = np.linalg.inv(transport)
    return [inverse @ omega[a, b] @ transport for a, b in combinations(range(connection.dim), 2)]


def _normalized(matrices: Sequence[np.ndarray], frame: FrameChange) -> List[np.ndarray]:
    out = []
    for matrix in matrices:
        local = frame.to_frame(matrix)
        norm = float(np.linalg.norm(local))
        if norm > 1e-14:
            out.append(local / norm)
    return out


def _rank(generators: Sequence[np.ndarray], rank_tol: float):
    stack = np.array([g.ravel() for g in generators])
    _, s, vt = np.linalg.svd(stack, full_matrices=False)
    relative = s / s[0]
    dimension = int(np.sum(relative > rank_tol))
    gap = float(s[dimension - 1] / s[dimension]) if dimension < len(s) and s[dimension] > 0 else float("inf")
    size = generators[0].shape[0]
    basis = [vt[k].reshape(size, size) for k in range(dimension)]
    return dimension, s, basis, gap


def _bracket_residuals(basis: Sequence[np.ndarray]) -> Tuple[List[np.ndarray], float]:
    """Crochets non nuls et plus grand résidu relatif hors de l'espace engendré"""
    flat = np.array([b.ravel() for b in basis])
    brackets = []
    worst = 0.0
    for first, second in combinations(range(len(basis)), 2):
        bracket = basis[first] @ basis[second] - basis[second] @ basis[first]
        norm = float(np.linalg.norm(bracket))
        if norm < BRACKET_MIN_NORM:
            continue
        vector = bracket.ravel()
        residual = float(np.linalg.norm(vector - flat.T @ (flat @ vector))) / norm
        worst = max(worst, residual)
        brackets.append((bracket / norm, residual))
    return brackets, worst


def close_under_brackets(generators: List[np.ndarray], rank_tol: float, rounds: int = BRACKET_ROUNDS):
    """
    Ajoute les crochets des éléments de base jusqu'à stabilité de la dimension
    (2 tours consécutifs) ou `rounds` tours

    Returns:
        (dimension, valeurs singulières, base, saut, tours, résidu de fermeture)
    """
    dimension, s, basis, gap = _rank(generators, rank_tol)
    stable = 0
    done = 0
    for done in range(1, rounds + 1):
        brackets, _ = _bracket_residuals(basis)
        fresh = [b for b, residual in brackets if residual > BRACKET_MIN_NORM]
        if not fresh:
            break
        generators = generators + fresh
        new_dimension, s, basis, gap = _rank(generators, rank_tol)
        logger.info(f"[holonomy] crochets tour {done} : dimension {dimension} → {new_dimension}")
        stable = stable + 1 if new_dimension == dimension else 0
        dimension = new_dimension
        if stable >= 2:
            break
    _, closure = _bracket_residuals(basis)
    return dimension, s, basis, gap, done, closure


def estimate_holonomy(
    connection: Connection,
    base: Point,
    coords: np.ndarray,
    domain: LoopDomain,
    config,
) -> HolonomyEstimate:
    """
    Estimation générique de l'algèbre d'holonomie d'une connexion en `coords`

    Raises:
        AmbiguousRankError: saut des valeurs singulières sous gap_min
    """
    coords = np.asarray(coords, dtype=float)
    if not domain.contains(coords):
        raise DomainError(f"Base hors domaine : {tuple(coords)}")
    gram = connection.fiber_metric(coords)
    frame = orthonormalize(gram, config.degeneracy_tol, config.frame_tol)
    kwargs = _transport_kwargs(config)
    parallel = Parallel(n_jobs=config.n_jobs)

    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(POINT_STREAM,)))
    points = [coords] + [domain.sample(rng) for _ in range(config.curvature_points)]
    curvature = parallel(delayed(_curvature_generators)(connection, coords, q, kwargs) for q in points)
    curvature_gens = [g for group in curvature for g in group]
    logger.info(f"[holonomy] {connection.name} : {len(curvature_gens)} générateurs de courbure")

    loops = loop_family(coords, config.loop_scheme, config.loops, config.seed, domain, config.loop_scales)
    outcomes = parallel(delayed(_loop_generator)(connection, loop, gram, kwargs) for loop in loops)
    loop_gens = [log for log, _, _, _ in outcomes if log is not None]
    rejected = [reason for log, _, _, reason in outcomes if log is None]
    for reason in rejected:
        logger.info(f"[holonomy] lacet écarté ({reason})")
    defects = [d for _, d, _, _ in outcomes if np.isfinite(d)]
    errors = [e for _, _, e, _ in outcomes if np.isfinite(e)]

    generators = _normalized(curvature_gens + loop_gens, frame)
    if not generators:
        raise AmbiguousRankError("Aucun générateur non nul", singular_values=())
    dimension, s, basis, gap, rounds, closure = close_under_brackets(generators, config.rank_tol)
    logger.info(f"[holonomy] {connection.name} : dimension {dimension}, saut {gap:.3e}")
    if gap < config.gap_min:
        raise AmbiguousRankError(
            f"Pas de saut net au rang {dimension} (rapport {gap:.3e} < {config.gap_min:g})",
            singular_values=s,
        )

    eta = frame.eta
    skew = max(float(np.max(np.abs(b.T @ eta + eta @ b))) for b in basis) if basis else 0.0
    coordinate_basis = tuple(frame.from_frame(b) for b in basis)
    return HolonomyEstimate(
        base=base,
        coords=coords,
        connection=connection.name,
        signature=frame.signature,
        algebra_basis=tuple(basis),
        coordinate_basis=coordinate_basis,
        dimension=dimension,
        singular_values=tuple(float(v) for v in s),
        gap=gap,
        gram=gram,
        diagnostics={
            "curvature_generators": len(curvature_gens),
            "loop_generators": len(loop_gens),
            "rejected_loops": len(rejected),
            "bracket_rounds": rounds,
            "closure_residual": closure,
            "skew_residual": skew,
            "transport_defect": max(defects) if defects else 0.0,
            "transport_error": max(errors) if errors else 0.0,
        },
    )


# ---------------------------------------------------------------------------
# Variétés gaussiennes
# ---------------------------------------------------------------------------

def gaussian_loop_domain(m: ManifoldSpec, box: DomainBox) -> LoopDomain:
    """Lacets dans la DomainBox, convexe en carte source"""
    def contains(x: np.ndarray) -> bool:
        return domain_check(Point.source(m.id, x))

    def sample(rng: np.random.Generator) -> np.ndarray:
        return box.sample(m, rng, 1)[0].array

    return LoopDomain(contains=contains, sample=sample,
                      christoffel=lambda x: source_connection(m, x)[0])


def _resolve_config(config):
    if config is None:
        from ..utils.config import RunConfig
        return RunConfig()
    return config


def holonomy_algebra_estimate(m: ManifoldSpec, base: Optional[Point] = None, config=None) -> HolonomyEstimate:
    """Algèbre d'holonomie de la connexion tracteur de Fisher-Rao en `base`"""
    config = _resolve_config(config)
    if base is None:
        base = config.base_point(m)
    if base.manifold is not m.id:
        raise RejectedInputError(f"Point de {base.manifold.value} pour {m.id.value}")
    require_domain(base)
    source = as_source(base)
    domain = gaussian_loop_domain(m, config.domain_box())
    return estimate_holonomy(fisher_rao_connection(m), source, source.array, domain, config)


def invariant_subspaces(est: HolonomyEstimate, kernel_tol: float = KERNEL_TOL) -> HolonomyEstimate:
    """
    Noyau commun des éléments de base (droites invariantes du groupe connexe),
    type de norme et invariance du complément orthogonal
    """
    if not est.coordinate_basis:
        raise RejectedInputError("Base d'algèbre vide")
    size = est.fiber_dim
    stack = np.vstack([b / max(np.linalg.norm(b), 1e-300) for b in est.coordinate_basis])
    _, s, vt = np.linalg.svd(stack)
    s_full = np.concatenate([s, np.zeros(size - len(s))]) if len(s) < size else s
    kernel = vt[s_full < kernel_tol * s_full[0]]
    if kernel.shape[0] == 0:
        logger.info(f"[holonomy] aucun sous-espace invariant ({est.connection})")
        return replace(est, invariant_subspaces=())

    basis = kernel.T
    for k in range(basis.shape[1]):
        lead = int(np.argmax(np.abs(basis[:, k])))
        if basis[lead, k] < 0:
            basis[:, k] = -basis[:, k]
    restricted = basis.T @ est.gram @ basis
    values = np.linalg.eigvalsh(0.5 * (restricted + restricted.T))
    scale = max(1.0, float(np.max(np.abs(est.gram))))
    kinds = {norm_type(v, scale) for v in values}
    kind = kinds.pop() if len(kinds) == 1 else "indefinite"

    invariance = max(float(np.max(np.abs(b @ basis))) / max(float(np.linalg.norm(b)), 1e-300)
                     for b in est.coordinate_basis)
    complement = null_space(basis.T @ est.gram)
    leak = max(float(np.max(np.abs(basis.T @ est.gram @ b @ complement))) / max(float(np.linalg.norm(b)), 1e-300)
               for b in est.coordinate_basis)
    subspace = InvariantSubspace(basis, kind, tuple(float(v) for v in values), invariance, leak)
    logger.info(f"[holonomy] sous-espace invariant de dimension {basis.shape[1]} ({kind})")
    return replace(est, invariant_subspaces=(subspace,))


def classify_group(est: HolonomyEstimate, n: Optional[int] = None) -> str:
    """
    Table finie : algèbre pleine sans sous-espace invariant → SO^0(p,q) ;
    une droite positive (resp. négative) et la dimension de so(p,q−1)
    (resp. so(p−1,q)) → groupe correspondant ; sinon "unclassified".
    """
    p, q = est.signature
    size = p + q
    if n is not None and n + 2 != size:
        raise RejectedInputError(f"n = {n} incompatible avec une fibre de dimension {size}")

    def so_dim(k: int) -> int:
        return k * (k - 1) // 2

    subspaces = est.invariant_subspaces
    if not subspaces and est.dimension == so_dim(size):
        return f"SO^0({p},{q})"
    if len(subspaces) == 1 and subspaces[0].basis.shape[1] == 1 and est.dimension == so_dim(size - 1):
        kind = subspaces[0].norm_type
        if kind == "positive":
            return f"SO^0({p},{q - 1})"
        if kind == "negative":
            return f"SO^0({p - 1},{q})"
    return "unclassified"


def analyse_holonomy(m: ManifoldSpec, base: Optional[Point] = None, config=None) -> HolonomyEstimate:
    """Estimation, sous-espaces invariants puis étiquette"""
    est = invariant_subspaces(holonomy_algebra_estimate(m, base, config))
    return replace(est, label=classify_group(est))


# ---------------------------------------------------------------------------
# Cône métrique
# ---------------------------------------------------------------------------

class MetricCone(Geometry):
    """
    Cône (ξ, t) ↦ sign(scal)(dt² + scal/(n(n−1)) t² g_ξ) au-dessus d'une base d'Einstein

    Connexion de Levi-Civita exacte à partir de celle de la base :
    Γ^t_ij = −c t g_ij, Γ^i_tj = δ^i_j / t, Γ^i_jk = Γ(g)^i_jk.
    """

    def __init__(self, base: Geometry, scal: float):
        if scal == 0:
            raise RejectedInputError("Le cône exige scal ≠ 0")
        self.base = base
        self.base_dim = base.dim
        self.dim = base.dim + 1
        self.scal = float(scal)
        self.sign = float(np.sign(scal))
        self.warp = scal / (base.dim * (base.dim - 1))
        self.name = f"cone[{base.name}]"

    def _split(self, x: np.ndarray) -> Tuple[np.ndarray, float]:
        x = np.asarray(x, dtype=float)
        return x[:-1], float(x[-1])

    def metric(self, x: np.ndarray) -> np.ndarray:
        xi, t = self._split(x)
        n = self.base_dim
        out = np.zeros((n + 1, n + 1))
        out[:n, :n] = self.sign * self.warp * t ** 2 * self.base.metric(xi)
        out[n, n] = self.sign
        return out

    def connection(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        xi, t = self._split(x)
        n = self.base_dim
        g = self.base.metric(xi)
        gamma_b, d_gamma_b = self.base.connection(xi)
        lowered = np.einsum("il,lej->eij", g, gamma_b)
        d_g = lowered + np.swapaxes(lowered, 1, 2)  # [e, i, j] = ∂_e g_ij

        gamma = np.zeros((n + 1, n + 1, n + 1))
        gamma[:n, :n, :n] = gamma_b
        gamma[n, :n, :n] = -self.warp * t * g
        for i in range(n):
            gamma[i, n, i] = gamma[i, i, n] = 1.0 / t

        d_gamma = np.zeros((n + 1,) * 4)
        d_gamma[:n, :n, :n, :n] = d_gamma_b
        d_gamma[:n, n, :n, :n] = -self.warp * t * d_g
        d_gamma[n, n, :n, :n] = -self.warp * g
        for i in range(n):
            d_gamma[n, i, n, i] = d_gamma[n, i, i, n] = -1.0 / t ** 2
        return gamma, d_gamma

    def contains(self, x: np.ndarray) -> bool:
        xi, t = self._split(x)
        return t > 0 and self.base.contains(xi)


class LeviCivitaConnection(Connection):
    """Connexion de Levi-Civita sur le fibré tangent : A_b[a, c] = Γ^a_bc"""

    def __init__(self, geometry: Geometry):
        self.geometry = geometry
        self.dim = geometry.dim
        self.rank = geometry.dim
        self.name = f"levi-civita[{geometry.name}]"

    def matrices(self, x: np.ndarray) -> np.ndarray:
        return np.transpose(self.geometry.christoffel(np.asarray(x, dtype=float)), (1, 0, 2))

    def fiber_metric(self, x: np.ndarray) -> np.ndarray:
        return self.geometry.metric(np.asarray(x, dtype=float))

    def contains(self, x: np.ndarray) -> bool:
        return self.geometry.contains(x)


def independence_cone() -> MetricCone:
    return MetricCone(AnalyticGeometry(INDEPENDENCE), scal=-2.0)


def cone_metric(p: Point, t: float) -> TensorValue:
    """Métrique du cône au-dessus de I en (p, t)"""
    if p.manifold is not ManifoldId.INDEPENDENCE:
        raise RejectedInputError("Le cône est construit au-dessus de la sous-variété d'indépendance")
    if t <= 0:
        raise RejectedInputError(f"t = {t} : le cône exige t > 0")
    require_domain(p)
    source = as_source(p)
    matrix = independence_cone().metric(np.append(source.array, t))
    return TensorValue((DOWN, DOWN), matrix, symmetries=((0, 1),))


def cone_loop_domain(cone: MetricCone, box: DomainBox, t_range: Tuple[float, float] = (0.5, 2.0)) -> LoopDomain:
    m = INDEPENDENCE

    def sample(rng: np.random.Generator) -> np.ndarray:
        xi = box.sample(m, rng, 1)[0].array
        return np.append(xi, rng.uniform(*t_range))

    return LoopDomain(contains=cone.contains, sample=sample, christoffel=cone.christoffel)


def cone_holonomy_crosscheck(base: Optional[Point] = None, t: float = 1.0, config=None) -> HolonomyEstimate:
    """Holonomie métrique du cône au-dessus de I en (base, t)"""
    config = _resolve_config(config)
    if base is None:
        base = config.base_point(INDEPENDENCE)
    cone_metric(base, t)
    cone = independence_cone()
    source = as_source(base)
    coords = np.append(source.array, t)
    est = estimate_holonomy(LeviCivitaConnection(cone), source, coords,
                            cone_loop_domain(cone, config.domain_box()), config)
    est = invariant_subspaces(est)
    return replace(est, label=classify_group(est))
