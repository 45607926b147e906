#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Variétés gaussiennes : G (bivariée), I (sous-variété d'indépendance σ12 = 0)
et la variété univariée servant d'oracle.

Conventions de carte :
  - carte source G : (μ1, μ2, σ1, σ2, σ12), σ1 et σ2 sont des variances ;
  - carte source I : (μ1, μ2, σ1, σ2) ; univariée : (μ, σ) ;
  - carte naturelle : η = Σ⁻¹μ puis les composantes de Θ = −½Σ⁻¹,
    G : (η1, η2, Θ11, 2Θ12, Θ22), I : (η1, η2, Θ11, Θ22), univariée : (η, Θ).

Toutes les grandeurs s'écrivent avec le bloc de covariance Σ et la base
E_(i,i) = e_i e_iᵀ, E_(0,1) = e_0 e_1ᵀ + e_1 e_0ᵀ des coordonnées de covariance.
"""

from dataclasses import dataclass
from functools import lru_cache, partial
from itertools import combinations_with_replacement, permutations, product
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from loguru import logger
from numpy.polynomial.hermite_e import hermegauss

from . import closed_forms
from .errors import (
    ChartMismatchError,
    DomainError,
    InconsistencyError,
    RejectedInputError,
)
from .geometry import (
    DOWN,
    UP,
    Chart,
    ManifoldId,
    Point,
    TensorValue,
    central_difference,
    default_step,
)


Slot = Tuple[int, int]


@dataclass(frozen=True)
class ManifoldSpec:
    """
    Description d'une famille gaussienne à d ∈ {1, 2} variables

    Args:
        id: identité de la variété
        dim: dimension réelle
        variables: nombre d'aléas d
        source_slots: entrées (i, j) de Σ portées par les coordonnées source
        natural_slots: entrées (i, j) de Θ portées par les coordonnées naturelles
    """
    id: ManifoldId
    dim: int
    variables: int
    source_slots: Tuple[Slot, ...]
    natural_slots: Tuple[Slot, ...]
    charts: Tuple[Chart, ...] = (Chart.SOURCE, Chart.NATURAL)

    @property
    def metric_fn(self):
        return partial(metric, self)

    @property
    def christoffel_fn(self):
        return partial(christoffel, self)

    @property
    def potential_fn(self):
        return partial(potential, self)

    def source_point(self, coords) -> Point:
        return Point.source(self.id, coords)

    def natural_point(self, coords) -> Point:
        return Point.natural(self.id, coords)


BIVARIATE = ManifoldSpec(ManifoldId.BIVARIATE, 5, 2, ((0, 0), (1, 1), (0, 1)), ((0, 0), (0, 1), (1, 1)))
INDEPENDENCE = ManifoldSpec(ManifoldId.INDEPENDENCE, 4, 2, ((0, 0), (1, 1)), ((0, 0), (1, 1)))
UNIVARIATE = ManifoldSpec(ManifoldId.UNIVARIATE, 2, 1, ((0, 0),), ((0, 0),))

MANIFOLDS: Dict[ManifoldId, ManifoldSpec] = {
    spec.id: spec for spec in (BIVARIATE, INDEPENDENCE, UNIVARIATE)
}

# Taille minimale d'un échantillon Monte-Carlo pour l'oracle de Fisher
MC_MIN_SAMPLES = 10_000


def get_manifold(key: Union[ManifoldId, Point, str]) -> ManifoldSpec:
    """Retrouve la ManifoldSpec d'un identifiant, d'un point ou d'un nom CLI"""
    if isinstance(key, Point):
        return MANIFOLDS[key.manifold]
    if isinstance(key, str) and not isinstance(key, ManifoldId):
        aliases = {"bivariate": ManifoldId.BIVARIATE, "independence": ManifoldId.INDEPENDENCE,
                   "univariate": ManifoldId.UNIVARIATE}
        if key.lower() in aliases:
            return MANIFOLDS[aliases[key.lower()]]
        return MANIFOLDS[ManifoldId(key)]
    return MANIFOLDS[ManifoldId(key)]


@dataclass(frozen=True)
class DomainBox:
    """
    Boîte d'échantillonnage : μ ∈ mu_range, σ_i ∈ sigma_range et Δ ≥ delta_min
    """
    mu_range: Tuple[float, float] = (-2.0, 2.0)
    sigma_range: Tuple[float, float] = (0.5, 3.0)
    delta_min: float = 0.1

    def __post_init__(self):
        if self.sigma_range[0] <= 0 or self.delta_min <= 0:
            raise RejectedInputError("La boîte exige σ > 0 et Δ_min > 0")

    def ranges(self, m: ManifoldSpec) -> List[Tuple[float, float]]:
        """Intervalle fermé par coordonnée source"""
        out = [self.mu_range] * m.variables
        for i, j in m.source_slots:
            if i == j:
                out.append(self.sigma_range)
            else:
                bound = float(np.sqrt(max(self.sigma_range[1] ** 2 - self.delta_min, 0.0)))
                out.append((-bound, bound))
        return out

    def contains(self, p: Point) -> bool:
        if p.chart is not Chart.SOURCE or not domain_check(p):
            return False
        m = get_manifold(p)
        for value, (low, high) in zip(p.coords, self.ranges(m)):
            if not low <= value <= high:
                return False
        return delta(p) >= self.delta_min

    def sample(self, m: ManifoldSpec, rng: np.random.Generator, count: int) -> List[Point]:
        """Tire `count` points source uniformes dans la boîte"""
        points = []
        d = m.variables
        while len(points) < count:
            mu = rng.uniform(*self.mu_range, size=d)
            sigmas = rng.uniform(*self.sigma_range, size=d)
            coords = list(mu) + list(sigmas)
            if (0, 1) in m.source_slots:
                room = sigmas[0] * sigmas[1] - self.delta_min
                if room <= 0:
                    continue
                bound = np.sqrt(room)
                coords.append(rng.uniform(-bound, bound))
            points.append(Point.source(m.id, coords))
        return points


def _unit(d: int, i: int, j: int) -> np.ndarray:
    u = np.zeros((d, d))
    u[i, j] = 1.0
    return u


def source_basis(m: ManifoldSpec) -> List[np.ndarray]:
    """Matrices E_s des coordonnées de covariance source"""
    d = m.variables
    return [_unit(d, i, j) if i == j else _unit(d, i, j) + _unit(d, j, i) for i, j in m.source_slots]


def natural_basis(m: ManifoldSpec) -> List[np.ndarray]:
    """Matrices B_s telles que Θ = Σ θ_s B_s"""
    d = m.variables
    return [_unit(d, i, j) if i == j else 0.5 * (_unit(d, i, j) + _unit(d, j, i)) for i, j in m.natural_slots]


def _slot_values(matrix: np.ndarray, slots: Tuple[Slot, ...]) -> np.ndarray:
    return np.array([matrix[i, j] for i, j in slots])


def moments(m: ManifoldSpec, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(μ, Σ) à partir des coordonnées source"""
    d = m.variables
    mu = np.asarray(x[:d], dtype=float)
    sigma = np.zeros((d, d))
    for value, (i, j) in zip(x[d:], m.source_slots):
        sigma[i, j] = sigma[j, i] = value
    return mu, sigma


def pack_source(m: ManifoldSpec, mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    return np.concatenate([mu, _slot_values(sigma, m.source_slots)])


def _natural_moments(m: ManifoldSpec, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(μ, Σ) à partir des coordonnées naturelles ; Θ doit être définie négative"""
    d = m.variables
    eta = np.asarray(theta[:d], dtype=float)
    big_theta = sum(value * b for value, b in zip(theta[d:], natural_basis(m)))
    if not np.all(np.isfinite(big_theta)) or np.max(np.linalg.eigvalsh(big_theta)) >= 0:
        raise DomainError(f"Coordonnées naturelles invalides : Θ non définie négative en {tuple(theta)}")
    sigma = -0.5 * np.linalg.inv(big_theta)
    sigma = 0.5 * (sigma + sigma.T)
    return sigma @ eta, sigma


def _require(p: Point, chart: Chart, m: Optional[ManifoldSpec] = None):
    if p.chart is not chart:
        raise ChartMismatchError(f"Carte {chart.value} attendue, reçu {p.chart.value}")
    if m is not None and p.manifold is not m.id:
        raise ChartMismatchError(f"Point de {p.manifold.value} pour la variété {m.id.value}")


def _positive_definite(sigma: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        return False
    return True


def domain_check(p: Point) -> bool:
    """Vrai ssi les variances sont positives et Σ définie positive"""
    x = p.array
    if not np.all(np.isfinite(x)):
        return False
    m = get_manifold(p)
    if p.chart is Chart.NATURAL:
        try:
            _natural_moments(m, x)
        except DomainError:
            return False
        return True
    mu, sigma = moments(m, x)
    if np.any(np.diag(sigma) <= 0):
        return False
    return float(np.linalg.det(sigma)) > 0 and _positive_definite(sigma)


def require_domain(p: Point):
    if not domain_check(p):
        raise DomainError(f"Point hors domaine : {p.coords}")


def delta(p: Point) -> float:
    """Δ = det Σ (σ1σ2 − σ12² sur G) en carte source"""
    _require(p, Chart.SOURCE)
    _, sigma = moments(get_manifold(p), p.array)
    if sigma.shape == (1, 1):
        return float(sigma[0, 0])
    return float(sigma[0, 0] * sigma[1, 1] - sigma[0, 1] * sigma[1, 0])


def delta_natural(theta: Point) -> float:
    """Δ en coordonnées naturelles, 1/(4θ3θ5 − θ4²) sur G"""
    _require(theta, Chart.NATURAL)
    m = get_manifold(theta)
    x = theta.array
    d = m.variables
    big_theta = sum(value * b for value, b in zip(x[d:], natural_basis(m)))
    return float(1.0 / np.linalg.det(-2.0 * big_theta))


def to_natural(p: Point) -> Point:
    """Carte source → carte naturelle"""
    _require(p, Chart.SOURCE)
    require_domain(p)
    m = get_manifold(p)
    mu, sigma = moments(m, p.array)
    precision = np.linalg.inv(sigma)
    big_theta = -0.5 * precision
    values = []
    for i, j in m.natural_slots:
        values.append(big_theta[i, j] if i == j else 2.0 * big_theta[i, j])
    if any(big_theta[i, i] >= 0 for i in range(m.variables)):
        raise InconsistencyError(f"Image naturelle sans Θ_ii < 0 pour {p.coords}")
    return Point.natural(m.id, np.concatenate([precision @ mu, values]))


def from_natural(theta: Point) -> Point:
    """Carte naturelle → carte source (inverse exact de to_natural)"""
    _require(theta, Chart.NATURAL)
    m = get_manifold(theta)
    mu, sigma = _natural_moments(m, theta.array)
    return Point.source(m.id, pack_source(m, mu, sigma))


def as_source(p: Point) -> Point:
    return p if p.chart is Chart.SOURCE else from_natural(p)


def potential(m: ManifoldSpec, theta: Point) -> float:
    """
    Potentiel φ(θ) = (d/2)·log 2π + ½·log Δ + ½·ηᵀΣη

    Sur G c'est log(2π√Δ) − Δ(θ2²θ3 − θ1θ2θ4 + θ1²θ5) ; la dérivée en η
    redonne la moyenne μ.
    """
    _require(theta, Chart.NATURAL, m)
    x = theta.array
    mu, sigma = _natural_moments(m, x)
    eta = x[: m.variables]
    return float(
        0.5 * m.variables * np.log(2.0 * np.pi)
        + 0.5 * np.log(np.linalg.det(sigma))
        + 0.5 * eta @ sigma @ eta
    )


# ---------------------------------------------------------------------------
# Métrique de Fisher-Rao
# ---------------------------------------------------------------------------

def _source_metric(m: ManifoldSpec, sigma: np.ndarray) -> np.ndarray:
    d = m.variables
    precision = np.linalg.inv(sigma)
    basis = source_basis(m)
    g = np.zeros((m.dim, m.dim))
    g[:d, :d] = precision
    for k, e_k in enumerate(basis):
        for l, e_l in enumerate(basis):
            g[d + k, d + l] = 0.5 * np.trace(precision @ e_k @ precision @ e_l)
    return 0.5 * (g + g.T)


def inverse_map_derivatives(m: ManifoldSpec, p: Point) -> Tuple[np.ndarray, np.ndarray]:
    """
    Dérivées première et seconde de ξ(θ) au point source p

    Returns:
        (J, H) avec J[a, i] = ∂ξ_a/∂θ_i et H[a, i, j] = ∂²ξ_a/∂θ_i∂θ_j
    """
    d, n = m.variables, m.dim
    mu, sigma = moments(m, as_source(p).array)
    eta = np.linalg.solve(sigma, mu)
    basis = natural_basis(m)
    d_sigma = [2.0 * sigma @ b @ sigma for b in basis]

    jac = np.zeros((n, n))
    jac[:d, :d] = sigma
    for s, ds in enumerate(d_sigma):
        jac[:d, d + s] = ds @ eta
        jac[d:, d + s] = _slot_values(ds, m.source_slots)

    hess = np.zeros((n, n, n))
    for s, ds in enumerate(d_sigma):
        for i in range(d):
            hess[:d, i, d + s] = ds[:, i]
            hess[:d, d + s, i] = ds[:, i]
    for s, b_s in enumerate(basis):
        for t, b_t in enumerate(basis):
            dds = 4.0 * (sigma @ b_t @ sigma @ b_s @ sigma + sigma @ b_s @ sigma @ b_t @ sigma)
            hess[:d, d + s, d + t] = dds @ eta
            hess[d:, d + s, d + t] = _slot_values(dds, m.source_slots)
    return jac, hess


def metric(m: ManifoldSpec, p: Point) -> TensorValue:
    """Métrique de Fisher-Rao g_ab dans la carte du point"""
    if p.manifold is not m.id:
        raise ChartMismatchError(f"Point de {p.manifold.value} pour {m.id.value}")
    require_domain(p)
    q = as_source(p)
    _, sigma = moments(m, q.array)
    g = _source_metric(m, sigma)
    if p.chart is Chart.NATURAL:
        jac, _ = inverse_map_derivatives(m, q)
        g = jac.T @ g @ jac
        g = 0.5 * (g + g.T)
    return TensorValue((DOWN, DOWN), g, symmetries=((0, 1),))


def _hessian(fn, x: np.ndarray, rel_step: float) -> np.ndarray:
    n = x.size

    def stencil(scale: float) -> np.ndarray:
        steps = np.array([scale * default_step(v, rel_step) for v in x])
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(i, n):
                total = 0.0
                for si, sj in product((1.0, -1.0), repeat=2):
                    y = x.copy()
                    y[i] += si * steps[i]
                    y[j] += sj * steps[j]
                    total += si * sj * fn(y)
                out[i, j] = out[j, i] = total / (4.0 * steps[i] * steps[j])
        return out

    coarse = stencil(1.0)
    fine = stencil(0.5)
    return (4.0 * fine - coarse) / 3.0


def metric_from_potential(m: ManifoldSpec, theta: Point, rel_step: float = 1e-4) -> TensorValue:
    """Hessienne de φ par différences centrées imbriquées, symétrique par construction"""
    _require(theta, Chart.NATURAL, m)
    require_domain(theta)
    g = _hessian(lambda y: potential(m, theta.with_coords(y)), theta.array, rel_step)
    return TensorValue((DOWN, DOWN), g, symmetries=((0, 1),), sym_tol=0.0)


# ---------------------------------------------------------------------------
# Oracle intégral (Monte-Carlo / Gauss–Hermite)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleEstimate:
    """Estimation d'une espérance avec son erreur standard"""
    value: float
    stderr: float
    method: str
    samples: int


def _scores(m: ManifoldSpec, chart: Chart, x: np.ndarray, mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Scores ∂_a log p pour un lot d'échantillons x (N × d)"""
    r = x - mu
    if chart is Chart.NATURAL:
        feats = [x[:, i] for i in range(m.variables)]
        means = list(mu)
        for i, j in m.natural_slots:
            feats.append(x[:, i] * x[:, j])
            means.append(sigma[i, j] + mu[i] * mu[j])
        return np.column_stack(feats) - np.array(means)
    precision = np.linalg.inv(sigma)
    cols = [r @ precision[:, i] for i in range(m.variables)]
    for e in source_basis(m):
        inner = precision @ e @ precision
        cols.append(-0.5 * np.trace(precision @ e) + 0.5 * np.einsum("ni,ij,nj->n", r, inner, r))
    return np.column_stack(cols)


def _hermite_grid(m: ManifoldSpec, mu: np.ndarray, sigma: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = hermegauss(order)
    weights = weights / np.sqrt(2.0 * np.pi)
    d = m.variables
    grid = np.array(list(product(nodes, repeat=d)))
    w = np.prod(np.array(list(product(weights, repeat=d))), axis=1)
    chol = np.linalg.cholesky(sigma)
    return mu + grid @ chol.T, w


def fisher_oracle(
    m: ManifoldSpec,
    p: Point,
    a: int,
    b: int,
    n_samples: int = 200_000,
    seed: int = 0,
    method: str = "monte_carlo",
    order: int = 40,
) -> OracleEstimate:
    """
    Estimation de g_ab = E[(∂a l)(∂b l)] dans la carte de p

    Args:
        method: 'monte_carlo' (échantillonneur gaussien à graine fixe) ou
            'gauss_hermite' (quadrature produit, exacte ici)
    """
    require_domain(p)
    if not (0 <= a < m.dim and 0 <= b < m.dim):
        raise RejectedInputError(f"Indices ({a}, {b}) hors de la dimension {m.dim}")
    mu, sigma = moments(m, as_source(p).array)

    if method == "gauss_hermite":
        x, w = _hermite_grid(m, mu, sigma, order)
        s = _scores(m, p.chart, x, mu, sigma)
        return OracleEstimate(float(np.sum(w * s[:, a] * s[:, b])), 0.0, method, len(w))
    if method != "monte_carlo":
        raise RejectedInputError(f"Méthode d'oracle inconnue : {method}")
    if n_samples < MC_MIN_SAMPLES:
        raise RejectedInputError("L'oracle Monte-Carlo exige au moins 10⁴ échantillons")

    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_samples, m.variables))
    x = mu + z @ np.linalg.cholesky(sigma).T
    s = _scores(m, p.chart, x, mu, sigma)
    prod_ab = s[:, a] * s[:, b]
    stderr = float(np.std(prod_ab, ddof=1) / np.sqrt(n_samples))
    logger.debug(f"[oracle] g_{a}{b} ≈ {prod_ab.mean():.6f} ± {stderr:.2e} ({m.id.value})")
    return OracleEstimate(float(prod_ab.mean()), stderr, method, n_samples)


# ---------------------------------------------------------------------------
# Connexion de Levi-Civita
# ---------------------------------------------------------------------------

def _linear_connection_part(m: ManifoldSpec, precision: np.ndarray) -> np.ndarray:
    """Partie de Γ^c_ab linéaire en Σ⁻¹ (indices [c, a, b])"""
    d, n = m.variables, m.dim
    basis = source_basis(m)
    gamma = np.zeros((n, n, n))
    for i in range(d):
        for k, e_k in enumerate(basis):
            v = -0.5 * e_k @ precision[:, i]
            gamma[:d, i, d + k] = v
            gamma[:d, d + k, i] = v
    for k, e_k in enumerate(basis):
        for l, e_l in enumerate(basis):
            out = -0.5 * (e_k @ precision @ e_l + e_l @ precision @ e_k)
            gamma[d:, d + k, d + l] = _slot_values(out, m.source_slots)
    return gamma


@lru_cache(maxsize=None)
def _connection_tables(m: ManifoldSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Γ = C0 + L·Σ⁻¹ en carte source ; C0 couple deux directions de moyenne.
    Sur I la composante σ12 est omise (∂σ12 est g-orthogonal à I).
    """
    d, n = m.variables, m.dim
    constant = np.zeros((n, n, n))
    for i in range(d):
        for j in range(d):
            out = 0.5 * (_unit(d, i, j) + _unit(d, j, i))
            for r, (si, sj) in enumerate(m.source_slots):
                constant[d + r, i, j] = out[si, sj]
    linear = np.zeros((n, n, n, d, d))
    for i in range(d):
        for j in range(d):
            linear[..., i, j] = _linear_connection_part(m, _unit(d, i, j))
    constant.setflags(write=False)
    linear.setflags(write=False)
    return constant, linear


def source_connection(m: ManifoldSpec, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Γ^c_ab et ∂_e Γ^c_ab analytiques en carte source (sans contrôle de domaine)

    Returns:
        (gamma[c, a, b], d_gamma[e, c, a, b])
    """
    d, n = m.variables, m.dim
    constant, linear = _connection_tables(m)
    _, sigma = moments(m, x)
    precision = np.linalg.inv(sigma)
    gamma = constant + np.einsum("cabij,ij->cab", linear, precision)
    d_gamma = np.zeros((n, n, n, n))
    for k, e_k in enumerate(source_basis(m)):
        d_precision = -precision @ e_k @ precision
        d_gamma[d + k] = np.einsum("cabij,ij->cab", linear, d_precision)
    return gamma, d_gamma


def source_metric_array(m: ManifoldSpec, x: np.ndarray) -> np.ndarray:
    """Matrice g en carte source (sans contrôle de domaine)"""
    _, sigma = moments(m, x)
    return _source_metric(m, sigma)


def christoffel(m: ManifoldSpec, p: Point) -> TensorValue:
    """Symboles Γ^c_ab (indices [c, a, b]) dans la carte du point"""
    if p.manifold is not m.id:
        raise ChartMismatchError(f"Point de {p.manifold.value} pour {m.id.value}")
    require_domain(p)
    q = as_source(p)
    gamma, _ = source_connection(m, q.array)
    if p.chart is Chart.NATURAL:
        jac, hess = inverse_map_derivatives(m, q)
        inv_jac = np.linalg.inv(jac)
        gamma = (np.einsum("kc,cab,ai,bj->kij", inv_jac, gamma, jac, jac)
                 + np.einsum("kc,cij->kij", inv_jac, hess))
        gamma = 0.5 * (gamma + np.swapaxes(gamma, 1, 2))
    return TensorValue((UP, DOWN, DOWN), gamma, symmetries=((1, 2),))


def christoffel_lowered(m: ManifoldSpec, p: Point) -> TensorValue:
    """Γ_ab,c = g_cd Γ^d_ab, rangé [a, b, c]"""
    gamma = christoffel(m, p).entries
    g = metric(m, p).entries
    return TensorValue((DOWN, DOWN, DOWN), np.einsum("cd,dab->abc", g, gamma), symmetries=((0, 1),))


def christoffel_from_metric(m: ManifoldSpec, p: Point, h: Optional[float] = None) -> TensorValue:
    """½ g^{cd}(∂_a g_bd + ∂_b g_ad − ∂_d g_ab) à partir de différences centrées de la métrique"""
    require_domain(p)
    g = metric(m, p).entries
    dg = np.stack([
        central_difference(lambda q: metric(m, q).entries, p, k, h=h) for k in range(m.dim)
    ])
    # dg[k, a, b] = ∂_k g_ab
    lowered = 0.5 * (dg + np.einsum("bad->abd", dg) - np.einsum("dab->abd", dg))
    gamma = np.einsum("cd,abd->cab", np.linalg.inv(g), lowered)
    gamma = 0.5 * (gamma + np.swapaxes(gamma, 1, 2))
    return TensorValue((UP, DOWN, DOWN), gamma, symmetries=((1, 2),))


# ---------------------------------------------------------------------------
# α-connexions
# ---------------------------------------------------------------------------

def _third_derivatives(fn, x: np.ndarray, rel_step: float) -> np.ndarray:
    n = x.size

    def stencil(scale: float) -> np.ndarray:
        steps = np.array([scale * default_step(v, rel_step) for v in x])
        out = np.zeros((n, n, n))
        for a, b, c in combinations_with_replacement(range(n), 3):
            total = 0.0
            for sa, sb, sc in product((1.0, -1.0), repeat=3):
                y = x.copy()
                y[a] += sa * steps[a]
                y[b] += sb * steps[b]
                y[c] += sc * steps[c]
                total += sa * sb * sc * fn(y)
            value = total / (8.0 * steps[a] * steps[b] * steps[c])
            for idx in set(permutations((a, b, c))):
                out[idx] = value
        return out

    coarse = stencil(1.0)
    fine = stencil(0.5)
    return (4.0 * fine - coarse) / 3.0


def alpha_connection(m: ManifoldSpec, theta: Point, alpha: float, rel_step: float = 2e-3) -> TensorValue:
    """Γ^(α)_ab,c = (1 − α)/2 · ∂a∂b∂c φ(θ) par différences centrées d'ordre trois"""
    _require(theta, Chart.NATURAL, m)
    require_domain(theta)
    third = _third_derivatives(lambda y: potential(m, theta.with_coords(y)), theta.array, rel_step)
    return TensorValue(
        (DOWN, DOWN, DOWN),
        0.5 * (1.0 - alpha) * third,
        symmetries=((0, 1), (1, 2), (0, 2)),
        sym_tol=0.0,
    )


def _second_scores(m: ManifoldSpec, x: np.ndarray, mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """∂a∂b log p en carte source pour un lot d'échantillons, forme (N, n, n)"""
    d, n = m.variables, m.dim
    r = x - mu
    precision = np.linalg.inv(sigma)
    basis = source_basis(m)
    out = np.zeros((len(x), n, n))
    out[:, :d, :d] = -precision
    for k, e_k in enumerate(basis):
        cross = -(r @ (precision @ e_k @ precision))
        out[:, :d, d + k] = cross
        out[:, d + k, :d] = cross
    for k, e_k in enumerate(basis):
        for l, e_l in enumerate(basis):
            a_kl = precision @ e_l @ precision @ e_k @ precision
            quad = a_kl + a_kl.T
            value = (0.5 * np.trace(precision @ e_l @ precision @ e_k)
                     - 0.5 * np.einsum("ni,ij,nj->n", r, quad, r))
            out[:, d + k, d + l] = value
    return out


def alpha_connection_integral(m: ManifoldSpec, p: Point, alpha: float, order: int = 12) -> TensorValue:
    """
    Γ^(α)_ab,c en carte source : E[(∂a∂b l + (1 − α)/2 ∂a l ∂b l) ∂c l]

    Quadrature de Gauss–Hermite ; l'intégrande est polynomial de degré 6,
    donc exacte dès l'ordre 4.
    """
    _require(p, Chart.SOURCE, m)
    require_domain(p)
    mu, sigma = moments(m, p.array)
    x, w = _hermite_grid(m, mu, sigma, order)
    s = _scores(m, Chart.SOURCE, x, mu, sigma)
    hess = _second_scores(m, x, mu, sigma)
    first = np.einsum("n,nab,nc->abc", w, hess, s)
    cubic = np.einsum("n,na,nb,nc->abc", w, s, s, s)
    return TensorValue(
        (DOWN, DOWN, DOWN),
        first + 0.5 * (1.0 - alpha) * cubic,
        symmetries=((0, 1),),
        sym_tol=1e-8,
    )


def potential_sign_check(m: ManifoldSpec, p: Point) -> Dict[str, List[float]]:
    """
    Compare ∂φ/∂η_i à la moyenne μ pour le potentiel implémenté et pour la
    forme imprimée correspondante.
    """
    source = as_source(p)
    theta = to_natural(source)
    mu, _ = moments(m, source.array)
    printed = closed_forms.PRINTED_POTENTIALS.get(m.id)
    implemented = [central_difference(lambda q: potential(m, q), theta, i) for i in range(m.variables)]
    result = {"mean": list(mu), "implemented": implemented}
    if printed is not None:
        result["printed"] = [
            central_difference(lambda q: printed(q.coords), theta, i) for i in range(m.variables)
        ]
    return result
