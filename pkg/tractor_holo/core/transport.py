#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Transport parallèle le long de chemins par morceaux et familles de lacets.

Une connexion linéaire est donnée par ses matrices A_b(x) (∇_b = ∂_b + A_b) ;
le transport résout dU/dt = −(γ'^b A_b) U par Runge-Kutta d'ordre 4, avec un
contrôle par dédoublement du pas.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy.integrate import solve_bvp
from scipy.linalg import expm, logm

from .errors import DomainError, LogFailureError, RejectedInputError, StepUnderflowError
from .geometry import array_gradient


STEPS_PER_UNIT = 400
MIN_STEPS = 8
MAX_STEPS = 200000
TRANSPORT_TOL = 1e-9
LOOP_SCALES = (0.05, 0.1, 0.2)
CLOSURE_TOL = 1e-12


class Connection:
    """
    Connexion linéaire sur un fibré trivialisé au-dessus d'une carte

    Les sous-classes fournissent matrices(x) de forme (dim, rank, rank) et la
    forme bilinéaire de fibre préservée (Gram de la trivialisation).
    """

    name = "connection"
    dim = 0
    rank = 0

    def matrices(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def fiber_metric(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(x)))

    def generator(self, x: np.ndarray, velocity: np.ndarray) -> np.ndarray:
        """γ'^b A_b"""
        return np.einsum("b,bij->ij", velocity, self.matrices(x))

    def curvature_operators(self, x: np.ndarray, rel_step: float = 1e-5) -> np.ndarray:
        """
        Ω_ab = ∂_a A_b − ∂_b A_a + [A_a, A_b] pour toutes les paires

        Returns:
            tableau (dim, dim, rank, rank), antisymétrique en (a, b)
        """
        x = np.asarray(x, dtype=float)
        a_mats = self.matrices(x)
        d_a = array_gradient(self.matrices, x, rel_step)
        omega = (d_a - np.swapaxes(d_a, 0, 1)
                 + np.einsum("aij,bjk->abik", a_mats, a_mats)
                 - np.einsum("bij,ajk->abik", a_mats, a_mats))
        return 0.5 * (omega - np.swapaxes(omega, 0, 1))

    def curvature(self, x: np.ndarray, a: int, b: int) -> np.ndarray:
        if a == b:
            raise RejectedInputError("La courbure exige deux directions distinctes")
        return self.curvature_operators(x)[a, b]


# ---------------------------------------------------------------------------
# Chemins
# ---------------------------------------------------------------------------

class Segment:
    """Morceau de courbe paramétré sur [0, 1]"""

    start: np.ndarray
    end: np.ndarray

    def point(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def velocity(self, t: float) -> np.ndarray:
        raise NotImplementedError

    @property
    def length(self) -> float:
        """Longueur coordonnée (euclidienne dans la carte)"""
        raise NotImplementedError

    def reversed(self) -> "Segment":
        raise NotImplementedError


class LineSegment(Segment):
    def __init__(self, start: Sequence[float], end: Sequence[float]):
        self.start = np.asarray(start, dtype=float)
        self.end = np.asarray(end, dtype=float)

    def point(self, t: float) -> np.ndarray:
        return self.start + t * (self.end - self.start)

    def velocity(self, t: float) -> np.ndarray:
        return self.end - self.start

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    def reversed(self) -> "LineSegment":
        return LineSegment(self.end, self.start)


class CurveSegment(Segment):
    """
    Courbe lisse donnée par un évaluateur (position, vitesse) ; les extrémités
    sont recalées exactement sur start et end par une correction affine.
    """

    def __init__(self, fn: Callable[[float], Tuple[np.ndarray, np.ndarray]],
                 start: Sequence[float], end: Sequence[float], samples: int = 64):
        self._fn = fn
        self.start = np.asarray(start, dtype=float)
        self.end = np.asarray(end, dtype=float)
        first, _ = fn(0.0)
        last, _ = fn(1.0)
        self._shift0 = self.start - first
        self._shift1 = self.end - last
        ts = np.linspace(0.0, 1.0, samples + 1)
        pts = np.array([self.point(t) for t in ts])
        self._length = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))

    def point(self, t: float) -> np.ndarray:
        pos, _ = self._fn(t)
        return pos + (1.0 - t) * self._shift0 + t * self._shift1

    def velocity(self, t: float) -> np.ndarray:
        _, vel = self._fn(t)
        return vel + self._shift1 - self._shift0

    @property
    def length(self) -> float:
        return self._length

    def reversed(self) -> "CurveSegment":
        fn = self._fn
        return CurveSegment(lambda t: (fn(1.0 - t)[0], -fn(1.0 - t)[1]), self.end, self.start)


class LoopKind(str, Enum):
    COORD_RECTANGLE = "CoordRectangle"
    RANDOM_POLYLINE = "RandomPolyline"
    GEODESIC_TRIANGLE = "GeodesicTriangle"


@dataclass
class LoopPath:
    """Lacet fermé basé en `base`, suite de segments consécutifs"""
    base: np.ndarray
    segments: List[Segment]
    kind: LoopKind
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        if not self.segments:
            return
        gap = max(
            float(np.max(np.abs(self.segments[0].start - self.base))),
            float(np.max(np.abs(self.segments[-1].end - self.base))),
        )
        for before, after in zip(self.segments, self.segments[1:]):
            gap = max(gap, float(np.max(np.abs(before.end - after.start))))
        if gap > CLOSURE_TOL:
            raise RejectedInputError(f"Lacet non fermé (écart {gap:.3e})")

    @property
    def length(self) -> float:
        return float(sum(s.length for s in self.segments))

    def sample(self, per_segment: int = 16) -> np.ndarray:
        """Points échantillonnés le long du lacet"""
        ts = np.linspace(0.0, 1.0, per_segment + 1)
        return np.array([s.point(t) for s in self.segments for t in ts])


@dataclass(frozen=True)
class LoopDomain:
    """
    Domaine où tirer des lacets

    Args:
        contains: prédicat de domaine sur les coordonnées
        sample: tirage d'un point à partir d'un générateur numpy
        christoffel: Γ^c_ab(x), requis pour les triangles géodésiques
    """
    contains: Callable[[np.ndarray], bool]
    sample: Callable[[np.random.Generator], np.ndarray]
    christoffel: Optional[Callable[[np.ndarray], np.ndarray]] = None


def coord_rectangle(base: np.ndarray, a: int, b: int, eps: float,
                    contains: Optional[Callable[[np.ndarray], bool]] = None) -> LoopPath:
    """Rectangle +ε e_a, +ε e_b, −ε e_a, −ε e_b ; un côté qui sort du domaine est retourné"""
    base = np.asarray(base, dtype=float)
    step_a = np.zeros_like(base)
    step_b = np.zeros_like(base)
    step_a[a] = eps
    step_b[b] = eps
    if contains is not None:
        if not contains(base + step_a):
            step_a = -step_a
        if not contains(base + step_b):
            step_b = -step_b
    corners = [base, base + step_a, base + step_a + step_b, base + step_b, base]
    segments = [LineSegment(p, q) for p, q in zip(corners, corners[1:])]
    return LoopPath(base, segments, LoopKind.COORD_RECTANGLE,
                    {"a": a, "b": b, "eps": float(eps),
                     "sign_a": float(np.sign(step_a[a])), "sign_b": float(np.sign(step_b[b]))})


def polyline_loop(base: np.ndarray, waypoints: Sequence[np.ndarray], seed: int = 0) -> LoopPath:
    nodes = [np.asarray(base, dtype=float)] + [np.asarray(w, dtype=float) for w in waypoints]
    nodes.append(nodes[0])
    segments = [LineSegment(p, q) for p, q in zip(nodes, nodes[1:])]
    return LoopPath(nodes[0], segments, LoopKind.RANDOM_POLYLINE, {"seed": seed, "waypoints": len(waypoints)})


def geodesic_segment(christoffel: Callable[[np.ndarray], np.ndarray],
                     start: np.ndarray, end: np.ndarray, nodes: int = 11, tol: float = 1e-8) -> CurveSegment:
    """
    Géodésique entre deux points par solve_bvp sur x'' = −Γ(x)(x', x')

    Raises:
        RejectedInputError: si le problème aux limites ne converge pas
    """
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    n = start.size
    mesh = np.linspace(0.0, 1.0, nodes)
    guess = np.vstack([
        start[:, None] + mesh[None, :] * (end - start)[:, None],
        np.repeat((end - start)[:, None], nodes, axis=1),
    ])

    def rhs(_, y):
        out = np.empty_like(y)
        out[:n] = y[n:]
        for k in range(y.shape[1]):
            gamma = christoffel(y[:n, k])
            out[n:, k] = -np.einsum("cab,a,b->c", gamma, y[n:, k], y[n:, k])
        return out

    def bc(ya, yb):
        return np.concatenate([ya[:n] - start, yb[:n] - end])

    solution = solve_bvp(rhs, bc, mesh, guess, tol=tol, max_nodes=2000)
    if solution.status != 0:
        raise RejectedInputError(f"Géodésique non convergée : {solution.message}")
    sol = solution.sol

    def evaluate(t: float) -> Tuple[np.ndarray, np.ndarray]:
        y = sol(t)
        return y[:n], y[n:]

    return CurveSegment(evaluate, start, end)


def loop_family(
    base: np.ndarray,
    scheme: str,
    count: int,
    seed: int,
    domain: LoopDomain,
    scales: Sequence[float] = LOOP_SCALES,
) -> List[LoopPath]:
    """
    Famille déterministe de lacets en `base`

    Args:
        scheme: 'coord_rectangle', 'random_polyline', 'geodesic_triangle' ou 'mixed'
            ('mixed' = tous les rectangles + `count` lignes brisées)
        count: nombre de lacets aléatoires (≥ 1)
        seed: graine maîtresse, un flux par lacet via SeedSequence.spawn
        domain: domaine de tirage et prédicat d'appartenance
        scales: côtés ε des rectangles
    """
    if count < 1:
        raise RejectedInputError("loop_family exige count ≥ 1")
    base = np.asarray(base, dtype=float)
    if not domain.contains(base):
        raise DomainError(f"Base hors domaine : {tuple(base)}")

    loops: List[LoopPath] = []
    if scheme in ("coord_rectangle", "mixed"):
        for eps in scales:
            for a, b in combinations(range(base.size), 2):
                loops.append(coord_rectangle(base, a, b, eps, domain.contains))

    streams = np.random.SeedSequence(seed).spawn(count)
    if scheme in ("random_polyline", "mixed"):
        for k, stream in enumerate(streams):
            rng = np.random.default_rng(stream)
            waypoints = [domain.sample(rng) for _ in range(int(rng.integers(2, 5)))]
            loops.append(polyline_loop(base, waypoints, seed=k))
    elif scheme == "geodesic_triangle":
        if domain.christoffel is None:
            raise RejectedInputError("Les triangles géodésiques exigent les symboles de Christoffel")
        for k, stream in enumerate(streams):
            rng = np.random.default_rng(stream)
            corners = [base, domain.sample(rng), domain.sample(rng), base]
            try:
                segments = [geodesic_segment(domain.christoffel, p, q) for p, q in zip(corners, corners[1:])]
            except RejectedInputError as exc:
                logger.warning(f"[loop_family] triangle {k} écarté : {exc}")
                continue
            loops.append(LoopPath(base, segments, LoopKind.GEODESIC_TRIANGLE, {"seed": k}))
    elif scheme not in ("coord_rectangle", "mixed"):
        raise RejectedInputError(f"Schéma de lacets inconnu : {scheme}")

    logger.debug(f"[loop_family] {len(loops)} lacets ({scheme}, graine {seed})")
    return loops


# ---------------------------------------------------------------------------
# Intégration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransportResult:
    """Matrice de transport, estimation d'erreur par dédoublement et nombre de pas"""
    matrix: np.ndarray
    error: float
    steps: int
    refined: bool = False


def rk4(connection: Connection, segment: Segment, steps: int, initial: np.ndarray,
        check_domain: bool = False) -> np.ndarray:
    """Runge-Kutta 4 pour dU/dt = −(γ'^b A_b) U sur un segment"""
    h = 1.0 / steps
    u = np.array(initial, dtype=float)

    def rate(t: float) -> np.ndarray:
        x = segment.point(t)
        if check_domain and not connection.contains(x):
            raise DomainError(f"Chemin hors domaine en {tuple(x)}")
        return -connection.generator(x, segment.velocity(t))

    g_start = rate(0.0)
    for k in range(steps):
        t = k * h
        g_mid = rate(t + 0.5 * h)
        g_end = rate(t + h)
        k1 = g_start @ u
        k2 = g_mid @ (u + 0.5 * h * k1)
        k3 = g_mid @ (u + 0.5 * h * k2)
        k4 = g_end @ (u + h * k3)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        g_start = g_end
    return u


def segment_steps(segment: Segment, steps_per_unit: int = STEPS_PER_UNIT, min_steps: int = MIN_STEPS) -> int:
    return max(min_steps, int(math.ceil(steps_per_unit * segment.length)))


def parallel_transport(
    connection: Connection,
    path: Union[LoopPath, Segment, Sequence[Segment]],
    frame: Optional[np.ndarray] = None,
    steps_per_unit: int = STEPS_PER_UNIT,
    min_steps: int = MIN_STEPS,
    tol: float = TRANSPORT_TOL,
    max_steps: int = MAX_STEPS,
) -> TransportResult:
    """
    Transport parallèle le long d'un chemin

    Chaque segment est intégré avec n puis 2n pas ; si l'écart dépasse `tol`,
    le segment est repris avec 4 fois plus de pas.

    Args:
        frame: repère initial (colonnes), identité par défaut

    Returns:
        TransportResult dont la matrice exprime le transport dans `frame`

    Raises:
        DomainError: chemin hors domaine
        StepUnderflowError: raffinement au-delà de max_steps
    """
    if isinstance(path, LoopPath):
        segments = list(path.segments)
    elif isinstance(path, Segment):
        segments = [path]
    else:
        segments = list(path)
    if min_steps < 1:
        raise RejectedInputError("min_steps doit être ≥ 1")

    u = np.eye(connection.rank)
    error = 0.0
    total = 0
    refined = False
    for segment in segments:
        if segment.length == 0.0:
            continue
        n = segment_steps(segment, steps_per_unit, min_steps)
        coarse = rk4(connection, segment, n, u, check_domain=True)
        fine = rk4(connection, segment, 2 * n, u)
        gap = float(np.max(np.abs(fine - coarse)))
        while gap > tol:
            refined = True
            n *= 4
            if 2 * n > max_steps:
                raise StepUnderflowError(f"Raffinement au-delà de {max_steps} pas (écart {gap:.3e})")
            coarse = rk4(connection, segment, n, u)
            fine = rk4(connection, segment, 2 * n, u)
            gap = float(np.max(np.abs(fine - coarse)))
        u = fine
        error += gap
        total += 2 * n

    matrix = u if frame is None else np.linalg.solve(frame, u @ frame)
    return TransportResult(matrix=matrix, error=error, steps=total, refined=refined)


def matrix_log(matrix: np.ndarray, roundtrip_tol: float = 1e-9) -> np.ndarray:
    """
    Logarithme principal (scipy.linalg.logm, scaling-and-squaring inverse)

    Raises:
        LogFailureError: spectre sur le demi-axe réel négatif ou aller-retour exp/log imprécis
    """
    m = np.asarray(matrix, dtype=float)
    eigenvalues = np.linalg.eigvals(m)
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    on_axis = (np.abs(eigenvalues.imag) <= 1e-10 * scale) & (eigenvalues.real <= 1e-12 * scale)
    if np.any(on_axis):
        raise LogFailureError(f"Valeur propre sur le demi-axe réel négatif : {eigenvalues[on_axis]}")
    log = logm(m)
    if np.iscomplexobj(log):
        if np.max(np.abs(log.imag)) > 1e-9 * max(1.0, float(np.max(np.abs(log.real)))):
            raise LogFailureError("Logarithme principal non réel")
        log = log.real
    residual = float(np.max(np.abs(expm(log) - m)))
    if residual > roundtrip_tol * max(1.0, float(np.max(np.abs(m)))):
        raise LogFailureError(f"Aller-retour exp(log M) imprécis : {residual:.3e}")
    return log
