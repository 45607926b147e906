#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Noyau géométrique : cartes, points, tenseurs denses, différences centrées
et algèbre linéaire sensible à la signature.

Toutes les valeurs sont immuables après construction ; les fonctions sont
pures et peuvent être appelées depuis plusieurs workers sans état partagé.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .errors import (
    DegeneracyError,
    DomainError,
    InconsistencyError,
    RejectedInputError,
)


DEFAULT_REL_STEP = 1e-5
DEGENERACY_TOL = 1e-9
FRAME_TOL = 1e-10
SYM_TOL = 1e-8

UP = "up"
DOWN = "down"


class Chart(str, Enum):
    """Carte de coordonnées d'un point"""
    SOURCE = "SourceParams"
    NATURAL = "NaturalParams"


class ManifoldId(str, Enum):
    """Identité de la variété statistique"""
    BIVARIATE = "BivariateGaussian"
    INDEPENDENCE = "IndependenceSub"
    UNIVARIATE = "UnivariateGaussian"


MANIFOLD_DIMS = {
    ManifoldId.BIVARIATE: 5,
    ManifoldId.INDEPENDENCE: 4,
    ManifoldId.UNIVARIATE: 2,
}


@dataclass(frozen=True)
class Point:
    """
    Tuple de coordonnées étiqueté par sa carte et sa variété.

    Le domaine (Σ définie positive) n'est pas imposé à la construction :
    les opérations qui consomment un point le vérifient via domain_check.
    """
    chart: Chart
    manifold: ManifoldId
    coords: Tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        expected = MANIFOLD_DIMS[self.manifold]
        if len(coords) != expected:
            raise RejectedInputError(
                f"{self.manifold.value} attend {expected} coordonnées, reçu {len(coords)}"
            )
        object.__setattr__(self, "coords", coords)

    @classmethod
    def source(cls, manifold: ManifoldId, coords: Sequence[float]) -> "Point":
        return cls(Chart.SOURCE, manifold, tuple(coords))

    @classmethod
    def natural(cls, manifold: ManifoldId, coords: Sequence[float]) -> "Point":
        return cls(Chart.NATURAL, manifold, tuple(coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    def with_coords(self, coords: Sequence[float]) -> "Point":
        """Même carte et même variété, nouvelles coordonnées"""
        return Point(self.chart, self.manifold, tuple(coords))

    def shifted(self, direction: int, offset: float) -> "Point":
        coords = list(self.coords)
        coords[direction] += offset
        return self.with_coords(coords)


@dataclass(frozen=True)
class TensorValue:
    """
    Tableau dense de composantes avec valences et symétries déclarées.

    Args:
        valences: 'up' / 'down' pour chaque indice
        entries: composantes, toutes les dimensions égales
        symmetries: paires d'indices symétriques
        antisymmetries: paires d'indices antisymétriques
        sym_tol: tolérance relative de contrôle des symétries déclarées
    """
    valences: Tuple[str, ...]
    entries: np.ndarray
    symmetries: Tuple[Tuple[int, int], ...] = ()
    antisymmetries: Tuple[Tuple[int, int], ...] = ()
    sym_tol: float = SYM_TOL

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        valences = tuple(self.valences)
        if entries.ndim != len(valences):
            raise RejectedInputError(
                f"Rang {entries.ndim} incompatible avec {len(valences)} valences"
            )
        if any(v not in (UP, DOWN) for v in valences):
            raise RejectedInputError(f"Valences invalides : {valences}")
        if entries.ndim and len(set(entries.shape)) != 1:
            raise RejectedInputError(f"Dimensions inégales : {entries.shape}")

        scale = max(1.0, float(np.max(np.abs(entries)))) if entries.size else 1.0
        for i, j in self.symmetries:
            gap = np.max(np.abs(entries - np.swapaxes(entries, i, j))) if entries.size else 0.0
            if gap > self.sym_tol * scale:
                raise InconsistencyError(f"Symétrie ({i},{j}) violée : écart {gap:.3e}")
        for i, j in self.antisymmetries:
            gap = np.max(np.abs(entries + np.swapaxes(entries, i, j))) if entries.size else 0.0
            if gap > self.sym_tol * scale:
                raise InconsistencyError(f"Antisymétrie ({i},{j}) violée : écart {gap:.3e}")

        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "valences", valences)
        object.__setattr__(self, "symmetries", tuple(tuple(p) for p in self.symmetries))
        object.__setattr__(self, "antisymmetries", tuple(tuple(p) for p in self.antisymmetries))

    @property
    def rank(self) -> int:
        return len(self.valences)

    @property
    def dim(self) -> int:
        return self.entries.shape[0] if self.rank else 0

    def __getitem__(self, index: Any) -> Any:
        return self.entries[index]


@dataclass(frozen=True)
class FrameChange:
    """
    Changement de base vers la forme canonique diag(−1,…,−1,+1,…,+1).

    Les colonnes de `matrix` forment une base orthonormée pour la forme ;
    `residual` est l'écart max de Wᵀ·forme·W à la diagonale canonique.
    """
    matrix: np.ndarray
    signature: Tuple[int, int]
    residual: float = 0.0

    @property
    def eta(self) -> np.ndarray:
        p, q = self.signature
        return np.diag([-1.0] * p + [1.0] * q)

    def to_frame(self, operator: np.ndarray) -> np.ndarray:
        """Exprime un endomorphisme dans la base orthonormée"""
        return np.linalg.solve(self.matrix, operator @ self.matrix)

    def from_frame(self, operator: np.ndarray) -> np.ndarray:
        return self.matrix @ operator @ np.linalg.inv(self.matrix)


def default_step(value: float, rel_step: float = DEFAULT_REL_STEP) -> float:
    """Pas h = rel_step · max(1, |x|)"""
    return rel_step * max(1.0, abs(float(value)))


def central_difference(
    f: Callable[[Point], Any],
    p: Point,
    direction: int,
    h: Optional[float] = None,
    richardson: bool = True,
    inside: Optional[Callable[[Point], bool]] = None,
) -> Any:
    """
    Dérivée partielle de f au point p par différences centrées

    Args:
        f: champ (scalaire ou tableau) évalué sur des points de la carte de p
        p: point d'évaluation
        direction: indice de coordonnée
        h: pas (défaut 1e−5·max(1, |x_dir|))
        richardson: demi-pas puis extrapolation (4·D(h/2) − D(h))/3
        inside: prédicat de domaine (défaut : domain_check)

    Returns:
        Approximation de ∂f/∂x_dir

    Raises:
        DomainError: si un point du stencil sort du domaine
    """
    if inside is None:
        from .gaussian import domain_check
        inside = domain_check

    step = default_step(p.coords[direction]) if h is None else float(h)

    def at(offset: float):
        q = p.shifted(direction, offset)
        if not inside(q):
            raise DomainError(f"Stencil hors domaine en {q.coords}")
        return f(q)

    coarse = (np.asarray(at(step)) - np.asarray(at(-step))) / (2.0 * step)
    if not richardson:
        return coarse if np.ndim(coarse) else float(coarse)
    half = 0.5 * step
    fine = (np.asarray(at(half)) - np.asarray(at(-half))) / (2.0 * half)
    result = (4.0 * fine - coarse) / 3.0
    return result if np.ndim(result) else float(result)


def array_partial(
    fn: Callable[[np.ndarray], Any],
    x: np.ndarray,
    direction: int,
    rel_step: float = DEFAULT_REL_STEP,
    richardson: bool = True,
) -> np.ndarray:
    """Même schéma que central_difference, directement sur un tableau de coordonnées"""
    x = np.asarray(x, dtype=float)
    step = default_step(x[direction], rel_step)

    def at(offset: float) -> np.ndarray:
        y = x.copy()
        y[direction] += offset
        return np.asarray(fn(y), dtype=float)

    coarse = (at(step) - at(-step)) / (2.0 * step)
    if not richardson:
        return coarse
    half = 0.5 * step
    fine = (at(half) - at(-half)) / (2.0 * half)
    return (4.0 * fine - coarse) / 3.0


def array_gradient(
    fn: Callable[[np.ndarray], Any],
    x: np.ndarray,
    rel_step: float = DEFAULT_REL_STEP,
) -> np.ndarray:
    """Pile des dérivées partielles, axe 0 = direction de dérivation"""
    x = np.asarray(x, dtype=float)
    return np.stack([array_partial(fn, x, k, rel_step) for k in range(x.size)])


def orthonormalize(
    form: np.ndarray,
    degeneracy_tol: float = DEGENERACY_TOL,
    frame_tol: float = FRAME_TOL,
) -> FrameChange:
    """
    Base orthonormée d'une forme bilinéaire symétrique non dégénérée

    Les vecteurs de signe négatif viennent en premier ; dans chaque classe de
    signe, l'ordre suit la coordonnée dominante de chaque vecteur propre.

    Raises:
        RejectedInputError: forme non symétrique
        DegeneracyError: plus petite valeur propre (relative) sous degeneracy_tol
    """
    matrix = np.asarray(form, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise RejectedInputError(f"Forme non carrée : {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if np.max(np.abs(matrix - matrix.T)) > SYM_TOL * scale:
        raise RejectedInputError("Forme bilinéaire non symétrique")
    sym = 0.5 * (matrix + matrix.T)

    eigenvalues, eigenvectors = np.linalg.eigh(sym)
    largest = float(np.max(np.abs(eigenvalues)))
    smallest = float(np.min(np.abs(eigenvalues)))
    if largest == 0.0 or smallest <= degeneracy_tol * largest:
        raise DegeneracyError(
            f"Forme dégénérée (|λ|min = {smallest:.3e}, |λ|max = {largest:.3e})",
            smallest_eigenvalue=smallest,
        )

    columns = []
    for k, value in enumerate(eigenvalues):
        vector = eigenvectors[:, k]
        lead = int(np.argmax(np.abs(vector)))
        if vector[lead] < 0:
            vector = -vector
        columns.append((value > 0, lead, vector / np.sqrt(abs(value))))
    columns.sort(key=lambda c: (c[0], c[1]))

    frame = np.column_stack([c[2] for c in columns])
    negatives = sum(1 for c in columns if not c[0])
    signature = (negatives, len(columns) - negatives)
    canonical = np.diag([-1.0] * signature[0] + [1.0] * signature[1])
    residual = float(np.max(np.abs(frame.T @ sym @ frame - canonical)))
    if residual > frame_tol:
        logger.warning(f"[orthonormalize] résidu {residual:.3e} > frame_tol {frame_tol:.1e}")
    return FrameChange(matrix=frame, signature=signature, residual=residual)


def _checked_inverse(g: TensorValue, degeneracy_tol: float = DEGENERACY_TOL) -> np.ndarray:
    eigenvalues = np.linalg.eigvalsh(0.5 * (g.entries + g.entries.T))
    largest = float(np.max(np.abs(eigenvalues)))
    smallest = float(np.min(np.abs(eigenvalues)))
    if largest == 0.0 or smallest <= degeneracy_tol * largest:
        raise DegeneracyError("Métrique singulière", smallest_eigenvalue=smallest)
    return np.linalg.inv(g.entries)


def _check_slot(t: TensorValue, slot: int):
    if not 0 <= slot < t.rank:
        raise RejectedInputError(f"Indice {slot} hors du rang {t.rank}")


def _contract_slot(matrix: np.ndarray, t: TensorValue, slot: int, valence: str) -> TensorValue:
    _check_slot(t, slot)
    entries = np.moveaxis(np.tensordot(matrix, t.entries, axes=([1], [slot])), 0, slot)
    valences = list(t.valences)
    valences[slot] = valence
    keep_sym = tuple(pair for pair in t.symmetries if slot not in pair)
    keep_anti = tuple(pair for pair in t.antisymmetries if slot not in pair)
    return TensorValue(tuple(valences), entries, keep_sym, keep_anti, t.sym_tol)


def raise_index(t: TensorValue, slot: int, g: TensorValue) -> TensorValue:
    """Contraction de l'indice `slot` avec g^{-1}"""
    _check_slot(t, slot)
    if t.valences[slot] != DOWN:
        raise RejectedInputError(f"L'indice {slot} est déjà contravariant")
    return _contract_slot(_checked_inverse(g), t, slot, UP)


def lower_index(t: TensorValue, slot: int, g: TensorValue) -> TensorValue:
    """Contraction de l'indice `slot` avec g"""
    _check_slot(t, slot)
    if t.valences[slot] != UP:
        raise RejectedInputError(f"L'indice {slot} est déjà covariant")
    _checked_inverse(g)
    return _contract_slot(np.asarray(g.entries), t, slot, DOWN)


def contract(t: TensorValue, first: int, second: int) -> Any:
    """Trace sur une paire d'indices de valences opposées"""
    if {t.valences[first], t.valences[second]} != {UP, DOWN}:
        raise RejectedInputError("La trace exige un indice haut et un indice bas")
    traced = np.trace(t.entries, axis1=first, axis2=second)
    if np.ndim(traced) == 0:
        return float(traced)
    remaining = tuple(v for k, v in enumerate(t.valences) if k not in (first, second))
    return TensorValue(remaining, traced, sym_tol=t.sym_tol)
