#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Structure des rapports de vérification
"""

from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .. import __version__


class CheckRecord(BaseModel):
    """
    Un enregistrement de vérification

    kind = 'check' : réussite si |calculé − cible| ≤ tolérance (ou condition booléenne) ;
    kind = 'report' : comparaison affichée côte à côte, réussie si les valeurs sont finies.
    """

    model_config = ConfigDict(arbitrary_types_allowed=False)

    name: str
    anchor: str
    kind: Literal["check", "report"] = "check"
    target: Any = None
    computed: Any = None
    tolerance: Optional[float] = None
    passed: bool
    detail: Dict[str, Any] = Field(default_factory=dict)


class InvariantSubspaceSection(BaseModel):
    dimension: int
    norm_type: str
    basis: List[List[float]]
    invariance_residual: float
    complement_residual: float


class HolonomySection(BaseModel):
    manifold: str
    connection: str
    dimension: int
    label: str
    gap: float
    singular_values: List[float]
    invariant_subspaces: List[InvariantSubspaceSection] = Field(default_factory=list)
    diagnostics: Dict[str, Any] = Field(default_factory=dict)


class EnvironmentSection(BaseModel):
    seed: int
    config_hash: str
    version: str = __version__
    inner_product: str = "h(V,W) = σ_V y_W + g(X_V, X_W) + y_V σ_W"


class VerificationReport(BaseModel):
    command: str
    manifolds: List[str]
    records: List[CheckRecord] = Field(default_factory=list)
    holonomy: List[HolonomySection] = Field(default_factory=list)
    environment: EnvironmentSection

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failures(self) -> List[CheckRecord]:
        return [r for r in self.records if not r.passed]


def _plain(value: Any) -> Any:
    """Convertit les valeurs numpy en types Python"""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def check_record(
    name: str,
    anchor: str,
    computed: Any,
    target: Any = None,
    tolerance: Optional[float] = None,
    passed: Optional[bool] = None,
    **detail: Any,
) -> CheckRecord:
    """
    Construit un enregistrement 'check'

    Sans `passed` explicite : écart max |calculé − cible| ≤ tolérance, ou, sans
    cible, |calculé| ≤ tolérance (cas d'un résidu).
    """
    if passed is None:
        value = np.asarray(computed, dtype=float)
        reference = 0.0 if target is None else np.asarray(target, dtype=float)
        deviation = float(np.max(np.abs(value - reference))) if value.size else 0.0
        passed = bool(np.isfinite(deviation) and deviation <= tolerance)
        detail.setdefault("deviation", deviation)
    return CheckRecord(
        name=name,
        anchor=anchor,
        kind="check",
        target=_plain(target),
        computed=_plain(computed),
        tolerance=tolerance,
        passed=bool(passed),
        detail=_plain(detail),
    )


def report_record(name: str, anchor: str, computed: Any, target: Any = None, **detail: Any) -> CheckRecord:
    """Enregistrement 'report' : valeurs côte à côte, réussi si elles sont finies"""
    finite = bool(np.all(np.isfinite(np.asarray(computed, dtype=float))))
    return CheckRecord(
        name=name,
        anchor=anchor,
        kind="report",
        target=_plain(target),
        computed=_plain(computed),
        passed=finite,
        detail=_plain(detail),
    )


def failure_record(name: str, anchor: str, error: Exception, **detail: Any) -> CheckRecord:
    """Erreur numérique capturée dans le rapport au lieu d'être propagée"""
    detail = dict(detail)
    detail["error"] = f"{type(error).__name__}: {error}"
    singular_values = getattr(error, "singular_values", None)
    if singular_values:
        detail["singular_values"] = list(singular_values)
    return CheckRecord(name=name, anchor=anchor, kind="check", passed=False, detail=_plain(detail))


def holonomy_section(manifold: str, est) -> HolonomySection:
    return HolonomySection(
        manifold=manifold,
        connection=est.connection,
        dimension=est.dimension,
        label=est.label,
        gap=est.gap,
        singular_values=list(est.singular_values),
        invariant_subspaces=[
            InvariantSubspaceSection(
                dimension=s.basis.shape[1],
                norm_type=s.norm_type,
                basis=s.basis.T.tolist(),
                invariance_residual=s.invariance_residual,
                complement_residual=s.complement_residual,
            )
            for s in est.invariant_subspaces
        ],
        diagnostics=_plain(est.diagnostics),
    )
