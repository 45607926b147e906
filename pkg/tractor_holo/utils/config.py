#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Configuration d'exécution

Priorité : option CLI > variable d'environnement (TRACTOR_HOLO_*) > fichier
KEY=value > valeur par défaut.
"""

import hashlib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import simplejson
from dotenv import dotenv_values
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..core.errors import ConfigError
from ..core.gaussian import (
    BIVARIATE,
    INDEPENDENCE,
    MC_MIN_SAMPLES,
    DomainBox,
    ManifoldSpec,
    delta,
    domain_check,
    get_manifold,
)
from ..core.geometry import Point


DEFAULT_POINTS = {
    "bivariate": (0.0, 0.0, 1.0, 1.0, 0.0),
    "independence": (0.0, 0.0, 1.0, 1.0),
}
DEFAULT_ALT_POINTS = {
    "bivariate": (0.5, -0.3, 1.5, 0.8, 0.2),
    "independence": (0.5, -0.3, 1.5, 0.8),
}
TUPLE_FIELDS = ("point", "alt_point", "loop_scales")

# Seuils algorithmiques : strictement positifs
THRESHOLDS = ("degeneracy_tol", "rank_tol", "gap_min", "transport_tol", "frame_tol")
# Tolérances des enregistrements : 0 autorisé (l'enregistrement échoue alors)
RECORD_TOLERANCES = ("check_tol", "fd_tol", "curv_tol", "sym_tol", "lin_tol", "skew_tol", "numeric_tol")


class RunConfig(BaseModel):
    """Paramètres d'une exécution (immuable)"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    manifold: Optional[Literal["bivariate", "independence"]] = None
    point: Optional[Tuple[float, ...]] = None
    alt_point: Optional[Tuple[float, ...]] = None
    seed: int = Field(default=7, ge=0, lt=2 ** 64)

    # Holonomie
    loops: int = Field(default=4, ge=1)
    loop_scheme: Literal["coord_rectangle", "random_polyline", "geodesic_triangle", "mixed"] = "mixed"
    loop_scales: Tuple[float, ...] = (0.05, 0.1, 0.2)
    curvature_points: int = Field(default=4, ge=0)
    ode_steps: int = Field(default=400, ge=1)
    min_steps: int = Field(default=8, ge=1)
    parallel_paths: int = Field(default=20, ge=1)
    n_jobs: int = 1

    # Tenseurs et oracles
    n_random: int = Field(default=50, ge=0)
    mc_points: int = Field(default=10, ge=0)
    mc_samples: int = Field(default=200000, ge=MC_MIN_SAMPLES)
    gh_order: int = Field(default=40, ge=4)
    oracle_sigmas: float = Field(default=4.0, gt=0)

    # Boîte d'échantillonnage
    mu_range: Tuple[float, float] = (-2.0, 2.0)
    sigma_range: Tuple[float, float] = (0.5, 3.0)
    delta_min: float = 0.1

    # Seuils et tolérances
    sym_tol: float = 1e-8
    frame_tol: float = 1e-10
    lin_tol: float = 1e-10
    degeneracy_tol: float = 1e-9
    curv_tol: float = 1e-8
    skew_tol: float = 1e-7
    rank_tol: float = 1e-6
    gap_min: float = 100.0
    transport_tol: float = 1e-9
    check_tol: float = 1e-8
    fd_tol: float = 1e-5
    numeric_tol: float = 1e-4

    # Sorties
    format: Literal["json", "text"] = "json"
    out: Optional[str] = None
    stability_check: bool = True
    basepoint_check: bool = True

    @field_validator(*THRESHOLDS)
    @classmethod
    def _positive(cls, value: float, info) -> float:
        if not value > 0:
            raise ValueError(f"{info.field_name} doit être > 0")
        return value

    @field_validator(*RECORD_TOLERANCES)
    @classmethod
    def _non_negative(cls, value: float, info) -> float:
        if value < 0:
            raise ValueError(f"{info.field_name} doit être ≥ 0")
        return value

    @field_validator("loop_scales")
    @classmethod
    def _scales(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value or any(s <= 0 for s in value):
            raise ValueError("loop_scales exige des côtés > 0")
        return value

    @model_validator(mode="after")
    def _check_points(self) -> "RunConfig":
        if self.delta_min <= 0:
            raise ValueError("delta_min doit être > 0")
        for m in self.manifold_specs():
            for label, p in (("point", self.base_point(m)), ("alt_point", self.alternate_point(m))):
                if not domain_check(p):
                    raise ValueError(f"{label} {p.coords} hors du domaine de {m.id.value}")
                if delta(p) < self.delta_min:
                    raise ValueError(f"{label} {p.coords} : Δ = {delta(p):.4g} < delta_min = {self.delta_min:g}")
        return self

    def manifold_specs(self) -> List[ManifoldSpec]:
        """Variété choisie, ou G puis I si aucune n'est imposée"""
        if self.manifold is None:
            return [BIVARIATE, INDEPENDENCE]
        return [get_manifold(self.manifold)]

    @staticmethod
    def _key(m: ManifoldSpec) -> str:
        return "bivariate" if m is BIVARIATE else "independence"

    def _chosen(self, m: ManifoldSpec, value: Optional[Tuple[float, ...]], defaults: Dict[str, Tuple]) -> Point:
        key = self._key(m)
        if value is not None and (self.manifold == key or len(value) == m.dim):
            return Point.source(m.id, value)
        return Point.source(m.id, defaults[key])

    def base_point(self, m: ManifoldSpec) -> Point:
        return self._chosen(m, self.point, DEFAULT_POINTS)

    def alternate_point(self, m: ManifoldSpec) -> Point:
        return self._chosen(m, self.alt_point, DEFAULT_ALT_POINTS)

    def domain_box(self) -> DomainBox:
        return DomainBox(self.mu_range, self.sigma_range, self.delta_min)

    def canonical_json(self) -> str:
        return simplejson.dumps(self.model_dump(mode="json", exclude={"out", "format"}), sort_keys=True)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


class EnvOverrides(BaseSettings):
    """Surcharges par variables d'environnement TRACTOR_HOLO_*"""

    model_config = SettingsConfigDict(env_prefix="TRACTOR_HOLO_", extra="ignore")

    seed: Optional[int] = None


def _split_tuple(value: Union[str, Tuple, List]) -> Union[Tuple, List]:
    if isinstance(value, str):
        return tuple(part.strip() for part in value.split(",") if part.strip())
    return value


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Lit un fichier KEY=value (clés insensibles à la casse)

    Raises:
        ConfigError: fichier introuvable ou clé inconnue
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Fichier de configuration introuvable : {path}")
    raw = dotenv_values(path)
    known = set(RunConfig.model_fields)
    values: Dict[str, Any] = {}
    for key, value in raw.items():
        name = key.strip().lower()
        if name not in known:
            raise ConfigError(f"Clé inconnue dans {path} : {key}")
        if value is None or value == "":
            continue
        values[name] = _split_tuple(value) if name in TUPLE_FIELDS or name in ("mu_range", "sigma_range") else value
    logger.debug(f"[config] {len(values)} clés lues depuis {path}")
    return values


def load_run_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Construit la configuration effective

    Args:
        path: fichier KEY=value optionnel
        overrides: valeurs issues de la ligne de commande (None ignoré)

    Raises:
        ConfigError: toute erreur de lecture ou de validation
    """
    values: Dict[str, Any] = read_config_file(path) if path else {}
    try:
        env = EnvOverrides()
    except ValidationError as exc:
        raise ConfigError(f"Variable d'environnement invalide : {exc}") from exc
    if env.seed is not None:
        values["seed"] = env.seed
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _split_tuple(value) if key in TUPLE_FIELDS else value
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
