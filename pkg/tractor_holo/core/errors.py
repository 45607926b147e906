#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Hiérarchie d'exceptions du moteur géométrique
"""

from typing import Optional, Sequence


class TractorHoloError(Exception):
    """Racine de toutes les erreurs du package"""


class RejectedInputError(TractorHoloError, ValueError):
    """Entrée refusée (point hors domaine, indices invalides, ...)"""


class DomainError(RejectedInputError):
    """Point ou stencil hors du domaine Σ ∈ PD(d)"""


class ChartMismatchError(TractorHoloError, ValueError):
    """Opération appelée avec un point dans la mauvaise carte ou la mauvaise variété"""


class InconsistencyError(TractorHoloError, ValueError):
    """Résultat incohérent avec les contraintes attendues"""


class DegeneracyError(TractorHoloError, ArithmeticError):
    """Forme bilinéaire ou métrique dégénérée"""

    def __init__(self, message: str, smallest_eigenvalue: Optional[float] = None):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class AmbiguousRankError(TractorHoloError, RuntimeError):
    """Pas de saut net dans les valeurs singulières"""

    def __init__(self, message: str, singular_values: Sequence[float] = ()):
        super().__init__(message)
        self.singular_values = [float(s) for s in singular_values]


class LogFailureError(TractorHoloError, ArithmeticError):
    """Logarithme principal indisponible (spectre sur le demi-axe réel négatif)"""


class StepUnderflowError(TractorHoloError, RuntimeError):
    """Le raffinement du pas d'intégration dépasse la limite autorisée"""


class ConfigError(TractorHoloError, ValueError):
    """Configuration invalide (fichier, variable d'environnement ou option CLI)"""
