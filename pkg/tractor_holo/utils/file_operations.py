#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Écriture des rapports (JSON déterministe ou texte)
"""

import math
import sys
from decimal import Decimal
from pathlib import Path
from typing import Any, Optional

import simplejson
from loguru import logger

from ..core.report import VerificationReport


def _decimalize(value: Any) -> Any:
    """Flottants → Decimal à 17 chiffres significatifs ; non finis → null"""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return Decimal(format(value, ".17g"))
    if isinstance(value, dict):
        return {k: _decimalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_decimalize(v) for v in value]
    return value


def report_to_json(report: VerificationReport) -> str:
    """JSON stable : ordre des champs fixe, 17 chiffres significatifs, sans horodatage"""
    payload = report.model_dump(mode="python")
    payload["status"] = "pass" if report.passed else "fail"
    return simplejson.dumps(
        _decimalize(payload),
        use_decimal=True,
        ignore_nan=True,
        indent=2,
        ensure_ascii=False,
    ) + "\n"


def _short(value: Any, width: int = 60) -> str:
    text = simplejson.dumps(_decimalize(value), use_decimal=True, ignore_nan=True, ensure_ascii=False)
    return text if len(text) <= width else text[:width - 3] + "..."


def report_to_text(report: VerificationReport) -> str:
    lines = ["=" * 70, f"  Rapport {report.command} : {', '.join(report.manifolds)}", "=" * 70]
    for record in report.records:
        mark = "✓" if record.passed else "✗"
        line = f"{mark} [{record.kind}] {record.name} ({record.anchor}) : {_short(record.computed)}"
        if record.target is not None:
            line += f" | cible {_short(record.target)}"
        if record.tolerance is not None:
            line += f" | tol {record.tolerance:g}"
        lines.append(line)
        if "error" in record.detail:
            lines.append(f"    {record.detail['error']}")
    for section in report.holonomy:
        lines.append("-" * 70)
        lines.append(f"  Holonomie {section.manifold} [{section.connection}]")
        lines.append(f"    dimension {section.dimension}, étiquette {section.label}, saut {section.gap:.3e}")
        for sub in section.invariant_subspaces:
            lines.append(f"    sous-espace invariant dim {sub.dimension} ({sub.norm_type})")
    lines.append("=" * 70)
    env = report.environment
    lines.append(f"  graine {env.seed} | config {env.config_hash[:16]} | version {env.version}")
    lines.append(f"  Statut : {'✓ SUCCÈS' if report.passed else f'✗ ÉCHEC ({len(report.failures)} enregistrements)'}")
    lines.append("=" * 70)
    return "\n".join(lines) + "\n"


def save_report(report: VerificationReport, fmt: str = "json", out: Optional[str] = None) -> str:
    """
    Écrit le rapport sur `out` ou sur la sortie standard

    Returns:
        Le texte écrit
    """
    text = report_to_json(report) if fmt == "json" else report_to_text(report)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"[OK] Rapport sauvegardé : {path}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    return text
