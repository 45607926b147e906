#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Point d'entrée en ligne de commande

    python -m tractor_holo.main tensors --manifold bivariate
    python -m tractor_holo.main holonomy --manifold independence --seed 7 --loops 8
    python -m tractor_holo.main verify-all --config run.env

Codes de sortie : 0 succès, 1 échec de vérification, 2 erreur d'usage ou de configuration.
"""

import argparse
import sys
from typing import Any, Dict, List, Optional

from loguru import logger

from .core.errors import ConfigError, TractorHoloError
from .core.verification import cmd_holonomy, cmd_tensors, cmd_verify_all
from .utils.config import load_run_config
from .utils.file_operations import save_report

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

MANIFOLD_CHOICES = ("bivariate", "independence")


def configure_logging(verbose: bool = False):
    """Un seul puits stderr au format [LEVEL] message ; stdout reste réservé aux rapports"""
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO", format="[{level}] {message}")


def _add_output_options(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="Fichier KEY=value")
    parser.add_argument("--seed", type=int, help="Graine (prioritaire sur TRACTOR_HOLO_SEED)")
    parser.add_argument("--format", choices=("json", "text"), help="Format du rapport")
    parser.add_argument("--out", help="Chemin du rapport (stdout par défaut)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tractor_holo",
        description="Holonomie conforme des variétés gaussiennes munies de la métrique de Fisher-Rao",
    )
    parser.add_argument("--verbose", action="store_true", help="Journal DEBUG sur stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    tensors = sub.add_parser("tensors", help="Tenseurs de courbure comparés aux formes fermées")
    tensors.add_argument("--manifold", choices=MANIFOLD_CHOICES, required=True)
    tensors.add_argument("--point", help="Point de base x1,x2,... (coordonnées source)")
    _add_output_options(tensors)

    holonomy = sub.add_parser("holonomy", help="Estimation de l'algèbre d'holonomie tracteur")
    holonomy.add_argument("--manifold", choices=MANIFOLD_CHOICES, required=True)
    holonomy.add_argument("--point", help="Point de base x1,x2,... (coordonnées source)")
    holonomy.add_argument("--loops", type=int, help="Nombre de lacets par point")
    _add_output_options(holonomy)

    verify = sub.add_parser("verify-all", help="Suites tenseurs + holonomie + propriétés tracteur")
    _add_output_options(verify)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Options CLI non vides, sous les noms de champs de RunConfig"""
    names = ("manifold", "point", "seed", "loops", "format", "out")
    return {name: getattr(args, name) for name in names if getattr(args, name, None) is not None}


def run(args: argparse.Namespace) -> int:
    """
    Exécute la sous-commande déjà analysée

    Returns:
        Code de sortie
    """
    try:
        config = load_run_config(args.config, _overrides(args))
    except ConfigError as exc:
        logger.error(f"[config] {exc}")
        return EXIT_USAGE

    logger.info(f"[run] {args.command} (graine {config.seed}, config {config.config_hash()[:12]})")
    try:
        if args.command == "tensors":
            report = cmd_tensors(config)
        elif args.command == "holonomy":
            report = cmd_holonomy(config)
        else:
            report, _ = cmd_verify_all(config)
    except TractorHoloError as exc:
        logger.error(f"[run] {type(exc).__name__}: {exc}")
        return EXIT_FAIL

    save_report(report, config.format, config.out)
    if report.passed:
        logger.success(f"[run] ✓ {len(report.records)} enregistrements, tous réussis")
        return EXIT_PASS
    for record in report.failures:
        logger.warning(f"[run] ✗ {record.name}")
    return EXIT_FAIL


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    configure_logging(args.verbose)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
