#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Script de lancement pour Tractor Holo

Usage: python run.py <commande> [options]
Exemple: python run.py holonomy --manifold independence --seed 7
"""

import sys

from loguru import logger


def print_usage():
    """Afficher l'aide d'utilisation"""
    print("=" * 70)
    print("  🎯 TRACTOR HOLO - Holonomie conforme de Fisher-Rao")
    print("=" * 70)
    print("\n📖 Usage:")
    print("  python run.py tensors --manifold {bivariate|independence} [--point x1,...] [--format json|text] [--out PATH]")
    print("  python run.py holonomy --manifold {bivariate|independence} [--seed N] [--loops N]")
    print("  python run.py verify-all [--config PATH]")
    print("\n📝 Exemples:")
    print("  python run.py tensors --manifold bivariate --format text")
    print("  python run.py holonomy --manifold independence --seed 7 --out reports/holonomy_I.json")
    print("  TRACTOR_HOLO_SEED=11 python run.py verify-all")
    print("\n🚦 Codes de sortie:")
    print("  0 = toutes les vérifications réussies")
    print("  1 = au moins un enregistrement en échec")
    print("  2 = erreur d'usage ou de configuration")
    print("=" * 70)


def main():
    """Point d'entrée principal"""
    if len(sys.argv) < 2:
        print("❌ Erreur: commande manquante\n")
        print_usage()
        sys.exit(2)

    if sys.argv[1] in ['-h', '--help', 'help']:
        print_usage()
        sys.exit(0)

    try:
        from tractor_holo.main import main as holo_main
    except ImportError as e:
        print(f"\n❌ Erreur d'import: {e}")
        print("\n💡 Vérifiez que les dépendances sont installées (pip install -r requirements.txt)")
        sys.exit(2)

    try:
        sys.exit(holo_main(sys.argv[1:]))
    except KeyboardInterrupt:
        logger.warning("Interruption par l'utilisateur")
        sys.exit(1)


if __name__ == "__main__":
    main()
