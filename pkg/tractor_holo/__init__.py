#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tractor Holo - Holonomie conforme des variétés gaussiennes

Géométrie de Fisher-Rao de la variété gaussienne bivariée G et de sa
sous-variété d'indépendance I, fibré tracteur normal et estimation numérique
de l'holonomie conforme.
"""

__version__ = "1.0.0"

from .main import main

__all__ = ['main']
