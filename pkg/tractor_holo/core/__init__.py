#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Calcul géométrique : variétés gaussiennes, courbure, tracteurs, holonomie
"""

from .errors import TractorHoloError
from .gaussian import BIVARIATE, INDEPENDENCE, UNIVARIATE, get_manifold
from .holonomy import analyse_holonomy, cone_holonomy_crosscheck
from .verification import cmd_holonomy, cmd_tensors, cmd_verify_all

__all__ = [
    'TractorHoloError',
    'BIVARIATE',
    'INDEPENDENCE',
    'UNIVARIATE',
    'get_manifold',
    'analyse_holonomy',
    'cone_holonomy_crosscheck',
    'cmd_tensors',
    'cmd_holonomy',
    'cmd_verify_all',
]
