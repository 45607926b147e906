#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Fixtures partagées : points de base, générateur aléatoire, configurations réduites
"""

import numpy as np
import pytest

from tractor_holo.core.gaussian import BIVARIATE, INDEPENDENCE, UNIVARIATE, DomainBox
from tractor_holo.core.geometry import Point
from tractor_holo.utils.config import RunConfig


@pytest.fixture
def g_base():
    return Point.source(BIVARIATE.id, (0.0, 0.0, 1.0, 1.0, 0.0))


@pytest.fixture
def i_base():
    return Point.source(INDEPENDENCE.id, (0.0, 0.0, 1.0, 1.0))


@pytest.fixture
def g_point():
    """Point générique de G (moyennes et covariance non nulles)"""
    return Point.source(BIVARIATE.id, (0.4, -0.7, 1.3, 0.9, 0.35))


@pytest.fixture
def i_point():
    return Point.source(INDEPENDENCE.id, (0.3, -0.2, 1.4, 0.7))


@pytest.fixture
def u_point():
    return Point.source(UNIVARIATE.id, (0.0, 2.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def box():
    return DomainBox()


@pytest.fixture
def small_config():
    """Configuration réduite pour les estimations d'holonomie en test"""
    return RunConfig(
        loops=2,
        curvature_points=2,
        n_random=3,
        mc_points=1,
        mc_samples=20000,
        gh_order=8,
        parallel_paths=6,
        stability_check=False,
        basepoint_check=False,
    )


@pytest.fixture
def config_file(tmp_path):
    """Fichier KEY=value réduit pour les tests de ligne de commande"""
    path = tmp_path / "run.env"
    path.write_text(
        "LOOPS=2\n"
        "CURVATURE_POINTS=1\n"
        "N_RANDOM=2\n"
        "MC_POINTS=1\n"
        "MC_SAMPLES=10000\n"
        "GH_ORDER=8\n"
        "PARALLEL_PATHS=4\n"
        "STABILITY_CHECK=false\n"
        "BASEPOINT_CHECK=false\n",
        encoding="utf-8",
    )
    return path
