"""
Pytest configuration and shared fixtures
"""
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent.parent))

from config import SolverConfig
from special.functions import HyperbolicParams


@pytest.fixture
def rng():
    """Seeded generator; every test starts from the same stream"""
    return np.random.default_rng(20240501)


@pytest.fixture
def hyper():
    """Self-dual modulus b = 1"""
    return HyperbolicParams(1.0)


@pytest.fixture
def solver_cfg():
    return SolverConfig(seed=11)


@pytest.fixture
def out_dir(tmp_path):
    """Scratch directory for report files"""
    path = tmp_path / "out"
    path.mkdir()
    return path
