import math
import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))
os.environ.setdefault("BIPOLARON_DEBUG", "0")

from src.core import radial_pekar
from src.core.ecg_pt import Ansatz, CorrelatedGaussianTerm


@pytest.fixture(scope="session")
def grid():
    return radial_pekar.make_grid(0.02, 20.0)


@pytest.fixture(scope="session")
def fine_grid():
    return radial_pekar.make_grid(0.01, 20.0)


@pytest.fixture(scope="session")
def gaussian_phi(grid):
    """pi^(-3/4) exp(-r^2/2)."""
    return radial_pekar.gaussian_trial(grid)


@pytest.fixture(scope="session")
def pekar_solution():
    return radial_pekar.solve_choquard()


@pytest.fixture
def unit_product_ansatz():
    """One symmetrized term equal to the product of two unit Gaussians."""
    return Ansatz([CorrelatedGaussianTerm(a=0.5)], [1.0]).normalize()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def gaussian_closed_forms():
    return {"T": 0.75, "W": 1.0 / math.sqrt(math.pi), "D": math.sqrt(2.0 / math.pi)}
