"""Numerical core of the strong-coupling polaron and bipolaron toolkit."""
from . import models, radial_pekar, ecg_pt, coherent_bounds, gross, fock_toy

from .constants import (
    ARTIFACT_VERSION,
    LAMBDA0_SQ,
    SQRT2,
    GAUSSIAN_PEKAR_VALUE,
)
from .debug_logger import print_debug, print_debug2, print_debug3
from .exceptions import BipolaronError
__all__ = [
    'ARTIFACT_VERSION',
    'LAMBDA0_SQ',
    'SQRT2',
    'GAUSSIAN_PEKAR_VALUE',
    "models",
    "radial_pekar",
    "ecg_pt",
    "coherent_bounds",
    "gross",
    "fock_toy",
    "print_debug",
    "print_debug2",
    "print_debug3",
    "BipolaronError",
]
