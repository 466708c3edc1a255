"""Spectra, zero modes and Witten indices of the Dolbeault Laplacian on the
punctured spheres S^4 and S^6, with independent numerical cross-checks."""

__version__ = "0.1.0"

from .config import DEFAULT_TOLERANCES, Tolerances
from .radial_spectra import (
    ModeKey,
    UnsupportedSectorError,
    classify,
    closed_form,
    collocation_eigenvalues,
)
from .susy_index import pairing_ratio, witten_index, zero_modes_pure, zero_modes_twisted
from .index_quadrature import chern2, chern3

__all__ = [
    "__version__",
    "DEFAULT_TOLERANCES",
    "Tolerances",
    "ModeKey",
    "UnsupportedSectorError",
    "classify",
    "closed_form",
    "collocation_eigenvalues",
    "pairing_ratio",
    "witten_index",
    "zero_modes_pure",
    "zero_modes_twisted",
    "chern2",
    "chern3",
]
