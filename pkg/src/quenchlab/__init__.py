"""Desk-scale numerics for random-field Ising and Potts models.

Exact finite-volume Gibbs measures, quenched-field flip/rotation maps,
free-energy differences, contour enumeration, zero-temperature ground
states via min-cut, heat-bath sampling, and Monte-Carlo audits of the
concentration and contour-counting bounds that control long-range order.
"""

from .errors import BudgetError
from .lattice import LatticeBox, SiteSet
from .model import ISING, POTTS, ModelParams, SpinConfig
from .disorder import DisorderField, sample_field

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "LatticeBox",
    "SiteSet",
    "ISING",
    "POTTS",
    "ModelParams",
    "SpinConfig",
    "DisorderField",
    "sample_field",
    "__version__",
]
