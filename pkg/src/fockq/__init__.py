__version__ = "0.1.0"

__all__ = [
    "parse_symbol",
    "heat_transform",
    "mean_oscillation",
    "bmo_seminorm",
    "toeplitz_matrix",
    "hankel_gram",
    "operator_norm",
    "semi_commutator_norm",
    "t_sweep",
    "norm_limit_sweep",
    "run_scenario",
    "SamplingGrid",
    "SweepConfig",
]

from .config import SweepConfig
from .fock_matrix import hankel_gram, toeplitz_matrix
from .grammar import parse_symbol
from .heat import bmo_seminorm, heat_transform, mean_oscillation
from .quadrature import SamplingGrid
from .scenarios import run_scenario
from .spectral import operator_norm, semi_commutator_norm
from .sweep import norm_limit_sweep, t_sweep
