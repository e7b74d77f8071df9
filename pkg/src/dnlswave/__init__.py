"""Heteroclinic standing waves of defocussing lattice Schroedinger equations."""

from .errors import DNLSError, NotConverged
from .lattice import Profile, Setting, energy, gateaux_gradient, residual_sup, shock_profile
from .minimizer import FlowConfig, MinimizeResult, minimize, n_sweep
from .potential import (NormalizedPotential, PotentialSpec, check_hypotheses, get_potential,
                        normalize)

__version__ = "0.1.0"

__all__ = [
    "DNLSError", "NotConverged", "Profile", "Setting", "energy", "gateaux_gradient",
    "residual_sup", "shock_profile", "FlowConfig", "MinimizeResult", "minimize", "n_sweep",
    "NormalizedPotential", "PotentialSpec", "check_hypotheses", "get_potential", "normalize",
]
