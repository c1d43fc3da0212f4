"""Enhanced binding in nonrelativistic QED: threshold constants and truncated-model certificates."""

from .field import CutoffProfile, ModelParams
from .potential import RadialPotential, c_w_constant, d_functional, indicator_well, smooth_well
from .schrodinger import bound_state, critical_coupling
from .selfenergy import PhotonGrid, eta_squared, sigma0_truncated, theta_norm2
from .threshold import (
    GammaPolicy,
    alpha_sweep,
    assemble_trial,
    binding_certificate,
    quadratic_form_breakdown,
)

__version__ = "0.1.0"

__all__ = [
    "CutoffProfile",
    "GammaPolicy",
    "ModelParams",
    "PhotonGrid",
    "RadialPotential",
    "alpha_sweep",
    "assemble_trial",
    "binding_certificate",
    "bound_state",
    "c_w_constant",
    "critical_coupling",
    "d_functional",
    "eta_squared",
    "indicator_well",
    "quadratic_form_breakdown",
    "sigma0_truncated",
    "smooth_well",
    "theta_norm2",
]
