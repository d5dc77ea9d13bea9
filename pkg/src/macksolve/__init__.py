"""Mack-mode solver: asymptotic construction of unstable acoustic modes of
supersonic boundary layers, cross-validated by a complex shooting oracle."""

__version__ = "0.1.0"

from .baseflow import (BaseFlow, check_structure_assumptions, custom_table,
                       solve_blasius, tanh_profile)
from .thermo import (SpectralPoint, ThermoProfile, TurningData,
                     temperature_profile, turning_point)
from .langer import LangerMap, build_langer_map, q1_tilde, supersonic_zone
from .airy import AiryValue, airy_pair, airy_many, theta
from .outer import OuterBasis, outer_basis, solve_outer
from .rayleigh import (CriticalWindow, PhiSolution, critical_window,
                       homogeneous_phi, phi_inverse_square_integral,
                       psi_profile, solve_rayleigh_bvp)
from .dispersion import (DispersionContext, GrowthFit, admissible_set_scan,
                         growth_rate_fit, j_integral, real_dispersion_roots,
                         select_unstable_subsequence)
from .eigensolver import (Mode, find_eigenvalue, reconstruct_fields,
                          residual_check, shoot_pressure)

__all__ = [
    "BaseFlow", "check_structure_assumptions", "custom_table", "solve_blasius",
    "tanh_profile", "SpectralPoint", "ThermoProfile", "TurningData",
    "temperature_profile", "turning_point", "LangerMap", "build_langer_map",
    "q1_tilde", "supersonic_zone", "AiryValue", "airy_pair", "airy_many",
    "theta", "OuterBasis", "outer_basis", "solve_outer", "CriticalWindow",
    "PhiSolution", "critical_window", "homogeneous_phi",
    "phi_inverse_square_integral", "psi_profile", "solve_rayleigh_bvp",
    "DispersionContext", "GrowthFit", "admissible_set_scan", "growth_rate_fit",
    "j_integral", "real_dispersion_roots", "select_unstable_subsequence",
    "Mode", "find_eigenvalue", "reconstruct_fields", "residual_check",
    "shoot_pressure",
]
