"""Analytical and discrete models of a single NOMA cell's downlink power."""

from .cell import (
    CellParams,
    Coefficients,
    InfeasibleError,
    LinkQoS,
    bs_power_no_sic,
    bs_power_sic,
    bs_power_sic_asymptotic,
    bs_power_sic_gamma_form,
    dbm_to_watts,
    density_from_users_per_cell,
    derive_coefficients,
    per_user_power,
    sinr_for_se,
    spectral_efficiency,
    throughput,
    watts_to_dbm,
)
from .numerics import Tolerance, find_root, integrate, lower_incomplete_gamma, upper_incomplete_gamma
from .oracle import (
    AllocationResult,
    Mode,
    UserSet,
    place_users_rings,
    place_users_uniform,
    solve_no_sic_allocation,
    solve_sic_allocation,
    verify_sinr,
)
from .planner import (
    PlanAnswer,
    PowerCurve,
    PowerMode,
    calibrate_noise,
    max_coverage_radius,
    max_density,
    max_spectral_efficiency,
    sweep_power_vs_se,
)

__version__ = "0.1.0"
