"""Pseudo-spectral laboratory for anisotropic fractionally dissipated MHD
perturbations near a vertical background magnetic field, on a periodic box.
"""

from .diagnostics import (
    BootstrapReport,
    EnergyLedger,
    accumulate,
    anisotropic_pair_norm,
    anisotropic_sobolev_norm,
    bootstrap_ratio,
    h_s_norm,
    pair_h_norm,
)
from .dissipation import (
    MAGNETIC_DIFFUSION_AXES,
    DissipationSpec,
    magnetic_dissipation_symbol,
    velocity_dissipation_symbol,
)
from .dynamics import (
    BlowUpError,
    MhdState,
    Stepper,
    linear_mode_oracle,
    nonlinear_rhs,
    recover_pressure,
    step_ifrk4,
)
from .experiments import (
    InitSpec,
    RunConfig,
    RunResult,
    SweepResult,
    continuous_dependence,
    inviscid_sweep,
    make_initial_data,
    resume,
    run,
    stability_sweep,
    validate_linear_stepping,
)
from .inequalities import InequalityReport
from .randfields import RandomFieldSpec, generate_field
from .spectral import (
    Grid,
    SpectralScalar,
    VectorField,
    dealias,
    directional_fractional,
    fractional_laplacian,
    inner_product,
    leray_project,
    partial_derivative,
)

__version__ = "0.1.0"
