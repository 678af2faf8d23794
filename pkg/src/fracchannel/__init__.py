"""Spectral channel-flow toolkit driven by fractional Brownian wall noise.

Simulates 2D incompressible flow in a periodic channel whose upper wall is
forced tangentially by fractional Brownian noise, via an N-level splitting
of the velocity around the stochastic boundary response, and ships the
diagnostic probes used to study boundary blow-up and interior smoothing.
"""

__version__ = "0.1.0"

from .errors import AdmissibilityError, NumericalAbort, ValidationError
from .exponents import (
    ExponentLedger,
    NoiseParams,
    build_ledger,
    critical_integrability,
    lebesgue_exponents,
    min_time_exponent,
    splitting_depth,
    stokes_exponents,
)
from .grid import ChannelGrid
from .fields import (
    ScalarField,
    VelocityField,
    field_from_streamfunction,
    grad_norm,
    inner_product,
    l2_norm,
    lp_norm,
    lq_norm_in_x,
    random_solenoidal_field,
    sobolev_norm,
    standing_eddy_field,
)
from .fbm import (
    CylindricalBoundaryNoise,
    FbmGridPath,
    NoiseCoefficients,
    cholesky_fbm,
    critical_noise_coefficients,
    default_noise_coefficients,
    fbm_covariance,
    mode_seed,
    refine_boundary_noise,
    refine_path,
    refine_seed,
    sample_boundary_noise,
    sample_fbm,
    truncate_boundary_noise,
)
from .stokes import apply_stokes, stokes_step
from .forms import bilinear_form, trilinear_b
from .dirichlet import (
    biharmonic_residual,
    boundary_pairing,
    dirichlet_lift,
    lift_norm_ratio,
    lift_profiles,
    very_weak_residual,
)
from .convolution import (
    ConvolutionTrajectory,
    boundary_blowup_profile,
    evolve_convolution,
    holder_estimate,
    norm_trajectory,
    weak_form_residual,
    weak_form_residual_path,
)
from .solver import (
    FieldTrajectory,
    assemble,
    energy_residual,
    picard_remainder,
    solve_cascade_level,
    solve_direct,
    solve_levels,
    solve_remainder,
    telescoping_residual,
)
from .diagnostics import (
    GROWTH_THRESHOLD,
    ThresholdTable,
    hurst_recovery_report,
    interior_decay_probe,
    threshold_experiment,
    vorticity_snapshot,
)
from .config import RunConfig, config_from_mapping, config_hash, load_config
from .cli import main, run

__all__ = [
    "AdmissibilityError",
    "NumericalAbort",
    "ValidationError",
    "ExponentLedger",
    "NoiseParams",
    "build_ledger",
    "critical_integrability",
    "lebesgue_exponents",
    "min_time_exponent",
    "splitting_depth",
    "stokes_exponents",
    "ChannelGrid",
    "ScalarField",
    "VelocityField",
    "field_from_streamfunction",
    "grad_norm",
    "inner_product",
    "l2_norm",
    "lp_norm",
    "lq_norm_in_x",
    "random_solenoidal_field",
    "sobolev_norm",
    "standing_eddy_field",
    "CylindricalBoundaryNoise",
    "FbmGridPath",
    "NoiseCoefficients",
    "cholesky_fbm",
    "critical_noise_coefficients",
    "default_noise_coefficients",
    "fbm_covariance",
    "mode_seed",
    "refine_boundary_noise",
    "refine_path",
    "refine_seed",
    "sample_boundary_noise",
    "sample_fbm",
    "truncate_boundary_noise",
    "apply_stokes",
    "stokes_step",
    "bilinear_form",
    "trilinear_b",
    "biharmonic_residual",
    "boundary_pairing",
    "dirichlet_lift",
    "lift_norm_ratio",
    "lift_profiles",
    "very_weak_residual",
    "ConvolutionTrajectory",
    "boundary_blowup_profile",
    "evolve_convolution",
    "holder_estimate",
    "norm_trajectory",
    "weak_form_residual",
    "weak_form_residual_path",
    "FieldTrajectory",
    "assemble",
    "energy_residual",
    "picard_remainder",
    "solve_cascade_level",
    "solve_direct",
    "solve_levels",
    "solve_remainder",
    "telescoping_residual",
    "GROWTH_THRESHOLD",
    "ThresholdTable",
    "hurst_recovery_report",
    "interior_decay_probe",
    "threshold_experiment",
    "vorticity_snapshot",
    "RunConfig",
    "config_from_mapping",
    "config_hash",
    "load_config",
    "main",
    "run",
    "__version__",
]
