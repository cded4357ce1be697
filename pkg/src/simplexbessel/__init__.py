"""Interacting-particle diffusion on the ordered simplex: sampling,
integration, coupling, and boundary/weight diagnostics."""

from .errors import (
    ConfigError,
    DomainError,
    EstimatorError,
    FitError,
    IntegratorError,
    ParameterError,
)
from .model import (
    GapVector,
    ModelParams,
    SimplexPoint,
    TestVectorField,
    coords_from_gaps,
    drift,
    gap_vector,
    hessian_quadratic_form,
    ibp_functional,
    in_closed_simplex,
    log_density,
    potential_V,
)
from .symmetry import (
    ExtensionParams,
    degeneracy_d,
    extended_weight,
    fold_T,
    log_extended_weight,
    reflect_H,
    scaling_exponent_h,
)
from .sampler import (
    RngStream,
    SampleBatch,
    gamma_variates,
    path_stream,
    probe_points,
    sample_invariant,
    sample_uniform_simplex,
)
from .dynamics import (
    CoupledEnsembleResult,
    CoupledPair,
    EnsembleResult,
    IntegratorConfig,
    Trajectory,
    coupled_ensemble,
    fv_variation,
    simulate,
    simulate_coupled,
    simulate_ensemble,
    step,
)
from .diagnostics import (
    A2Result,
    BallQuery,
    A2FamilyResult,
    FvLadder,
    IbpResult,
    MassScalingFit,
    RateFit,
    RegularityReport,
    a2_ball_family,
    a2_interval_analytic,
    a2_product_mc,
    ball_mass_exponent,
    capacity_asymptotic,
    contraction_rate,
    dirichlet_gap_moments,
    fit_decay,
    fv_refinement_ladder,
    ibp_battery,
    ibp_residual,
    k_constant,
    lipschitz_smoothing_check,
    make_report,
    max_valid_radius,
    nu_mass,
    semimartingale_classify,
    wiener_classify,
)

__version__ = "0.1.0"

__all__ = [
    "A2FamilyResult",
    "A2Result",
    "BallQuery",
    "ConfigError",
    "CoupledEnsembleResult",
    "CoupledPair",
    "DomainError",
    "EnsembleResult",
    "EstimatorError",
    "ExtensionParams",
    "FitError",
    "FvLadder",
    "GapVector",
    "IbpResult",
    "IntegratorConfig",
    "IntegratorError",
    "MassScalingFit",
    "ModelParams",
    "ParameterError",
    "RateFit",
    "RegularityReport",
    "RngStream",
    "SampleBatch",
    "SimplexPoint",
    "TestVectorField",
    "Trajectory",
    "a2_interval_analytic",
    "a2_ball_family",
    "a2_product_mc",
    "ball_mass_exponent",
    "capacity_asymptotic",
    "contraction_rate",
    "coords_from_gaps",
    "coupled_ensemble",
    "degeneracy_d",
    "dirichlet_gap_moments",
    "drift",
    "extended_weight",
    "fit_decay",
    "fold_T",
    "fv_refinement_ladder",
    "fv_variation",
    "gamma_variates",
    "gap_vector",
    "hessian_quadratic_form",
    "ibp_functional",
    "ibp_battery",
    "ibp_residual",
    "in_closed_simplex",
    "k_constant",
    "lipschitz_smoothing_check",
    "log_density",
    "log_extended_weight",
    "make_report",
    "max_valid_radius",
    "nu_mass",
    "path_stream",
    "potential_V",
    "probe_points",
    "reflect_H",
    "sample_invariant",
    "sample_uniform_simplex",
    "scaling_exponent_h",
    "semimartingale_classify",
    "simulate",
    "simulate_coupled",
    "simulate_ensemble",
    "step",
    "wiener_classify",
]
