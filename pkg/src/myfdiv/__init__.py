"""Tight conjugates, exact values and Moreau-Yosida approximations of
f-divergences on finite spaces, with Wasserstein-1 transport and variational
divergence estimation."""

from .conjugate import (
    CsiszarReport,
    GammaSolution,
    SolverConfig,
    check_csiszar_potential,
    conjugate_gradient,
    conjugate_value,
    conjugate_value_and_gradient,
    solve_gamma,
)
from .errors import InputError, SolverError
from .estimator import (
    AscentConfig,
    EstimateResult,
    GaussianParams,
    GaussianReport,
    estimate_divergence,
    gaussian_experiment,
    gaussian_potential_closed_form,
    gaussian_ratio,
)
from .generators import (
    GENERATOR_NAMES,
    LEGENDRE_NAMES,
    GeneratorSpec,
    get_spec,
    lambert_w,
    lambert_w_grad,
)
from .measures import (
    DiscreteMeasure,
    FiniteMetricSpace,
    exact_divergence,
    lebesgue_decompose,
    load_measure,
    measure_to_dict,
)
from .moreau_yosida import (
    MYConfig,
    MYParams,
    MYResult,
    StructureReport,
    check_optimality_structure,
    my_dual,
    my_primal,
    pasch_hausdorff,
    penalty,
)
from .transport import (
    TransportPlan,
    kantorovich_dual,
    lipschitz_norm,
    w1_distance,
    w1_primal,
)

__version__ = "0.1.0"

__all__ = [
    "AscentConfig",
    "CsiszarReport",
    "DiscreteMeasure",
    "EstimateResult",
    "FiniteMetricSpace",
    "GENERATOR_NAMES",
    "GammaSolution",
    "GaussianParams",
    "GaussianReport",
    "GeneratorSpec",
    "InputError",
    "LEGENDRE_NAMES",
    "MYConfig",
    "MYParams",
    "MYResult",
    "SolverConfig",
    "SolverError",
    "StructureReport",
    "TransportPlan",
    "check_csiszar_potential",
    "check_optimality_structure",
    "conjugate_gradient",
    "conjugate_value",
    "conjugate_value_and_gradient",
    "estimate_divergence",
    "exact_divergence",
    "gaussian_experiment",
    "gaussian_potential_closed_form",
    "gaussian_ratio",
    "get_spec",
    "kantorovich_dual",
    "lambert_w",
    "lambert_w_grad",
    "lebesgue_decompose",
    "lipschitz_norm",
    "load_measure",
    "measure_to_dict",
    "my_dual",
    "my_primal",
    "pasch_hausdorff",
    "penalty",
    "solve_gamma",
    "w1_distance",
    "w1_primal",
]
