"""Central limit theorems for integrals of stationary random fields.

Analytic side: Dirichlet kernels and norm constants of convex windows
(:mod:`fieldclt.domains`), spectral densities and weights
(:mod:`fieldclt.spectra`), variance and cumulant integrals
(:mod:`fieldclt.cumulants`) and exact Brascamp-Lieb feasibility
(:mod:`fieldclt.hybl`).  Empirical side: seeded Gaussian field simulation
(:mod:`fieldclt.simulate`) and ladder experiments (:mod:`fieldclt.asymptotics`).
"""

__version__ = "0.1.0"

from .asymptotics import (
    berry_esseen_bound,
    kolmogorov_distance,
    rate_fit,
    run_clt_experiment,
    tightness_check,
    weighted_scaling_check,
)
from .cumulants import (
    CumulantEstimator,
    CumulantReport,
    cumulant_bound,
    h2_chaos_variance,
    k_statistic,
    kernel_property_highorder,
    theoretical_h2_variance,
    theoretical_variance,
)
from .domains import (
    ConvexBody,
    dirichlet_kernel,
    fejer_mass,
    kernel_norm,
    p_star,
    scaled_kernel_norm,
    volume,
)
from .exceptions import AssumptionViolation, ConfigError, EmbeddingError, FieldCLTError, NumericalError
from .hybl import (
    FeasibilityVerdict,
    HyblInstance,
    admissible_pk,
    check_c1,
    check_c2,
    check_paper_family,
    decay_exponent,
)
from .simulate import (
    AdditiveFunctional,
    FieldGrid,
    GaussianFieldSimulator,
    HermiteTransformer,
    SimConfig,
    generate_field,
    hermite_transform,
    integrate_functional,
    replicate_functionals,
)
from .spectra import (
    SpectralDensity,
    WeightFunction,
    covariance,
    evaluate_density,
    h2_output_density,
    l2_norm_squared,
    lp_membership,
    weight_fourier,
    weight_l2,
)

__all__ = [
    "__version__",
    "AdditiveFunctional", "AssumptionViolation", "ConfigError", "ConvexBody", "CumulantEstimator",
    "CumulantReport", "EmbeddingError", "FeasibilityVerdict", "FieldCLTError", "FieldGrid",
    "GaussianFieldSimulator", "HermiteTransformer", "HyblInstance", "NumericalError", "SimConfig",
    "SpectralDensity", "WeightFunction", "admissible_pk", "berry_esseen_bound", "check_c1", "check_c2",
    "check_paper_family", "covariance", "cumulant_bound", "decay_exponent", "dirichlet_kernel",
    "evaluate_density", "fejer_mass", "generate_field", "h2_chaos_variance", "h2_output_density",
    "hermite_transform", "integrate_functional", "k_statistic", "kernel_norm", "kernel_property_highorder",
    "kolmogorov_distance", "l2_norm_squared", "lp_membership", "p_star", "rate_fit", "replicate_functionals",
    "run_clt_experiment", "scaled_kernel_norm", "theoretical_h2_variance", "theoretical_variance",
    "tightness_check", "volume", "weight_fourier", "weight_l2", "weighted_scaling_check",
]
