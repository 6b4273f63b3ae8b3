"""Steady-state distance statistics and cascading-collision risk for
noise-driven, time-delayed vehicle platoons over communication graphs."""

from .covariance import (
    DistanceLaw,
    complete_graph_sigma_c,
    distance_covariance,
    special_graph_covariance,
    zero_delay_covariance,
)
from .errors import (
    DegenerateLawError,
    DisconnectedGraphError,
    GraphConstructionError,
    InsufficientDataError,
    NumericError,
    ParameterError,
    PlatoonRiskError,
    UnstablePlatoonError,
)
from .gaussian import gaussian_avar, gaussian_var, iota, kappa
from .graphs import (
    CommGraph,
    Laplacian,
    add_edge,
    build_standard,
    complete_graph,
    custom_graph,
    mutate_edge,
    path_graph,
    pcycle_graph,
    remove_edge,
)
from .kernel import KernelValue, f_kernel, zero_delay_mode_integral
from .limits import (
    CovarianceLimits,
    FBounds,
    best_achievable_single,
    complete_graph_limit,
    covariance_limits,
    f_bounds,
    feasibility_screen,
)
from .params import PlatoonParams
from .risk import (
    ConditionalGaussian,
    Observation,
    ObservationSet,
    RiskProfile,
    RiskValue,
    complete_graph_risk,
    conditional_multi,
    conditional_single,
    levelset_risk,
    risk_multi,
    risk_profile,
    risk_range,
    risk_single,
    unconditional_risk,
)
from .simulator import EmpiricalLaw, SimConfig, empirical_conditional, simulate
from .spectral import Spectrum, closed_form_spectrum, graph_spectrum, spectral_decomposition
from .stability import (
    StabilityVerdict,
    in_stability_set,
    platoon_stable,
    sbar_contains,
    sbar_s1_max,
)

__version__ = "0.1.0"
