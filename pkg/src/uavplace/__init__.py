"""uavplace: outage-probability evaluation, bounds, and UAV placement optimization.

A library and CLI for placing UAV base stations over a ground-terminal
density so that the probability of a terminal's uplink being in outage at
every UAV simultaneously is minimized. Includes analytic outage formulas
and bounds, Rayleigh and angle-dependent Rician channel models, numerical
integration of the outage objective and its gradients, a centralized
particle-swarm optimizer, and a distributed range-limited gradient descent.
"""

from .analysis import (
    BoundReport,
    MonteCarloBound,
    asymptotic_optimum,
    closed_form_gaussian,
    closed_form_uniform_square,
    fit_exponential_decay,
    lower_bound_altitude,
    lower_bound_ground_uniform,
    marcum_upper_bound,
    upper_bound_random,
    upper_bound_random_exact,
)
from .channel import (
    RayleighParams,
    RicianParams,
    elevation_laws,
    lambda_from_link,
    rayleigh_success,
    rician_success,
    simulate_outage_mc,
    success_probability,
)
from .density import (
    DensityModel,
    GaussianDensity,
    GridDensity,
    MixtureDensity,
    Uniform1D,
    UniformBox2D,
    density_from_dict,
    load_grid_csv,
)
from .errors import (
    AscentError,
    OptimizerAbort,
    QuadratureError,
    SpecValidationError,
    UavPlaceError,
)
from .objective import Deployment, gradient, local_gradient, outage, outage_batch, outage_estimate
from .optimizers import GdConfig, PsoConfig, RunRecord, gd_distributed, pso_optimize, random_deployment
from .quadrature import QuadratureSpec, density_mass, get_nodeset
from .special import bessel_i0, bessel_i0e, marcum_q1

__version__ = "0.1.0"
