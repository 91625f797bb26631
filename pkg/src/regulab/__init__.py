"""Spatial birth-and-death dynamics with analytic regulation bounds.

The package simulates interacting point populations on a periodic window and
checks the simulated densities and pair correlations against the closed-form
laws and bounds that regulate them: linear free growth, exponential
relaxation under constant mortality, a logarithmic envelope under
establishment thinning, and a uniform density bound under pairwise
competition obtained from a superstability estimate and a Riccati
comparison.
"""

from .analytics import (
    CompetitionBound,
    FTypeParams,
    SuperstabilityConstant,
    ball_family_f_constant,
    check_superstability,
    density_bound,
    derive_competition_bound,
    establishment_lower_bound,
    f_type_bound,
    free_density,
    global_reg_density,
    riccati_solution,
    second_order_bound,
    superstability_constant,
)
from .errors import (
    ContractViolationError,
    ExplosionError,
    InvalidKernelError,
    KernelTooSpreadError,
    NumericsError,
    OutOfRegimeError,
    RegulabError,
    ScenarioError,
)
from .estimators import (
    DensityEstimate,
    PairCorrelationEstimate,
    estimate_density,
    estimate_pair_correlation,
    shell_volume,
)
from .experiments import (
    AnalyticCurve,
    BoundReport,
    CheckRecord,
    Experiment,
    VerifySpec,
    analytic_curves,
    load_scenario,
    loads_scenario,
    recompute_report,
    serialize_scenario,
    verify_competition,
    verify_establishment,
    verify_experiment,
    verify_free,
    verify_global_regulation,
    write_outputs,
)
from .geometry import (
    CellGrid,
    Configuration,
    TorusWindow,
    pairwise_distances,
    periodic_distance,
    sample_poisson,
)
from .kernels import (
    ExponentialKernel,
    GaussianKernel,
    Kernel,
    TabulatedKernel,
    TopHatKernel,
    kernel_from_dict,
    kernel_from_params,
)
from .models import (
    ModelSpec,
    Regime,
    birth_acceptance,
    birth_proposal_rate,
    death_rate,
    energy,
)
from .simulator import (
    EnsembleResult,
    Event,
    ReplicaSimulation,
    Scenario,
    Trajectory,
    run,
    run_ensemble,
)

__version__ = "0.1.0"
