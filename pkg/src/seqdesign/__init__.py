"""Sequential Bayesian experiment design with particle filters."""

from .entropy import EntropyEstimatorKind, Estimator, normal_entropy, spacing_entropy
from .models import (
    LorentzianModel,
    LorentzianParams,
    MeasurementModel,
    NoiseSpec,
    RamseyModel,
    RamseyParams,
    eval_grid,
    gaussian_log_likelihood,
    lorentzian_cramer_rao,
    lorentzian_eval,
    ramsey_cramer_rao,
    ramsey_eval,
)
from .particle_filter import DegenerateUpdateError, ParticleFilter, PosteriorSummary
from .utility import (
    Algorithm,
    DesignSpace,
    UtilityConfig,
    UtilityResult,
    compute_utilities,
    random_design,
    select_design,
    simulate_outcomes,
    utility_kld,
    utility_maxmin,
    utility_pseudo,
    utility_variance,
)

__version__ = "0.1.0"
