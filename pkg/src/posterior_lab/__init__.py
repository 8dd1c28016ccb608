"""posterior-lab: an exact numerical laboratory for Bayesian posterior
(in)consistency in density estimation.

The package computes, at finite sample sizes and with certified error
enclosures, the posterior of Barron's two-component mixture prior (a smooth
exponential-tilt family plus oscillatory step families), the classical
inconsistency diagnostics built on exact likelihood-ratio levels and bands,
and a one-parameter cosine model used as a consistent counterpart.
"""

from .numerics import (
    LN2,
    LOG_ZERO,
    QuadratureError,
    QuadratureResult,
    RandomStream,
    adaptive_quadrature,
    inv_norm_cdf,
    log_falling_factorial_ratio,
    log_sum_exp,
    uniform_stream,
)
from .intervals import Bracket, LogBracket
from .densities import (
    CosineDensity,
    GaussExpDensity,
    Partition,
    StepDensity,
    UniformDensity,
    cell_index,
    hellinger_gauss_exp,
    hellinger_numeric,
    hellinger_step_uniform,
    kl_gauss_exp,
    sample_gauss_exp,
    sample_step,
)
from .barron import (
    BarronEngine,
    BarronPriorConfig,
    OccupancyStats,
    SufficientStats,
    TruncationPolicy,
    log_step_term,
)
from .diagnostics import (
    BandSpec,
    DiagnosticRecord,
    DiagnosticSettings,
    accumulation_scan,
    band_posterior_mass,
    band_prior_exponent,
    beta_bound_mass,
    evaluate_diagnostics,
    excursion_count,
    gamma_stat,
    sup_loglik_f0,
)
from .cosine import (
    CosineEngine,
    CosinePriorConfig,
    cosine_hellinger_mass,
    cosine_loglik,
    cosine_posterior_mass,
)
from .harness import (
    RunConfig,
    TrajectoryRecord,
    TruthSpec,
    config_hash,
    evaluation_grid,
    ingest_dataset,
    load_trajectory,
    run_replications,
    run_trajectory,
    write_trajectory,
)

__version__ = "0.1.0"
