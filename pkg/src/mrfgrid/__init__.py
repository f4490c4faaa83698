"""Amortized Bayesian inference for lattice Markov random fields.

Posterior sampling for Potts and autologistic couplings whose likelihood
normalizers are intractable: forward simulation is moved out of the MCMC
loop into a precomputed, gradient-informed grid of expected sufficient
statistics, interpolated (piecewise-linear or Hermite) inside the
Metropolis-Hastings acceptance ratio.
"""

from .diagnostics import (
    KlEstimate,
    RmseReport,
    Summary,
    interpolation_rmse,
    kl_divergence,
    kl_samples_vs_density,
    summarize,
)
from .errors import (
    EnumerationTooLargeError,
    GridMismatchError,
    InfeasibleError,
    MrfGridError,
    UnsupportedModelError,
)
from .exact import (
    DensityTable,
    exact_expected_stat,
    exact_log_normalizer,
    exact_normalizer,
    exact_posterior_density,
)
from .mcmc import (
    Chain,
    ChainRecord,
    NormalInverseGamma,
    ProposalSpec,
    RunConfig,
    chain_from_csv,
    find_beta_crit,
    run_aea,
    run_hidden_potts,
    run_surrogate,
)
from .models import (
    AUTOLOGISTIC,
    POTTS,
    LabelField,
    Lattice,
    ModelSpec,
    StatVector,
    autologistic_model,
    build_lattice,
    load_label_field,
    load_matrix,
    potts_model,
    random_field,
    save_label_field,
    save_matrix,
    sufficient_stat,
)
from .samplers import (
    MomentEstimate,
    RngStream,
    add_gaussian_noise,
    estimate_moments,
    gibbs_sweep,
    simulate_field,
    stream_rng,
    swendsen_wang_step,
)
from .surrogate import (
    GridKnot,
    SurrogateGrid,
    analytic_beta_crit,
    build_equidistant_grid,
    build_gradient_grid,
    build_gradient_grid_for_target,
    estimate_directions,
    exact_estimator,
    interpolate,
    load_grid,
    log_normalizer_ratio,
    mc_estimator,
    step_scale,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
