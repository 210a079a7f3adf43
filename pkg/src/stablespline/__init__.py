"""Discrete-time stable spline (TC) kernel, Wiener processes and maximum entropy.

Modules
-------
grid       ordered sample instants and the exponential time warp
kernels    TC, Wiener and white-noise covariance functions, Gram matrices
processes  seeded samplers, finite differences, the increment matrix
entropy    Gaussian entropies, entropy rates, maximum-entropy checks
sysid      GP impulse-response estimation with the TC prior
verify     the property suite behind ``stablespline verify``
cli        command-line front end
"""

from .grid import TimeGrid, TransformedGrid, exp_transform, make_grid, uniform_grid
from .kernels import GramMatrix, KernelSpec, eval_kernel, gram, min_eigenvalue
from .processes import (
    IncrementMatrix,
    ProcessPaths,
    empirical_covariance,
    finite_difference,
    increment_matrix,
    sample_stable_spline,
    sample_white,
    sample_wiener,
)
from .entropy import (
    ConstrainedCovariance,
    EntropyReport,
    chain_rule_residual,
    entropy_rate_curve,
    gaussian_entropy,
    maxent_gap,
    random_constrained_covariance,
    white_noise_rate,
)
from .sysid import (
    EstimationConfig,
    EstimationResult,
    IODataset,
    SearchGrid,
    convolution_matrix,
    estimate_impulse_response,
    gp_posterior,
    log_marginal_likelihood,
    tune_hyperparameters,
)

__version__ = "0.1.0"
