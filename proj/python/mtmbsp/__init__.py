"""Sparse Bayesian multivariate regression for mixed continuous/discrete responses."""

from ._mtmbsp import (
    IoError,
    NumericalError,
    ParameterError,
    ValidationError,
    __version__,
    one_step_fit,
    pg_mean,
    pg_var,
    run_chain,
    sample_crt,
    sample_gig,
    sample_inverse_wishart,
    sample_polya_gamma,
    simulate_replicates,
    two_step_fit,
)

__all__ = [
    "IoError",
    "NumericalError",
    "ParameterError",
    "ValidationError",
    "__version__",
    "one_step_fit",
    "pg_mean",
    "pg_var",
    "run_chain",
    "sample_crt",
    "sample_gig",
    "sample_inverse_wishart",
    "sample_polya_gamma",
    "simulate_replicates",
    "two_step_fit",
]
