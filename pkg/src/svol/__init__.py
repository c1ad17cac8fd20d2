"""Bayesian MCMC estimation of the vanilla stochastic volatility model.

Centered, noncentered, and interweaved samplers with a banded-precision
latent-path draw, plus efficiency diagnostics, a simulation benchmark
harness, and a command-line front end.
"""

from .banded import (
    BandCholesky,
    NotPositiveDefiniteError,
    SymTridiag,
    awol_draw,
    cholesky,
    solve_lower,
    solve_upper,
)
from .bench import GridResult, GridSpec, export_grid, run_grid
from .diagnostics import (
    DiagnosticError,
    EfficiencySummary,
    GewekeResult,
    PosteriorSummary,
    efficiency_summary,
    geweke_test,
    inefficiency_factor,
    summarize,
)
from .estimator import SVolEstimator
from .mixture import MixtureState, MixtureTable, default_table, sample_indicators
from .model import (
    Dataset,
    LatentPath,
    Parameterization,
    Parameters,
    Priors,
    linearize,
    log_prior,
    simulate,
    transform_path,
)
from .samplers import (
    SCHEMES,
    ChainError,
    ChainOutput,
    ChainState,
    SamplerConfig,
    run_chain,
)

__version__ = "0.1.0"

__all__ = [
    "BandCholesky", "NotPositiveDefiniteError", "SymTridiag", "awol_draw",
    "cholesky", "solve_lower", "solve_upper",
    "DiagnosticError", "EfficiencySummary", "GewekeResult",
    "PosteriorSummary", "efficiency_summary", "geweke_test",
    "inefficiency_factor", "summarize",
    "SVolEstimator",
    "MixtureState", "MixtureTable", "default_table", "sample_indicators",
    "Dataset", "LatentPath", "Parameterization", "Parameters", "Priors",
    "linearize", "log_prior", "simulate", "transform_path",
    "SCHEMES", "ChainError", "ChainOutput", "ChainState", "SamplerConfig",
    "run_chain",
    "GridResult", "GridSpec", "export_grid", "run_grid",
    "__version__",
]
