"""Regularization estimators of local time, reference oracles and a Monte Carlo harness."""
from .estimators import (
    Curve,
    Epsilon,
    SchemeId,
    covariation_eps,
    hat_function,
    i1_eps,
    i2_eps,
    i3_eps,
    i4_eps,
    i_sub,
    j_eps,
    j_truncated,
    quadratic_variation_eps,
    r_terms,
    reversal_split,
    scheme_curve,
    weak_pairing,
)
from .exceptions import (
    AcceptanceError,
    AlignmentError,
    ConfigurationError,
    DegenerateFitError,
    LocTimeError,
    SimulationBlowupError,
)
from .harness import (
    AsConvergenceReport,
    ConvergenceReport,
    EpsilonLadder,
    ExperimentSpec,
    Target,
    fit_rate,
    make_process,
    run_as_convergence,
    run_experiment,
    run_reversal_experiment,
)
from .oracle import (
    OracleId,
    calibrate_downcrossing,
    downcrossing_estimate,
    occupation_density,
    tanaka_local_time,
)
from .paths import (
    BROWNIAN,
    DiffusionSpec,
    GridSpec,
    Path,
    SeedSpec,
    gen_brownian,
    gen_diffusion,
    reverse_path,
)
from .transformers import ConvergenceRateRegressor, LocalTimeTransformer, OracleTransformer

__version__ = "0.1.0"

__all__ = [
    "Curve",
    "Epsilon",
    "SchemeId",
    "covariation_eps",
    "hat_function",
    "i1_eps",
    "i2_eps",
    "i3_eps",
    "i4_eps",
    "i_sub",
    "j_eps",
    "j_truncated",
    "quadratic_variation_eps",
    "r_terms",
    "reversal_split",
    "scheme_curve",
    "weak_pairing",
    "AcceptanceError",
    "AlignmentError",
    "ConfigurationError",
    "DegenerateFitError",
    "LocTimeError",
    "SimulationBlowupError",
    "AsConvergenceReport",
    "ConvergenceReport",
    "EpsilonLadder",
    "ExperimentSpec",
    "Target",
    "fit_rate",
    "make_process",
    "run_as_convergence",
    "run_experiment",
    "run_reversal_experiment",
    "OracleId",
    "calibrate_downcrossing",
    "downcrossing_estimate",
    "occupation_density",
    "tanaka_local_time",
    "BROWNIAN",
    "DiffusionSpec",
    "GridSpec",
    "Path",
    "SeedSpec",
    "gen_brownian",
    "gen_diffusion",
    "reverse_path",
    "ConvergenceRateRegressor",
    "LocalTimeTransformer",
    "OracleTransformer",
]
