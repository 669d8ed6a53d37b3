"""Multitype PCR branching processes: exact simulation of the
density-dependent chain and its branching majorant, certified evaluation of
the associated limit functions, and Monte Carlo verification harnesses."""

__version__ = "0.1.0"

from .errors import (
    BadProbability,
    BadTolerance,
    ConfigError,
    CouplingViolation,
    DimensionMismatch,
    EmptyInput,
    EmptyPopulation,
    IoError,
    MpcrError,
    NegativeInput,
    NumericalError,
    OrderingViolation,
    OverflowRisk,
    SolverFailure,
    UnknownFigure,
)
from .harness import (
    ErrorSummary,
    ExperimentRecord,
    convergence_sweep,
    default_figure_params,
    figure_data,
    run_theorem1,
    run_theorem2,
    summarize,
)
from .maps import (
    F_apply,
    F_inverse,
    F_iterate,
    F_iterate_dominant,
    G_eval,
    H_eval,
    LimitEval,
    PsiRoot,
    TheoremLimits,
    f_apply,
    f_inverse,
    scaling_limit_residuals,
    solve_psi_root,
    theorem_limits,
)
from .params import ModelParams, PopulationState, validate
from .sim import (
    RngStream,
    SimMode,
    Trajectory,
    coupled_step,
    mpcr_step,
    sample_binomial,
    sample_W,
    sample_W_batch,
    simulate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
