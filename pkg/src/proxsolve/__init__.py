"""Proximal Newton-type solvers for composite convex problems f = g + h."""

from .composite import (
    CompositeProblem,
    EvalCounters,
    Penalty,
    SmoothOracle,
    composite_gradient_step,
    optimality_measure,
    subgradient_membership_check,
)
from .curvature import (
    DenseBFGS,
    ExactHessian,
    LBFGS,
    ScaledIdentity,
    SecantPair,
    eigen_bounds_probe,
)
from .dataio import ParseError, parse_libsvm, read_trace, write_libsvm, write_trace
from .driver import (
    RateEstimate,
    SolveReport,
    SolverOptions,
    TraceRow,
    dennis_more_ratio,
    rate_estimate,
    run_fista,
    run_sparsa,
    solve,
    unit_step_from,
)
from .linesearch import LineSearchConfig, LineSearchFailure, backtrack, nonmonotone_backtrack
from .penalties import BoxIndicator, L1Penalty, ZeroPenalty, box_project, soft_threshold
from .problems import (
    LogDetSmooth,
    LogisticSmooth,
    QuadraticSmooth,
    SyntheticSpec,
    make_inverse_covariance,
    make_lasso,
    make_logistic,
)
from .subproblem import (
    ForcingState,
    LocalModel,
    SubproblemPolicy,
    SubproblemResult,
    compute_forcing_term,
    direction_quality_check,
    scaled_prox,
    solve_subproblem,
)

__version__ = "0.1.0"
