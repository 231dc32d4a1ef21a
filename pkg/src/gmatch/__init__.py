"""Graph matching by projected fixed-point iteration (FastPFP) and baselines."""
from gmatch.core import (
    Assignment,
    Graph,
    MatchProblem,
    SoftAssignment,
    SolveReport,
    ValidationError,
    edge_error,
    excess_error,
    gradient,
    make_problem,
    objective,
    total_error,
)
from gmatch.discretize import greedy_discretize
from gmatch.estimator import GraphMatcher
from gmatch.projection import (
    affine_project,
    doubly_stochastic_project,
    nonneg_project,
    partial_ds_project,
)
from gmatch.solvers import (
    SolverConfig,
    fastga,
    fastpfp,
    projected_gradient,
    solve,
    spectral_norm_bound,
)

__version__ = "0.1.0"
