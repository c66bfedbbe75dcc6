"""Leader gradient descent on a simulated cluster.

Workers run stochastic gradient steps; at communication events each
worker is pulled toward the best member of its group and toward the
best worker overall.  Elastic-averaging and asynchronous-accumulation
baselines share the same harness, and a bound-checking suite turns the
convergence guarantees into executable tests.
"""

from .cluster import (
    ClusterConfig,
    ClusterState,
    SyncResult,
    TraceEvent,
    center_variable,
    run,
    run_synchronous,
    run_synchronous_lgd,
    trace_to_csv,
)
from .errors import (
    DimensionMismatch,
    DivergenceError,
    LeadoptError,
    NonFiniteValue,
    SingularMatrix,
    SpecParseError,
)
from .kernels import BACKEND
from .objectives import (
    EasgdCounterexample,
    MatrixCompletion,
    NoiseModel,
    Objective,
    Quadratic,
    Sinc2D,
    easgd_counterexample_f,
    matrix_completion_problem,
    quadratic_with_condition,
    sinc2d,
    stochastic_gradient,
    stochastic_value,
)
from .rng import Rng
from .select import LeaderBoard, select_exact, select_hierarchy, select_stochastic
from .specfile import ExperimentSpec
from .steps import StepParams, lsgd_step, pull_only_step, sgd_step
from .theory import BoundReport, default_checks, run_checks

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundReport",
    "ClusterConfig",
    "ClusterState",
    "DimensionMismatch",
    "DivergenceError",
    "EasgdCounterexample",
    "ExperimentSpec",
    "LeadoptError",
    "LeaderBoard",
    "MatrixCompletion",
    "NoiseModel",
    "NonFiniteValue",
    "Objective",
    "Quadratic",
    "Rng",
    "Sinc2D",
    "SingularMatrix",
    "SpecParseError",
    "StepParams",
    "SyncResult",
    "TraceEvent",
    "center_variable",
    "default_checks",
    "easgd_counterexample_f",
    "lsgd_step",
    "matrix_completion_problem",
    "pull_only_step",
    "quadratic_with_condition",
    "run",
    "run_checks",
    "run_synchronous",
    "run_synchronous_lgd",
    "select_exact",
    "select_hierarchy",
    "select_stochastic",
    "sgd_step",
    "sinc2d",
    "stochastic_gradient",
    "stochastic_value",
    "trace_to_csv",
    "__version__",
]
