"""Black-box optimization with quadratic kernel surrogates and QUBO annealing.

Build a variable space, hand `optimizer.run` a black box, and each cycle the
toolkit fits an analytic quadratic surrogate to the evaluated samples,
minimizes it with a QUBO solver, and evaluates the most promising new point.
Real variables ride along through domain-wall encoding; outputs with a wide
dynamic range can be compressed by a monotone exponential transform.
"""

from .benchmarks import (
    FlipMask,
    FlippedLandscape,
    make_flipped,
    preset,
    rastrigin,
    rosenbrock,
)
from .encoding import (
    Discretization,
    decode_point,
    decode_real,
    domain_wall_penalty,
    encode_point,
    encode_real,
)
from .optimizer import (
    CycleRecord,
    RunAbortedError,
    RunHistory,
    pick_candidate,
    run,
    sample_initial,
)
from .problem import (
    ConfigError,
    Dataset,
    OptimizerConfig,
    Sample,
    VariableSpace,
    VariableSpec,
    build_space,
    validate_config,
)
from .qubo import QuboModel, add_scaled, evaluate, max_abs_coefficient, to_triplets
from .solver import (
    SolveRequest,
    SolveResult,
    solve_exhaustive,
    solve_remote,
    solve_sa,
)
from .surrogate import (
    KernelConfig,
    SurrogateState,
    acquisition,
    append_sample,
    assemble_mu,
    assemble_sigma,
    fit_initial,
    k_mu,
    k_sigma,
    predict_mu,
    training_correlation,
)
from .transform import TransformState, apply as apply_transform, fit_transform

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CycleRecord",
    "Dataset",
    "Discretization",
    "FlipMask",
    "FlippedLandscape",
    "KernelConfig",
    "OptimizerConfig",
    "QuboModel",
    "RunAbortedError",
    "RunHistory",
    "Sample",
    "SolveRequest",
    "SolveResult",
    "SurrogateState",
    "TransformState",
    "VariableSpace",
    "VariableSpec",
    "acquisition",
    "add_scaled",
    "append_sample",
    "apply_transform",
    "assemble_mu",
    "assemble_sigma",
    "build_space",
    "decode_point",
    "decode_real",
    "domain_wall_penalty",
    "encode_point",
    "encode_real",
    "evaluate",
    "fit_initial",
    "fit_transform",
    "k_mu",
    "k_sigma",
    "make_flipped",
    "max_abs_coefficient",
    "pick_candidate",
    "predict_mu",
    "preset",
    "rastrigin",
    "rosenbrock",
    "run",
    "sample_initial",
    "solve_exhaustive",
    "solve_remote",
    "solve_sa",
    "to_triplets",
    "training_correlation",
    "validate_config",
]
