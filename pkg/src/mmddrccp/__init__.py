"""Distributionally robust chance-constrained programs over kernel MMD ambiguity sets."""

from .ambiguity import (
    AmbiguityRadius,
    BootstrapConfig,
    bootstrap_radius,
    bootstrap_statistics,
    mmd_sq_biased,
    rate_radius,
)
from .conic import (
    ConicProgram,
    ConicSolution,
    EnumerationCapacityError,
    LinExpr,
    SolveStatus,
    SolverTolerances,
    dump_text,
    parse_text,
    solve_binary_enumerate,
    solve_continuous,
)
from .constraints import (
    AffineInXi,
    BlackBox,
    PiecewiseAffine,
    QuadraticForm,
    SupportPolytope,
    UnsupportedModelError,
    emit_epigraph,
    evaluate,
    evaluate_many,
)
from .kernels import (
    DegenerateSampleError,
    FactorizationError,
    GramMatrix,
    KernelSpec,
    gram,
    kernel_eval,
    median_heuristic,
    psd_factor,
)
from .reformulations import (
    CvarLayout,
    DrccpProblem,
    DrccpSolution,
    GuaranteeParams,
    MipConfig,
    build_cvar_socp,
    build_exact_mip,
    build_tractable_pwa,
    guarantee_bound,
    solve_cvar,
    solve_mip,
    solve_tractable_pwa,
    suggest_big_m,
    support_is_empty,
)
from .risk import (
    EvalReport,
    empirical_cvar,
    empirical_var,
    evaluate_solution,
    sample_gaussian,
    violation_probability,
)
from .samples import SampleSet, as_sample_set, load_samples_csv

__version__ = "0.1.0"

__all__ = [
    "AffineInXi",
    "AmbiguityRadius",
    "BlackBox",
    "BootstrapConfig",
    "ConicProgram",
    "ConicSolution",
    "CvarLayout",
    "DegenerateSampleError",
    "DrccpProblem",
    "DrccpSolution",
    "EnumerationCapacityError",
    "EvalReport",
    "FactorizationError",
    "GramMatrix",
    "GuaranteeParams",
    "KernelSpec",
    "LinExpr",
    "MipConfig",
    "PiecewiseAffine",
    "QuadraticForm",
    "SampleSet",
    "SolveStatus",
    "SolverTolerances",
    "SupportPolytope",
    "UnsupportedModelError",
    "as_sample_set",
    "bootstrap_radius",
    "bootstrap_statistics",
    "build_cvar_socp",
    "build_exact_mip",
    "build_tractable_pwa",
    "dump_text",
    "emit_epigraph",
    "empirical_cvar",
    "empirical_var",
    "evaluate",
    "evaluate_many",
    "evaluate_solution",
    "gram",
    "guarantee_bound",
    "kernel_eval",
    "load_samples_csv",
    "median_heuristic",
    "mmd_sq_biased",
    "parse_text",
    "psd_factor",
    "rate_radius",
    "sample_gaussian",
    "solve_binary_enumerate",
    "solve_continuous",
    "solve_cvar",
    "solve_mip",
    "solve_tractable_pwa",
    "suggest_big_m",
    "support_is_empty",
    "violation_probability",
]
