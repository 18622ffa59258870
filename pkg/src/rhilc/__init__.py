"""Receding-horizon iterative learning control for continuously operated plants.

The library models repetitive systems whose initial condition is never
reset: each iteration starts where the previous one ended.  It builds
lifted (single-iteration) and super-lifted (multi-iteration) system
models, synthesizes closed-form learning filters that minimize a
multi-iteration performance index, analyzes the resulting iteration-
domain closed loop, and solves for the repeatable optimum the loop
should converge to.
"""

from .config import ExperimentConfig, build_reference, config_from_dict, parse_config
from .errors import (
    ConfigError,
    DivergenceError,
    FixedPointError,
    KktSolveError,
    RhilcError,
    SynthesisError,
)
from .filters import ControllerState, LearningFilters, receding_step, synthesize, update_law
from .iteration_map import (
    ClosedLoopMap,
    StabilityVerdict,
    ZVector,
    build_closed_loop,
    build_closed_loop_sequence,
    check_condition1,
    spectral_radius,
    z_infinity,
)
from .lifting import (
    LiftedModel,
    StateSpaceModel,
    TimeVaryingModel,
    build_lifted_lti,
    build_lifted_ltv,
    simulate_iteration,
    terminal_selector,
)
from .optimum import (
    Condition3Verdict,
    ConvergedOptimum,
    ConvergedProblem,
    SelectorOperators,
    build_problem,
    check_condition3,
    selector_operators,
    solve_kkt,
    verify_repeatability,
)
from .simulator import (
    DisturbanceSpec,
    RunRecord,
    UncertaintySpec,
    draw_disturbance,
    draw_uncertainty,
    run_closed_loop,
    step_plant,
)
from .superlift import (
    SuperLiftedModel,
    SuperOperators,
    build_operators,
    build_super,
    build_super_ltv,
    stacked_identity,
    super_error,
)
from .weights import (
    PerformanceWeights,
    ReferenceSignal,
    WeightConfig,
    assemble_weights,
    block_repeat,
    diag_from_vector,
    evaluate_longform,
    evaluate_superblock,
    linearize_economic,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # models
    "StateSpaceModel", "TimeVaryingModel", "LiftedModel",
    "build_lifted_lti", "build_lifted_ltv", "terminal_selector", "simulate_iteration",
    "SuperLiftedModel", "SuperOperators", "build_super", "build_super_ltv",
    "build_operators", "stacked_identity", "super_error",
    # cost
    "WeightConfig", "PerformanceWeights", "ReferenceSignal",
    "diag_from_vector", "block_repeat", "assemble_weights", "linearize_economic",
    "evaluate_longform", "evaluate_superblock",
    # control
    "LearningFilters", "ControllerState", "synthesize", "update_law", "receding_step",
    # analysis
    "ZVector", "ClosedLoopMap", "StabilityVerdict", "build_closed_loop",
    "build_closed_loop_sequence", "spectral_radius", "check_condition1", "z_infinity",
    # converged optimum
    "SelectorOperators", "ConvergedProblem", "Condition3Verdict", "ConvergedOptimum",
    "selector_operators", "build_problem", "check_condition3", "solve_kkt",
    "verify_repeatability",
    # simulation
    "DisturbanceSpec", "UncertaintySpec", "RunRecord",
    "draw_disturbance", "draw_uncertainty", "step_plant", "run_closed_loop",
    # configuration
    "ExperimentConfig", "parse_config", "config_from_dict", "build_reference",
    # errors
    "RhilcError", "ConfigError", "SynthesisError", "FixedPointError",
    "KktSolveError", "DivergenceError",
]
