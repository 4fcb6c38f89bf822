"""Exact engine: conditional expectations and compatibility checks by enumeration."""

from .compat import (CheckReport, CompatStructure, check_adapted, check_compatibility, check_dual,
                     check_filtrations, check_joint_compatibility, check_martingale_condition,
                     is_function_of, martingale_from_terminal)
from .measures import (Coupling, GYWResult, JointMeasure, Kernel, SamplerTable, canonical_coupling,
                       coupling_disagreement, disintegrate, is_compatible_measure, is_strong,
                       mix_solutions, sampler_from_kernel, theorem_gyw_check)
from .space import (FiniteSpace, Partition, PreconditionError, Rv, StructuralError,
                    VerificationFailure, cond_exp, fmt_number, indicator_set, join, join_all,
                    sigma_of)
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario, run_scenario
from .zeta import ZetaReport, build_zeta_scenario, zeta_counterexample

__all__ = [
    "CheckReport", "CompatStructure", "Coupling", "FiniteSpace", "GYWResult", "JointMeasure",
    "Kernel", "Partition", "PreconditionError", "Rv", "SamplerTable", "Scenario", "ScenarioError", "StructuralError",
    "VerificationFailure", "ZetaReport", "build_zeta_scenario", "canonical_coupling",
    "check_adapted", "check_compatibility", "check_dual", "check_filtrations",
    "check_joint_compatibility", "check_martingale_condition", "cond_exp",
    "coupling_disagreement", "disintegrate", "fmt_number", "indicator_set",
    "is_compatible_measure", "is_function_of", "is_strong", "join", "join_all", "load_scenario", "parse_scenario", "run_scenario",
    "martingale_from_terminal", "mix_solutions", "sampler_from_kernel", "sigma_of",
    "theorem_gyw_check", "zeta_counterexample",
]
