"""Optimal prevalent/incident patient mix for period-prevalent survival studies."""

__version__ = "0.1.0"

from .distributions import ConfigurationError, DistributionSpec
from .design import (CohortFunctions, DegenerateDesignError, StudyDesign,
                     truncation_denominator)
from .objective import (CurveObjective, RISK_FLOOR, VarianceCurve, objective_k,
                        orthogonality_residual, variance_at, variance_curve)
from .optimize import (InfeasibleDesignError, OptimizationResult,
                       UndefinedComparisonError, are, optimize_curve,
                       optimize_fixed_time, optimize_fixed_time_two_group)
from .inference import (EffectSpec, InferenceDecision, InfeasibleComparisonError,
                        cox_criterion, fixed_time_z_power, logrank_criterion,
                        theoretical_power)
from .estimators import (DataValidationError, SubjectRecord, SurvivalCurve,
                         UntestableError, cox_score_test, km_fit,
                         read_records_csv, weighted_logrank, write_records_csv)
from .simulate import (ExperimentReport, PowerEffect, SimulationPlan,
                       generate_cohort, run_experiment)

__all__ = [
    "__version__",
    "ConfigurationError", "DistributionSpec",
    "CohortFunctions", "DegenerateDesignError", "StudyDesign", "truncation_denominator",
    "CurveObjective", "RISK_FLOOR", "VarianceCurve", "objective_k",
    "orthogonality_residual", "variance_at", "variance_curve",
    "InfeasibleDesignError", "OptimizationResult", "UndefinedComparisonError",
    "are", "optimize_curve", "optimize_fixed_time", "optimize_fixed_time_two_group",
    "EffectSpec", "InferenceDecision", "InfeasibleComparisonError",
    "cox_criterion", "fixed_time_z_power", "logrank_criterion", "theoretical_power",
    "DataValidationError", "SubjectRecord", "SurvivalCurve", "UntestableError",
    "cox_score_test", "km_fit", "read_records_csv", "weighted_logrank",
    "write_records_csv",
    "ExperimentReport", "PowerEffect", "SimulationPlan", "generate_cohort",
    "run_experiment",
]
