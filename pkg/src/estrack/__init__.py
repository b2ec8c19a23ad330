"""Extremum-seeking tracking of time-varying optima.

Implements two ES laws with monotonically growing gains and frequencies
(asymptotic and exponential convergence), their Lie-bracket averaged
comparison systems, the supporting time-dilation and state transforms,
empirical assumption checkers, and a config-driven experiment runner.
"""

from .averaging import (AveragedSystem, LemmaOneParams, averaged_rhs,
                        lemma1_bound, lemma1_trajectory, lie_bracket,
                        transform_state)
from .controllers import (ConditionReport, ControllerConfig,
                          check_gain_conditions, derive_frequencies, es_rhs,
                          instantaneous_frequencies)
from .cost_models import (AssumptionReport, CostFunction, GridSpec, eval_cost,
                          get_fixture, optimizer_ref, verify_assumptions)
from .errors import (ConfigError, DivergenceError, EstrackError,
                     InsufficientDataError, NumericError,
                     ScheduleOverflowError, StepUnderflowError,
                     UnsupportedConfigError)
from .schedules import (SaturationCaps, ScheduleParams, ScheduleSample,
                        asymptotic_schedule, contract_time, dilate_time,
                        dilation_rate, eval_schedule, exponential_schedule)
from .simulate import (RawTrajectory, StepPolicy, Trajectory,
                       compare_full_vs_averaged, envelope_block_maxima,
                       fit_decay_rate, integrate, run_averaged, run_es)

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport", "AveragedSystem", "ConditionReport", "ConfigError",
    "ControllerConfig", "CostFunction", "DivergenceError", "EstrackError",
    "GridSpec", "InsufficientDataError", "LemmaOneParams", "NumericError",
    "RawTrajectory", "SaturationCaps", "ScheduleOverflowError",
    "ScheduleParams", "ScheduleSample", "StepPolicy", "StepUnderflowError",
    "Trajectory", "UnsupportedConfigError", "asymptotic_schedule",
    "averaged_rhs", "check_gain_conditions", "compare_full_vs_averaged",
    "contract_time", "derive_frequencies", "dilate_time", "dilation_rate",
    "envelope_block_maxima", "es_rhs", "eval_cost", "eval_schedule",
    "exponential_schedule", "fit_decay_rate", "get_fixture",
    "instantaneous_frequencies", "integrate", "lemma1_bound",
    "lemma1_trajectory", "lie_bracket", "optimizer_ref", "run_averaged",
    "run_es", "transform_state", "verify_assumptions",
]
