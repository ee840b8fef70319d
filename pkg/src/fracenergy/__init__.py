"""Time-fractional diffusion and diffusion-wave equations with energy-estimate checks."""

from __future__ import annotations

from fracenergy.energy_monitor import (
    EstimateReport,
    NormTrace,
    calibrate,
    check_auxiliary,
    check_lemma1,
    check_lemma2,
    check_theorem,
    check_theorem1,
    check_theorem2,
    check_theorem3,
    check_theorem4,
    norms,
)
from fracenergy.errors import FracEnergyError, HypothesisError, NumericalError, ProblemFileError
from fracenergy.fractional_ops import (
    FracOrder,
    TimeSeries,
    UniformGrid,
    caputo_l1,
    caputo_l1_wave,
    gamma_fn,
    rl_integral,
    rl_integral_iterated,
    solve_linear_l1,
)
from fracenergy.mittag_leffler import ml_asymptotic, ml_log, ml_one, ml_series, ml_two
from fracenergy.problem_file import load_problem, parse_problem
from fracenergy.problem_spec import (
    BCKind,
    BoundaryCondition,
    Coefficients,
    EquationKind,
    InitialData,
    ProblemSpec,
    manufactured,
    validate,
)
from fracenergy.solver import SolutionField, solve, solve_diffusion, solve_wave, thomas_solve

__all__ = [
    "BCKind",
    "BoundaryCondition",
    "Coefficients",
    "EquationKind",
    "EstimateReport",
    "FracEnergyError",
    "FracOrder",
    "HypothesisError",
    "InitialData",
    "NormTrace",
    "NumericalError",
    "ProblemFileError",
    "ProblemSpec",
    "SolutionField",
    "TimeSeries",
    "UniformGrid",
    "calibrate",
    "caputo_l1",
    "caputo_l1_wave",
    "check_auxiliary",
    "check_lemma1",
    "check_lemma2",
    "check_theorem",
    "check_theorem1",
    "check_theorem2",
    "check_theorem3",
    "check_theorem4",
    "gamma_fn",
    "load_problem",
    "manufactured",
    "ml_asymptotic",
    "ml_log",
    "ml_one",
    "ml_series",
    "ml_two",
    "norms",
    "parse_problem",
    "rl_integral",
    "rl_integral_iterated",
    "solve",
    "solve_diffusion",
    "solve_linear_l1",
    "solve_wave",
    "thomas_solve",
    "validate",
]
