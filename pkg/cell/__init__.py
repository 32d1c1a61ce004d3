"""
Periodic cell problem, effective matrix and flux potentials
"""
from .effective import (
    CASE_BAR,
    CASE_GENERIC,
    CASE_UNDER,
    EffectiveData,
    detect_special_case,
    effective_matrix,
    flux_at_points,
    lambda_bound_check,
    multiplier_condition,
    voigt_reuss_check,
)
from .solver import homogenize, solve_cell_problem
from .potentials import FluxPotentials, flux_potentials

__all__ = [
    "CASE_BAR",
    "CASE_GENERIC",
    "CASE_UNDER",
    "EffectiveData",
    "detect_special_case",
    "effective_matrix",
    "flux_at_points",
    "lambda_bound_check",
    "multiplier_condition",
    "voigt_reuss_check",
    "homogenize",
    "solve_cell_problem",
    "FluxPotentials",
    "flux_potentials",
]
