"""
Torus-surrogate resolvent solves, correctors and whole-space error studies
"""
from .resolvent import ResolventSolution, dense_oscillatory_solve, solve_effective, solve_oscillatory
from .corrector import corrected_errors, corrector_K, flux_errors
from .studies import resolvent_difference_norm, wholespace_error_study, zeta_scaling_study

__all__ = [
    "ResolventSolution",
    "dense_oscillatory_solve",
    "solve_effective",
    "solve_oscillatory",
    "corrected_errors",
    "corrector_K",
    "flux_errors",
    "resolvent_difference_norm",
    "wholespace_error_study",
    "zeta_scaling_study",
]
