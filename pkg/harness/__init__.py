"""
Study configuration, rate fitting, property checks and orchestration
"""
from .rates import (
    ConvergenceRecord,
    StudyResult,
    bounded_ratio_check,
    build_record,
    fit_rate,
)

__all__ = [
    "ConvergenceRecord",
    "StudyResult",
    "bounded_ratio_check",
    "build_record",
    "fit_rate",
]
