"""
Rates Module
Log-log slope fitting and bounded-ratio checks for convergence records
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import linregress

import config
from errors import DomainError

logger = logging.getLogger(__name__)

FIT_FITTED = "fitted"
FIT_FLAGGED = "flagged"
FIT_DEGENERATE = "degenerate"


@dataclass
class ConvergenceRecord:
    """(x, value) pairs of one measured quantity with its fitted power law"""

    quantity: str
    pairs: List[Tuple[float, float]]
    variable: str = "eps"
    slope: Optional[float] = None
    r2: Optional[float] = None
    constant: Optional[float] = None
    expected_slope: Optional[float] = None
    status: str = FIT_DEGENERATE
    local_rates: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "variable": self.variable,
            "pairs": [[float(x), float(v)] for x, v in self.pairs],
            "slope": self.slope,
            "r2": self.r2,
            "constant": self.constant,
            "expected_slope": self.expected_slope,
            "status": self.status,
            "local_rates": list(self.local_rates),
        }


def _validated(pairs: Sequence[Tuple[float, float]]) -> Tuple[np.ndarray, np.ndarray]:
    if len(pairs) < 3:
        raise DomainError(f"a rate fit needs at least 3 pairs, got {len(pairs)}")
    x = np.array([pair[0] for pair in pairs], dtype=float)
    values = np.array([pair[1] for pair in pairs], dtype=float)
    if np.any(x <= 0):
        raise DomainError("abscissae must be positive")
    if np.any(values <= 0):
        raise DomainError("rate fits need positive values")
    return x, values


def fit_rate(pairs: Sequence[Tuple[float, float]]) -> Tuple[float, float, float]:
    """
    Least-squares fit of log value against log x

    Args:
        pairs: (x, value) pairs, at least 3, values positive

    Returns:
        Tuple of (slope, R^2, C) with C = max value / x^slope
    """
    x, values = _validated(pairs)
    log_x, log_v = np.log(x), np.log(values)
    if np.ptp(log_v) == 0.0:
        slope, r2 = 0.0, 1.0
    else:
        fit = linregress(log_x, log_v)
        slope, r2 = float(fit.slope), float(fit.rvalue ** 2)
    constant = float(np.max(values / x ** slope))
    return slope, r2, constant


def local_rates(pairs: Sequence[Tuple[float, float]]) -> List[float]:
    """Rates between consecutive pairs, log(v_i / v_{i-1}) / log(x_i / x_{i-1})"""
    table = pd.DataFrame(pairs, columns=["x", "value"]).sort_values("x", ascending=False)
    log_table = np.log(table.clip(lower=np.finfo(float).tiny))
    rates = log_table["value"].diff() / log_table["x"].diff()
    return [float(rate) for rate in rates.iloc[1:]]


def build_record(quantity: str, pairs: Sequence[Tuple[float, float]], variable: str = "eps",
                 expected_slope: Optional[float] = None, noise_floor: Optional[float] = None,
                 r2_flag: Optional[float] = None) -> ConvergenceRecord:
    """
    Fit a record unless its values sit at the noise floor

    Args:
        quantity: Column name of the measured quantity
        pairs: (x, value) pairs
        variable: Name of the abscissa
        expected_slope: Exponent used for the constant estimate
        noise_floor: Values at or below 10x this are not fitted
        r2_flag: Fits below this R^2 are flagged

    Returns:
        ConvergenceRecord
    """
    noise_floor = config.STUDY_DEFAULTS["noise_floor"] if noise_floor is None else noise_floor
    r2_flag = config.STUDY_DEFAULTS["r2_flag"] if r2_flag is None else r2_flag
    pairs = sorted(((float(x), float(v)) for x, v in pairs), reverse=True)
    record = ConvergenceRecord(quantity=quantity, pairs=pairs, variable=variable, expected_slope=expected_slope)
    if len(pairs) < 3 or any(value <= 10.0 * noise_floor for _, value in pairs):
        logger.info(f"{quantity}: values at the noise floor, no slope fitted")
        return record

    slope, r2, constant = fit_rate(pairs)
    record.slope, record.r2 = slope, r2
    if expected_slope is not None:
        x, values = _validated(pairs)
        constant = float(np.max(values / x ** expected_slope))
    record.constant = constant
    record.local_rates = local_rates(pairs)
    record.status = FIT_FITTED if r2 >= r2_flag else FIT_FLAGGED
    if record.status == FIT_FLAGGED:
        logger.warning(f"{quantity}: fit flagged (R^2={r2:.3f} < {r2_flag})")
    else:
        logger.info(f"{quantity}: slope {slope:.3f} (R^2={r2:.4f}) against {variable}")
    return record


def bounded_ratio_check(pairs: Sequence[Tuple[float, float]], exponent: float,
                        variation: float) -> Tuple[bool, List[float]]:
    """
    Consistency with value <= C x^exponent

    The ratios value / x^exponent may not exceed (1 + variation) times the
    ratio at the largest x.

    Returns:
        Tuple of (ok, ratios ordered by decreasing x)
    """
    x, values = _validated(pairs)
    order = np.argsort(-x)
    ratios = values[order] / x[order] ** exponent
    ok = bool(ratios.max() <= (1.0 + variation) * ratios[0])
    if not ok:
        logger.warning(f"Ratios {np.round(ratios, 6).tolist()} grow beyond {1 + variation:.2f}x the first")
    return ok, [float(r) for r in ratios]


@dataclass
class StudyResult:
    """Rows of one study (CSV_COLUMNS keys) with the records fitted from them"""

    study: str
    problem_id: str
    rows: List[dict] = field(default_factory=list)
    records: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def column(self, name: str, variable: str = "eps") -> List[Tuple[float, float]]:
        return [(row[variable], row[name]) for row in self.rows if np.isfinite(row.get(name, np.nan))]

    def to_dict(self) -> dict:
        return {
            "study": self.study,
            "problem_id": self.problem_id,
            "rows": self.rows,
            "records": {name: record.to_dict() for name, record in self.records.items()},
            "extras": self.extras,
        }
