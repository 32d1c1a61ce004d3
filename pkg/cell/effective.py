"""
Effective Data Module
Flux field g~, effective matrix g0, Voigt-Reuss means, special-case detection
and the corrector bounds
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

import config
from core.multiindex import multi_indices_up_to
from core.symbol import Symbol, symbol_ellipticity
from errors import SolverError
from torus.coefficient import CoefficientG
from torus.field import PeriodicField
from torus.operators import apply_bD, apply_bD_adjoint, evaluate, multiindex_norm, norms

logger = logging.getLogger(__name__)

CASE_GENERIC = "generic"
CASE_BAR = "bar_case"
CASE_UNDER = "under_case"


@dataclass(frozen=True, eq=False)
class EffectiveData:
    """Cell-problem solution and the homogenized quantities derived from it"""

    Lambda: PeriodicField
    residual: float
    iterations: List[int] = field(default_factory=list)
    energy_history: List[List[float]] = field(default_factory=list)
    g_tilde: Optional[PeriodicField] = None
    g0: Optional[np.ndarray] = None
    g_bar: Optional[np.ndarray] = None
    g_under: Optional[np.ndarray] = None
    skew: float = 0.0
    case: Optional[str] = None

    @property
    def m(self) -> int:
        return self.Lambda.shape[1]

    @property
    def n(self) -> int:
        return self.Lambda.shape[0]

    def summary(self) -> Dict:
        """Plain-data summary (g0 entries, residuals, case tag)"""
        def matrix(value):
            if value is None:
                return None
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(value)]

        return {
            "g0": matrix(self.g0),
            "g_bar": matrix(self.g_bar),
            "g_under": matrix(self.g_under),
            "residual": float(self.residual),
            "iterations": list(self.iterations),
            "skew": float(self.skew),
            "case": self.case,
            "grid": list(self.Lambda.grid_shape),
        }


def _hermitian_part(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + np.conj(matrix.T))


def effective_matrix(data: EffectiveData, g: CoefficientG, b: Symbol) -> EffectiveData:
    """
    Form g~ = g (b(D) Lambda + 1) at the nodes and its mean g0

    Args:
        data: Solved cell problem
        g: Coefficient
        b: Symbol

    Returns:
        EffectiveData with g_tilde, g0, g_bar, g_under populated
    """
    b_lambda = apply_bD(b, data.Lambda)
    if b_lambda.grid_shape != g.field.grid_shape:
        raise SolverError(f"corrector grid {b_lambda.grid_shape} does not match coefficient grid {g.field.grid_shape}")
    identity = np.eye(b.m)
    g_tilde = g.field.with_values(g.field.values @ (b_lambda.values + identity))
    g0_raw = g_tilde.mean()
    scale = np.linalg.norm(g0_raw, 2)
    skew = float(np.linalg.norm(0.5 * (g0_raw - np.conj(g0_raw.T)), 2) / scale)
    if skew > config.SOLVER_SETTINGS["skew_tol"]:
        raise SolverError(f"effective matrix has relative skew part {skew:.3e}; the cell solve is inconsistent")
    g0 = _hermitian_part(g0_raw)
    if np.linalg.eigvalsh(g0).min() <= 0.0:
        raise SolverError("effective matrix is not positive definite")

    g_bar = _hermitian_part(g.field.mean())
    g_under = _hermitian_part(np.linalg.inv(g.inverse_field().mean()))
    logger.debug(f"g0 diagonal {np.real(np.diag(g0))}, skew {skew:.2e}")
    return replace(data, g_tilde=g_tilde, g0=g0, g_bar=g_bar, g_under=g_under, skew=skew)


def voigt_reuss_gaps(data: EffectiveData):
    """Smallest eigenvalues of (g_bar - g0) and (g0 - g_under)"""
    upper = float(np.linalg.eigvalsh(_hermitian_part(data.g_bar - data.g0)).min())
    lower = float(np.linalg.eigvalsh(_hermitian_part(data.g0 - data.g_under)).min())
    return upper, lower


def voigt_reuss_check(data: EffectiveData, tol: float = 1e-10) -> bool:
    """g_under <= g0 <= g_bar up to tol * |g_bar|"""
    if data.g0 is None:
        raise ValueError("effective matrix not computed")
    upper, lower = voigt_reuss_gaps(data)
    threshold = -tol * np.linalg.norm(data.g_bar, 2)
    passed = upper >= threshold and lower >= threshold
    if not passed:
        logger.warning(f"Voigt-Reuss bracketing violated: gaps {upper:.3e}, {lower:.3e}")
    return passed


def _nyquist_free_norm(u: PeriodicField) -> float:
    coeffs = u.coeffs * u.nyquist_mask[..., None, None]
    return float(np.sqrt(u.lattice.cell_volume * np.sum(np.abs(coeffs) ** 2)))


def detect_special_case(data: EffectiveData, b: Symbol, g: CoefficientG, tol: float = 1e-8) -> str:
    """
    Classify the problem as bar_case, under_case or generic

    bar_case: b(D)* annihilates every column of g (takes precedence); Lambda
    must then vanish and g0 equal the mean of g.
    under_case: g~ is constant on the resolved modes.

    Args:
        data: EffectiveData with g_tilde populated
        b: Symbol
        g: Coefficient
        tol: Relative tolerance

    Returns:
        Case tag
    """
    if data.g_tilde is None:
        raise ValueError("flux field not computed")
    g_scale = max(norms(g.field, 0), np.finfo(float).tiny)
    divergence = max(
        _nyquist_free_norm(apply_bD_adjoint(b, g.field.column(k))) for k in range(b.m)
    ) / g_scale
    if divergence < tol:
        deviation = np.linalg.norm(data.g0 - data.g_bar, 2) / np.linalg.norm(data.g_bar, 2)
        if deviation > np.sqrt(tol):
            raise SolverError(f"bar case detected but g0 differs from the mean of g by {deviation:.3e}")
        corrector = _nyquist_free_norm(data.Lambda)
        if corrector > np.sqrt(tol):
            raise SolverError(f"bar case detected but the corrector has norm {corrector:.3e}")
        logger.info("Special case: b(D)* g = 0, corrector vanishes and g0 = mean of g")
        return CASE_BAR

    constant = PeriodicField.constant(g.lattice, g.field.grid_shape, data.g0)
    fluctuation = _nyquist_free_norm(data.g_tilde - constant) / norms(constant, 0)
    if fluctuation < tol:
        logger.info("Special case: g~ is constant, g0 equals the harmonic-type mean")
        return CASE_UNDER
    logger.debug(f"Generic case: relative g~ fluctuation {fluctuation:.3e}")
    return CASE_GENERIC


def with_case(data: EffectiveData, b: Symbol, g: CoefficientG, tol: float = 1e-8) -> EffectiveData:
    return replace(data, case=detect_special_case(data, b, g, tol))


def multiplier_condition(p: int, d: int, case: str) -> bool:
    """Sufficient condition for the smoothing-free corrector: 2p > d or under_case"""
    return 2 * p > d or case == CASE_UNDER


def lambda_bound_check(data: EffectiveData, g: CoefficientG, b: Symbol) -> Dict[str, float]:
    """
    Compare ||b(D) Lambda|| and ||Lambda||_{H^p} with their a priori bounds

    Returns:
        Dictionary with measured values, bounds and their ratios
    """
    lattice = data.Lambda.lattice
    m = b.m
    alpha0 = b.alpha0
    if alpha0 is None:
        alpha0, _, _ = symbol_ellipticity(b)
    root = np.sqrt(m * g.g_inf * g.ginv_inf)
    l2_bound = np.sqrt(lattice.cell_volume) * root
    l2_measured = norms(apply_bD(b, data.Lambda), 0)

    weight = sum((2.0 * lattice.r0) ** (-2 * (b.p - beta.order)) for beta in multi_indices_up_to(b.d, b.p))
    c_lambda = root * np.sqrt(weight / alpha0)
    hp_bound = np.sqrt(lattice.cell_volume) * c_lambda
    hp_measured = multiindex_norm(data.Lambda, b.p)
    report = {
        "bD_lambda_L2": l2_measured,
        "bD_lambda_bound": float(l2_bound),
        "bD_lambda_ratio": float(l2_measured / l2_bound),
        "lambda_Hp": hp_measured,
        "lambda_Hp_bound": float(hp_bound),
        "lambda_Hp_ratio": float(hp_measured / hp_bound),
        "C_Lambda": float(c_lambda),
    }
    logger.debug(f"Corrector bounds: {report}")
    return report


def flux_at_points(data: EffectiveData, g: CoefficientG, points: np.ndarray) -> np.ndarray:
    """
    b(D) Lambda = g^{-1} g~ - 1 at arbitrary points

    g is taken from its closed form when available, g~ from trigonometric
    interpolation (the constant g0 in the under case).

    Returns:
        Array (npoints, m, m)
    """
    if data.g_tilde is None:
        raise ValueError("flux field not computed")
    g_values = g.evaluate(points)
    if data.case == CASE_UNDER:
        g_tilde_values = np.broadcast_to(data.g0, g_values.shape)
    else:
        g_tilde_values = evaluate(data.g_tilde, points)
    return np.linalg.solve(g_values, g_tilde_values) - np.eye(g.m)
