"""
Whole-Space Studies Module
eps- and zeta-scaling of the torus-surrogate resolvent errors
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np

import config
from cell.effective import EffectiveData
from core.symbol import Symbol
from harness.rates import StudyResult, build_record
from torus.coefficient import CoefficientG
from torus.field import PeriodicField
from torus.operators import eps_to_k, norms, resample_field
from .corrector import corrected_errors, corrector_energy, flux_errors
from .resolvent import solve_effective, solve_oscillatory

logger = logging.getLogger(__name__)


def data_grid(g: CoefficientG, eps: float):
    k = eps_to_k(eps)
    return tuple(k * size for size in g.field.grid_shape)


def unit_rhs(F: PeriodicField, grid) -> PeriodicField:
    """F resampled onto `grid` and normalized in L2"""
    F = resample_field(F, grid)
    size = norms(F, 0)
    if size == 0.0:
        return F
    return F * (1.0 / size)


def _error_map(g, b, data, eps, zeta, F):
    u_eps = solve_oscillatory(g, b, eps, zeta, F, g0=data.g0)
    u0 = solve_effective(data.g0, b, zeta, F)
    return u_eps.u - u0.u


def resolvent_difference_norm(g: CoefficientG, b: Symbol, data: EffectiveData, eps: float, zeta: complex,
                              probe_count: Optional[int] = None, power_iterations: Optional[int] = None,
                              seed: int = 0, band: int = 4) -> float:
    """
    Lower bound for ||(A_eps - zeta)^{-1} - (A0 - zeta)^{-1}||_{L2 -> L2}

    Maximum over seeded unit probes with modes |k_j| <= band, refined by power
    iteration on E* E with E* = E(conj(zeta)).

    Returns:
        Estimated operator norm
    """
    probe_count = probe_count or config.STUDY_DEFAULTS["probe_count"]
    power_iterations = config.STUDY_DEFAULTS["power_iterations"] if power_iterations is None else power_iterations
    grid = data_grid(g, eps)
    lattice = g.lattice
    rng = np.random.default_rng(seed)

    probe_grid = tuple(2 * band + 2 for _ in grid)
    best_value, best_probe = 0.0, None
    for _ in range(probe_count):
        coeffs = np.zeros(probe_grid + (b.n, 1), dtype=complex)
        coeffs[...] = rng.standard_normal(coeffs.shape) + 1j * rng.standard_normal(coeffs.shape)
        probe = unit_rhs(PeriodicField.from_coeffs(lattice, coeffs), grid)
        value = norms(_error_map(g, b, data, eps, zeta, probe), 0)
        if value > best_value:
            best_value, best_probe = value, probe
    if best_probe is None:
        return 0.0

    estimate = best_value
    vector = best_probe
    for _ in range(power_iterations):
        image = _error_map(g, b, data, eps, zeta, vector)
        back = _error_map(g, b, data, eps, np.conj(zeta), image)
        size = norms(back, 0)
        if size == 0.0:
            break
        estimate = max(estimate, float(np.sqrt(size)))
        vector = back * (1.0 / size)
    logger.debug(f"Resolvent difference norm at eps={eps}, zeta={zeta}: {estimate:.4e}")
    return estimate


def measure_at_eps(g: CoefficientG, b: Symbol, data: EffectiveData, zeta: complex, F: PeriodicField,
                   eps: float, problem_id: str = "", operator_norm: bool = False, seed: int = 0) -> Dict:
    """One row of the whole-space study"""
    F_eps = unit_rhs(F, data_grid(g, eps))
    u_eps = solve_oscillatory(g, b, eps, zeta, F_eps, g0=data.g0)
    u0 = solve_effective(data.g0, b, zeta, F_eps)
    errors = corrected_errors(data, b, eps, u_eps, u0)
    e_flux, e_flux_std = flux_errors(data, g, b, eps, u_eps, u0)
    row = {
        "study": "wholespace",
        "problem_id": problem_id,
        "eps": float(eps),
        "zeta_re": float(np.real(zeta)),
        "zeta_im": float(np.imag(zeta)),
        "e_L2": norms(u_eps.u - u0.u, 0),
        "e_Hp": errors["e_Hp"],
        "e_Hp_plain": errors["e_Hp_plain"],
        "e_Hp_std": errors["e_Hp_std"],
        "e_flux": e_flux,
        "e_flux_std": e_flux_std,
        "e_L2_opnorm": np.nan,
        "corrector_Hp": corrector_energy(data, b, eps, u0),
    }
    if operator_norm:
        row["e_L2_opnorm"] = resolvent_difference_norm(g, b, data, eps, zeta, seed=seed)
    logger.info(f"eps={eps:.5g}: e_L2={row['e_L2']:.3e}, e_Hp={row['e_Hp']:.3e}, e_flux={row['e_flux']:.3e}")
    return row


def wholespace_error_study(g: CoefficientG, b: Symbol, data: EffectiveData, zeta: complex, F: PeriodicField,
                           eps_list: Sequence[float], problem_id: str = "", threads: int = 1,
                           operator_norm: bool = False, seed: int = 0) -> StudyResult:
    """
    Oscillatory versus effective resolvent errors across eps = 1/k

    Args:
        g: Cell coefficient
        b: Symbol
        data: Homogenized data of (g, b)
        zeta: Shift
        F: Right-hand side on any grid (resampled and normalized per eps)
        eps_list: Reciprocals of integers
        threads: Worker threads over eps
        operator_norm: Also estimate the L2 operator norm of the resolvent difference

    Returns:
        StudyResult with rows per eps and records for e_L2, e_Hp, e_flux
    """
    logger.info(f"Whole-space study {problem_id}: zeta={zeta}, eps={list(eps_list)}")

    def measure(eps):
        return measure_at_eps(g, b, data, zeta, F, eps, problem_id, operator_norm, seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(measure, eps_list))
    else:
        rows = [measure(eps) for eps in eps_list]
    rows.sort(key=lambda row: -row["eps"])

    result = StudyResult(study="wholespace", problem_id=problem_id, rows=rows)
    for name in ("e_L2", "e_Hp", "e_flux"):
        result.records[name] = build_record(name, result.column(name), expected_slope=1.0)
    result.records["e_Hp_plain"] = build_record("e_Hp_plain", result.column("e_Hp_plain"), expected_slope=0.0)
    if operator_norm:
        result.records["e_L2_opnorm"] = build_record("e_L2_opnorm", result.column("e_L2_opnorm"), expected_slope=1.0)
    return result


def zeta_scaling_study(g: CoefficientG, b: Symbol, data: EffectiveData, eps: float, zetas: Sequence[complex],
                       F: PeriodicField, problem_id: str = "", threads: int = 1) -> StudyResult:
    """
    e_L2 at fixed eps along a ray of shifts, fitted against |zeta|

    Returns:
        StudyResult with the record "e_L2" (variable |zeta|, expected exponent -(1 - 1/2p))
    """
    expected = -(1.0 - 1.0 / (2 * b.p))
    F_eps = unit_rhs(F, data_grid(g, eps))

    def measure(zeta):
        error = norms(_error_map(g, b, data, eps, zeta, F_eps), 0)
        return {
            "study": "zeta_scaling",
            "problem_id": problem_id,
            "eps": float(eps),
            "zeta_re": float(np.real(zeta)),
            "zeta_im": float(np.imag(zeta)),
            "zeta_abs": float(abs(zeta)),
            "e_L2": error,
        }

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows: List[Dict] = list(pool.map(measure, zetas))
    else:
        rows = [measure(zeta) for zeta in zetas]
    rows.sort(key=lambda row: row["zeta_abs"])
    result = StudyResult(study="zeta_scaling", problem_id=problem_id, rows=rows)
    result.records["e_L2"] = build_record("e_L2", result.column("e_L2", "zeta_abs"), variable="|zeta|",
                                          expected_slope=expected)
    result.extras["expected_exponent"] = expected
    logger.info(f"zeta scaling: exponent {result.records['e_L2'].slope}, expected <= {expected:.3f}")
    return result
