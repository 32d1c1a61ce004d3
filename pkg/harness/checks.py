"""
Property Checks Module
Invariant battery behind the `check` subcommand and the acceptance-threshold
evaluation of study results
"""
import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

import config
from cell.effective import (
    CASE_BAR,
    CASE_UNDER,
    EffectiveData,
    lambda_bound_check,
    multiplier_condition,
    voigt_reuss_check,
    voigt_reuss_gaps,
)
from cell.potentials import flux_potentials
from core.multiindex import MultiIndex
from core.shift import flat_resolvent_weight, rho_flat
from core.symbol import Symbol, complex_rank_check
from errors import HomogenizationError
from harness.rates import FIT_DEGENERATE, FIT_FLAGGED, StudyResult, bounded_ratio_check
from neumann.assembly import BasisTables, mass_matrix, stiffness_matrix
from neumann.garding import GardingPencil, c_flat_lower_bound, estimate_garding
from neumann.kernel import kernel_Z, kernel_hp_residuals, smallest_eigenpairs
from neumann.studies import NeumannProblem
from torus.coefficient import CoefficientG
from torus.field import PeriodicField
from torus.operators import apply_D, apply_steklov, norms, steklov_product_bound_check

logger = logging.getLogger(__name__)

CheckOutcome = Tuple[bool, List[str]]

# Failing these flags the suite instead of failing it
ADVISORY_CHECKS = ("complex_rank",)


def _random_field(lattice, grid, shape, band: int, rng: np.random.Generator) -> PeriodicField:
    """Band-limited field with modes |k_j| <= band"""
    coeffs = np.zeros(tuple(grid) + tuple(shape), dtype=complex)
    index = tuple(np.r_[0:band + 1, size - band:size] for size in grid)
    block = np.ix_(*index)
    sizes = tuple(len(i) for i in index) + tuple(shape)
    coeffs[block] = rng.standard_normal(sizes) + 1j * rng.standard_normal(sizes)
    return PeriodicField.from_coeffs(lattice, coeffs)


class PropertySuite:
    """Invariants of one configured problem, each returning (passed, messages)"""

    def __init__(self, g: CoefficientG, b: Symbol, data: EffectiveData, seed: int = 0,
                 neumann: Optional[NeumannProblem] = None, steklov_samples: int = 50):
        """
        Initialize the suite

        Args:
            g: Coefficient on the solved grid
            b: Symbol
            data: Homogenized data of (g, b)
            seed: Seed of every randomized check
            neumann: Optional NeumannProblem for the bounded-domain checks
            steklov_samples: Number of seeded fields for the Steklov inequalities
        """
        self.g = g
        self.b = b
        self.data = data
        self.seed = seed
        self.neumann = neumann
        self.steklov_samples = steklov_samples

    # symbol and coefficient

    def check_symbol_rank(self) -> CheckOutcome:
        errors = []
        if self.b.alpha0 is None or self.b.alpha0 <= 0:
            errors.append(f"symbol is not elliptic on the real sphere (alpha0={self.b.alpha0})")
        return (not errors, errors)

    def check_complex_rank(self) -> CheckOutcome:
        if complex_rank_check(self.b, seed=self.seed):
            return (True, [])
        return (False, ["randomized search found a near-zero of b(xi) over C^d"])

    def check_coefficient(self) -> CheckOutcome:
        errors = []
        if self.g.min_eigenvalue <= 0:
            errors.append(f"coefficient minimum eigenvalue {self.g.min_eigenvalue:.3e}")
        if self.g.m != self.b.m:
            errors.append(f"coefficient size {self.g.m} does not match symbol rows {self.b.m}")
        return (not errors, errors)

    # cell problem

    def check_cell_residual(self) -> CheckOutcome:
        limit = 10.0 * config.SOLVER_SETTINGS["cg_tol"]
        if self.data.residual <= limit:
            return (True, [])
        return (False, [f"cell residual {self.data.residual:.3e} exceeds {limit:.1e}"])

    def check_energy_monotone(self) -> CheckOutcome:
        errors = []
        for column, history in enumerate(self.data.energy_history):
            values = np.asarray(history, dtype=float)
            if len(values) < 2:
                continue
            scale = max(abs(values).max(), 1.0)
            rises = np.flatnonzero(np.diff(values) > 1e-12 * scale)
            if len(rises):
                errors.append(f"column {column}: energy rises at iteration {int(rises[0]) + 1}")
        return (not errors, errors)

    def check_voigt_reuss(self) -> CheckOutcome:
        if voigt_reuss_check(self.data):
            return (True, [])
        upper, lower = voigt_reuss_gaps(self.data)
        return (False, [f"bracketing gaps {upper:.3e} (upper), {lower:.3e} (lower)"])

    def check_effective_matrix(self) -> CheckOutcome:
        errors = []
        if self.data.skew > config.SOLVER_SETTINGS["skew_tol"]:
            errors.append(f"skew part of g0 {self.data.skew:.3e}")
        smallest = float(np.linalg.eigvalsh(self.data.g0).min())
        if smallest <= 0:
            errors.append(f"g0 is not positive definite (smallest eigenvalue {smallest:.3e})")
        return (not errors, errors)

    def check_lambda_bounds(self) -> CheckOutcome:
        report = lambda_bound_check(self.data, self.g, self.b)
        errors = [f"{name} = {report[name]:.4f} > 1" for name in ("bD_lambda_ratio", "lambda_Hp_ratio")
                  if report[name] > 1.0 + 1e-8]
        return (not errors, errors)

    def check_trivial_corrector(self) -> CheckOutcome:
        """Constant g: Lambda vanishes and g0 = g"""
        values = self.g.field.values
        if np.abs(values - values.reshape(-1, self.g.m, self.g.m)[0]).max() > 0:
            return (True, [])
        errors = []
        size = norms(self.data.Lambda, 0)
        if size >= 1e-12:
            errors.append(f"||Lambda|| = {size:.3e} for a constant coefficient")
        deviation = float(np.abs(self.data.g0 - values.reshape(-1, self.g.m, self.g.m)[0]).max())
        if deviation > 1e-12:
            errors.append(f"g0 differs from the constant coefficient by {deviation:.3e}")
        return (not errors, errors)

    def check_special_case(self) -> CheckOutcome:
        errors = []
        if self.data.case == CASE_BAR:
            deviation = np.linalg.norm(self.data.g0 - self.data.g_bar, 2)
            if deviation > 1e-8 * np.linalg.norm(self.data.g_bar, 2):
                errors.append(f"bar case with g0 - mean(g) = {deviation:.3e}")
        if self.data.case == CASE_UNDER:
            deviation = np.linalg.norm(self.data.g0 - self.data.g_under, 2)
            if deviation > 1e-8 * np.linalg.norm(self.data.g_under, 2) and self.b.m == self.b.n:
                errors.append(f"under case with g0 - harmonic mean = {deviation:.3e}")
        return (not errors, errors)

    def check_flux_potentials(self) -> CheckOutcome:
        try:
            potentials = flux_potentials(self.data, self.b)
        except HomogenizationError as exc:
            return (False, [str(exc)])
        errors = []
        if potentials.residual_repr > 1e-9:
            errors.append(f"representation residual {potentials.residual_repr:.3e}")
        if potentials.antisymmetry_defect() != 0.0:
            errors.append(f"antisymmetry defect {potentials.antisymmetry_defect():.3e}")
        return (not errors, errors)

    # torus estimates

    def check_steklov(self, k: int = 4, band: int = 3) -> CheckOutcome:
        """Multiplier estimate, ||S_eps|| <= 1 and ||S_eps u - u|| <= eps r1 ||D u|| on seeded band-limited fields"""
        rng = np.random.default_rng(self.seed)
        lattice = self.g.lattice
        # products stay below the Nyquist layer, so grid norms are exact
        cell_grid = (4 * band + 2,) * lattice.d
        data_grid = tuple(k * size for size in cell_grid)
        eps = 1.0 / k
        errors = []
        for sample in range(self.steklov_samples):
            f = _random_field(lattice, cell_grid, (1, 1), band, rng)
            u = _random_field(lattice, data_grid, (1, 1), k * band, rng)
            measured, bound = steklov_product_bound_check(f, u, eps)
            if measured > bound * (1.0 + 1e-10):
                errors.append(f"sample {sample}: product {measured:.6e} > bound {bound:.6e}")
            # the approximation bound is only tight for low modes
            for v in (u, _random_field(lattice, data_grid, (1, 1), 1, rng)):
                smoothed = apply_steklov(v, eps, lattice)
                if norms(smoothed, 0) > norms(v, 0) * (1.0 + 1e-12):
                    errors.append(f"sample {sample}: ||S_eps u|| exceeds ||u||")
                gradient = np.sqrt(sum(norms(apply_D(v, MultiIndex.unit(lattice.d, j)), 0) ** 2
                                       for j in range(lattice.d)))
                defect = norms(smoothed - v, 0)
                if defect > eps * lattice.r1 * gradient * (1.0 + 1e-10):
                    errors.append(f"sample {sample}: ||S_eps u - u|| {defect:.6e} > eps r1 ||Du|| "
                                  f"{eps * lattice.r1 * gradient:.6e}")
        return (not errors, errors)

    def check_shift_weights(self, c_flat: float = 1.0) -> CheckOutcome:
        errors = []
        for zeta in (-1.0, 0.5 * c_flat, c_flat + 1j, -2.0 + 2.0j, 0.9 * c_flat + 0.01j):
            weight = flat_resolvent_weight(zeta, c_flat)
            bound = (c_flat + 2.0) * np.sqrt(rho_flat(zeta, c_flat))
            if weight > bound * (1.0 + 1e-9):
                errors.append(f"zeta={zeta}: weight {weight:.6g} > {bound:.6g}")
        return (not errors, errors)

    # bounded domain

    def check_neumann(self) -> CheckOutcome:
        """Partition of unity, kernel basis, Garding inequality and the c_flat lower bound on the study mesh"""
        space = self.neumann.study_space()
        tables = BasisTables(space, space.quadrature())
        errors = []
        defect = space.partition_of_unity_defect(tables.rule)
        if defect > 1e-12:
            errors.append(f"partition of unity defect {defect:.3e}")
        kernel = kernel_Z(space, self.b, tables=tables)
        if kernel.gram_defect() > 1e-10:
            errors.append(f"kernel basis is not M-orthonormal ({kernel.gram_defect():.3e})")
        if kernel.q and kernel_hp_residuals(kernel, tables, self.b).max() > 1e-6:
            errors.append("b(D) does not annihilate the kernel basis")

        k1, k2 = estimate_garding(space, self.b, tables=tables)
        pencil = GardingPencil(space, self.b, tables)
        rng = np.random.default_rng(self.seed)
        for _ in range(16):
            coeffs = rng.standard_normal(space.dof_count) + 1j * rng.standard_normal(space.dof_count)
            if not pencil.satisfied_by(coeffs, k1, k2):
                errors.append(f"Garding inequality fails for (k1, k2) = ({k1:.4g}, {k2:.4g})")
                break

        lower = c_flat_lower_bound(space, self.b, self.g.ginv_inf, kernel, tables)
        values, _ = smallest_eigenpairs(stiffness_matrix(tables, self.data.g0, self.b), mass_matrix(tables), kernel.q + 1)
        first = float(values[kernel.q])
        if lower > first * (1.0 + 1e-8):
            errors.append(f"c_flat lower bound {lower:.6g} exceeds lambda_(q+1) = {first:.6g}")
        return (not errors, errors)

    # aggregation

    def registry(self) -> Dict[str, Callable[[], CheckOutcome]]:
        checks = {
            "symbol_rank": self.check_symbol_rank,
            "complex_rank": self.check_complex_rank,
            "coefficient": self.check_coefficient,
            "cell_residual": self.check_cell_residual,
            "energy_monotone": self.check_energy_monotone,
            "voigt_reuss": self.check_voigt_reuss,
            "effective_matrix": self.check_effective_matrix,
            "lambda_bounds": self.check_lambda_bounds,
            "trivial_corrector": self.check_trivial_corrector,
            "special_case": self.check_special_case,
            "flux_potentials": self.check_flux_potentials,
            "steklov": self.check_steklov,
            "shift_weights": self.check_shift_weights,
        }
        if self.neumann is not None:
            checks["neumann"] = self.check_neumann
        return checks

    def run_all(self) -> Dict[str, Any]:
        """
        Run every registered check

        Returns:
            Dictionary with one entry per check, pass/fail counts and the suite status
        """
        logger.info("Starting property checks...")
        results = {"checks": [], "passed": 0, "failed": 0, "status": config.STUDY_STATUS["FAILED"]}
        advisory_failed = False
        for name, check in self.registry().items():
            try:
                passed, messages = check()
            except HomogenizationError as exc:
                passed, messages = False, [f"{type(exc).__name__}: {exc}"]
            results["checks"].append({
                "name": name,
                "status": config.STUDY_STATUS["PASSED"] if passed else config.STUDY_STATUS["FAILED"],
                "messages": "; ".join(messages),
            })
            if passed:
                results["passed"] += 1
            elif name in ADVISORY_CHECKS:
                advisory_failed = True
                results["checks"][-1]["status"] = config.STUDY_STATUS["FLAGGED"]
            else:
                results["failed"] += 1
                logger.warning(f"Check {name} failed: {messages}")

        if results["failed"]:
            results["status"] = config.STUDY_STATUS["FAILED"]
        elif advisory_failed:
            results["status"] = config.STUDY_STATUS["FLAGGED"]
        else:
            results["status"] = config.STUDY_STATUS["PASSED"]
        logger.info(f"Property checks completed. Status: {results['status']}, "
                    f"passed {results['passed']}, failed {results['failed']}")
        return results


def voigt_reuss_suite(builder: Callable[[int], Tuple[CoefficientG, EffectiveData]], count: int = 100,
                      tol: float = 1e-10) -> Tuple[bool, List[str]]:
    """Bracketing g_under <= g0 <= g_bar over `count` seeded coefficients built by builder(seed)"""
    errors = []
    for seed in range(count):
        _, data = builder(seed)
        upper, lower = voigt_reuss_gaps(data)
        threshold = -tol * np.linalg.norm(data.g_bar, 2)
        if upper < threshold or lower < threshold:
            errors.append(f"seed {seed}: gaps {upper:.3e}, {lower:.3e}")
    return (not errors, errors)


# acceptance thresholds

def _outcome(name: str, value: Optional[float], threshold: Any, passed: bool, flagged: bool = False) -> Dict[str, Any]:
    if not passed:
        status = config.STUDY_STATUS["FAILED"]
    elif flagged:
        status = config.STUDY_STATUS["FLAGGED"]
    else:
        status = config.STUDY_STATUS["PASSED"]
    return {"name": name, "value": value, "threshold": threshold, "status": status}


def _slope_check(result: StudyResult, quantity: str, minimum: float, r2: Optional[float] = None) -> List[Dict]:
    record = result.records.get(quantity)
    name = f"{result.study}:{quantity}"
    if record is None or record.slope is None:
        return [_outcome(f"{name}:slope", None, minimum, False)]
    flagged = record.status == FIT_FLAGGED
    outcomes = [_outcome(f"{name}:slope", record.slope, minimum, record.slope >= minimum, flagged)]
    if r2 is not None:
        outcomes.append(_outcome(f"{name}:r2", record.r2, r2, record.r2 >= r2))
    return outcomes


def _ratio_check(result: StudyResult, quantity: str, exponent: float, variation: float,
                 label: str = "ratio") -> Dict[str, Any]:
    """Bounded value / eps^exponent; a column at the noise floor satisfies any such bound"""
    name = f"{result.study}:{quantity}:{label}"
    pairs = result.column(quantity)
    if len(pairs) < 3:
        return _outcome(name, None, 1.0 + variation, False)
    if any(value <= 10.0 * config.STUDY_DEFAULTS["noise_floor"] for _, value in pairs):
        return _outcome(name, None, 1.0 + variation, True)
    ok, ratios = bounded_ratio_check(pairs, exponent, variation)
    return _outcome(name, max(ratios) / ratios[0], 1.0 + variation, ok)


def evaluate_wholespace(result: StudyResult, thresholds: Dict[str, float]) -> List[Dict]:
    outcomes = _slope_check(result, "e_L2", thresholds["slope_L2"], thresholds["r2"])
    outcomes += _slope_check(result, "e_Hp", thresholds["slope_Hp"], thresholds["r2"])
    return outcomes


def evaluate_neumann(result: StudyResult, data: EffectiveData, b: Symbol,
                     thresholds: Dict[str, float]) -> List[Dict]:
    """L2 slope, bounded sqrt(eps) ratio, corrected vs plain, and the special-case slopes"""
    outcomes = _slope_check(result, "e_L2", thresholds["slope_L2"])
    outcomes.append(_ratio_check(result, "e_Hp", 0.5, thresholds["sqrt_ratio_variation"], "sqrt_ratio"))

    finest = min(result.rows, key=lambda row: row["eps"])
    if data.case == CASE_BAR:
        outcomes += _slope_check(result, "e_Hp_plain", thresholds["bar_slope"])
    else:
        ratio = finest["e_Hp"] / finest["e_Hp_plain"]
        outcomes.append(_outcome(f"{result.study}:plain_over_corrected", ratio, thresholds["plain_over_corrected"],
                                 ratio < thresholds["plain_over_corrected"]))
    if data.case == CASE_UNDER:
        outcomes += _slope_check(result, "e_Hp_std", thresholds["under_slope"])

    if multiplier_condition(b.p, b.d, data.case) and data.case != CASE_BAR:
        factor = max(max(row["e_Hp"] / row["e_Hp_std"], row["e_Hp_std"] / row["e_Hp"]) for row in result.rows)
        outcomes.append(_outcome(f"{result.study}:smoothing_factor", factor, thresholds["smoothing_factor"],
                                 factor <= thresholds["smoothing_factor"]))
    return outcomes


def evaluate_b_resolvent(result: StudyResult, thresholds: Dict[str, float]) -> List[Dict]:
    """L2 slope and bounded e_L2 / eps for the shifted resolvent"""
    outcomes = _slope_check(result, "e_L2", thresholds["slope_L2"])
    outcomes.append(_ratio_check(result, "e_L2", 1.0, thresholds["ratio_variation"]))
    return outcomes


def evaluate_zeta_scaling(result: StudyResult, thresholds: Dict[str, float]) -> List[Dict]:
    record = result.records["e_L2"]
    limit = result.extras["expected_exponent"] + thresholds["zeta_exponent_slack"]
    if record.slope is None:
        return [_outcome("zeta_scaling:e_L2:exponent", None, limit, False)]
    return [_outcome("zeta_scaling:e_L2:exponent", record.slope, limit, record.slope <= limit)]


def evaluate_rho_sweep(result: StudyResult, thresholds: Dict[str, float]) -> List[Dict]:
    """Monotone growth within a factor of the rho_flat prediction"""
    if result.extras.get("status") == FIT_DEGENERATE:
        return [
            _outcome("rho_sweep:monotone", None, True, False),
            _outcome("rho_sweep:factor", None, thresholds["rho_factor"], True),
        ]
    measured = np.asarray(result.extras["measured_growth"])
    predicted = np.asarray(result.extras["predicted_growth"])
    monotone = bool(np.all(np.diff(measured) > 0))
    factor = float(np.max(np.maximum(measured / predicted, predicted / measured)))
    return [
        _outcome("rho_sweep:monotone", float(monotone), True, monotone),
        _outcome("rho_sweep:factor", factor, thresholds["rho_factor"], factor <= thresholds["rho_factor"]),
    ]


def summarize_outcomes(outcomes: List[Dict]) -> str:
    statuses = {o["status"] for o in outcomes}
    for status in ("FAILED", "FLAGGED"):
        if config.STUDY_STATUS[status] in statuses:
            return config.STUDY_STATUS[status]
    return config.STUDY_STATUS["PASSED"]
