"""
Neumann Studies Module
eps-rates of the bounded-domain resolvent errors, the kernel-projected variants
and the shift sweeps toward the first nonzero eigenvalue
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

import config
from cell.effective import CASE_BAR, CASE_UNDER, EffectiveData, multiplier_condition
from core.shift import rho_flat, shift_from_zeta
from core.symbol import Symbol
from errors import DomainError, ResolutionError
from harness.rates import FIT_DEGENERATE, FIT_FITTED, StudyResult, build_record
from torus.coefficient import CoefficientG
from torus.operators import evaluate
from .assembly import BasisTables, load_vector, mass_matrix, panels_for, stiffness_matrix, under_resolved
from .correctors import (
    PlainFlux,
    SmoothedFlux,
    corrector_KN,
    corrector_KN0,
    hp_norm,
    solution_derivatives,
    table_difference,
)
from .extension import ExtensionOperator
from .garding import regularity_constant
from .kernel import KernelZ, kernel_Z
from .solver import factorize, solve_with_load
from .space import GalerkinSpace
from .spectral_shift import SpectralShiftData, kernel_identity_defect, spectral_shift

logger = logging.getLogger(__name__)

VARIANT_A = "A"
VARIANT_B = "B"


@dataclass(frozen=True, eq=False)
class NeumannProblem:
    """Coefficient, symbol, homogenized data, box and right-hand side of one bounded-domain study"""

    g: CoefficientG
    b: Symbol
    data: EffectiveData
    bounds: Tuple[Tuple[float, float], ...]
    rhs: Callable[[np.ndarray], np.ndarray]
    resolution: int = config.STUDY_DEFAULTS["resolution"]
    problem_id: str = ""
    collar: Optional[float] = None

    @property
    def cell_lengths(self) -> np.ndarray:
        return self.g.lattice.lengths

    def study_space(self) -> GalerkinSpace:
        elements = [max(1, int(np.ceil(self.resolution * (b - a) - 1e-9))) for a, b in self.bounds]
        return GalerkinSpace.build(self.bounds, elements, self.b.p, self.b.n)

    def reference_space(self, eps: float) -> GalerkinSpace:
        """Mesh aligned with every eps-period, refined past the study mesh"""
        study = self.study_space()
        per_period = config.STUDY_DEFAULTS["cells_per_period"]
        refinement = config.STUDY_DEFAULTS["reference_refinement"]
        elements = []
        for (a, b), length, axis in zip(self.bounds, self.cell_lengths, study.axes):
            periods = (b - a) / (eps * length)
            if abs(periods - round(periods)) > 1e-9 or round(periods) < 1:
                raise ResolutionError(f"{periods:.6g} periods per side: the mesh cannot align with eps={eps}")
            count = int(round(periods)) * per_period
            while count < refinement * axis.elements:
                count *= 2
            elements.append(count)
        space = study.with_elements(elements)
        check_reference(space, study, eps, self.cell_lengths)
        return space


def check_reference(space: GalerkinSpace, study: GalerkinSpace, eps: float, cell_lengths: Sequence[float]):
    """
    Raises:
        ResolutionError: Reference mesh coarser than required
    """
    per_period = config.STUDY_DEFAULTS["cells_per_period"]
    refinement = config.STUDY_DEFAULTS["reference_refinement"]
    for axis, coarse, length in zip(space.axes, study.axes, cell_lengths):
        if eps * length < per_period * axis.h * (1 - 1e-9):
            raise ResolutionError(f"{eps * length / axis.h:.3g} elements per period, need {per_period}")
        if axis.elements < refinement * coarse.elements:
            raise ResolutionError(f"reference mesh {axis.elements} < {refinement} x study mesh {coarse.elements}")


@dataclass(eq=False)
class Discretization:
    """Reference space at one eps with both stiffness matrices, mass and load"""

    space: GalerkinSpace
    tables: BasisTables
    stiffness_eps: sp.csr_matrix
    stiffness_eff: sp.csr_matrix
    mass: sp.csr_matrix
    load: np.ndarray
    kernel: Optional[KernelZ] = None

    def kernel_Z(self, b: Symbol) -> KernelZ:
        if self.kernel is None:
            self.kernel = kernel_Z(self.space, b, tables=self.tables)
        return self.kernel


def discretize(problem: NeumannProblem, eps: float) -> Discretization:
    space = problem.reference_space(eps)
    tables = BasisTables(space, space.quadrature(panels_for(space, eps, problem.cell_lengths)))
    if under_resolved(space, tables.rule, eps, problem.cell_lengths):
        raise ResolutionError(f"quadrature does not resolve eps={eps}")
    logger.debug(f"eps={eps}: {space.dof_count} dofs, {tables.rule.size} quadrature points")
    return Discretization(
        space=space,
        tables=tables,
        stiffness_eps=stiffness_matrix(tables, problem.g, problem.b, eps),
        stiffness_eff=stiffness_matrix(tables, problem.data.g0, problem.b),
        mass=mass_matrix(tables),
        load=load_vector(tables, problem.rhs),
    )


def _projected_load(disc: Discretization, b: Symbol) -> np.ndarray:
    """M (F - P_Z F) from the load M F"""
    kernel = disc.kernel_Z(b)
    return disc.load - disc.mass @ (kernel.basis @ (kernel.basis.conj().T @ disc.load))


def _flux_tilde(data: EffectiveData, points: np.ndarray) -> np.ndarray:
    if data.case == CASE_UNDER:
        return np.broadcast_to(data.g0, (len(points),) + data.g0.shape)
    return evaluate(data.g_tilde, points)


def measure_neumann(problem: NeumannProblem, eps: float, zeta: complex, variant: Optional[str] = None,
                    study: str = "neumann", disc: Optional[Discretization] = None) -> Dict:
    """
    One row of a bounded-domain study

    Args:
        problem: Study problem
        eps: Period scale
        zeta: Shift
        variant: None for the plain study, "A" (raw F, projected corrector) or
            "B" (projected F)
        study: Study label of the row
        disc: Discretization at eps (built when omitted)

    Returns:
        Row with the CSV columns plus solver diagnostics
    """
    g, b, data = problem.g, problem.b, problem.data
    disc = disc or discretize(problem, eps)
    tables = disc.tables
    load = _projected_load(disc, b) if variant == VARIANT_B else disc.load

    u_eps = solve_with_load(disc.stiffness_eps, disc.mass, zeta, load)
    effective = factorize(disc.stiffness_eff, disc.mass, zeta)
    u0 = solve_with_load(disc.stiffness_eff, disc.mass, zeta, load, solver=effective)
    corrector_input = u0.coeffs
    if variant == VARIANT_A:
        corrector_input = solve_with_load(disc.stiffness_eff, disc.mass, zeta, _projected_load(disc, b),
                                          solver=effective).coeffs

    P = ExtensionOperator.for_space(disc.space, problem.collar)
    derivatives_eps = solution_derivatives(tables, u_eps.coeffs)
    derivatives_0 = solution_derivatives(tables, u0.coeffs)
    K = corrector_KN(data, g, b, eps, corrector_input, P, tables, problem.cell_lengths)
    plain = table_difference(derivatives_eps, derivatives_0)
    zero = (0,) * disc.space.d

    e_Hp_std = np.nan
    if multiplier_condition(b.p, b.d, data.case):
        K0 = corrector_KN0(data, g, b, eps, corrector_input, tables)
        e_Hp_std = hp_norm(tables, table_difference(plain, K0))

    points = tables.points
    flux_eps = np.einsum("qst,qt->qs", g.evaluate(points / eps), tables.b_values(b, u_eps.coeffs))
    g_tilde = _flux_tilde(data, points / eps)
    smoothed = SmoothedFlux(tables, P, b, eps, problem.cell_lengths, corrector_input)(zero)
    standard = PlainFlux(tables, b, corrector_input)(zero)

    row = {
        "study": study,
        "problem_id": problem.problem_id,
        "eps": float(eps),
        "zeta_re": float(np.real(zeta)),
        "zeta_im": float(np.imag(zeta)),
        "e_L2": tables.l2_norm(plain[zero]),
        "e_Hp": hp_norm(tables, table_difference(plain, K)),
        "e_Hp_plain": hp_norm(tables, plain),
        "e_Hp_std": e_Hp_std,
        "e_flux": tables.l2_norm(flux_eps - np.einsum("qst,qt->qs", g_tilde, smoothed)),
        "e_flux_std": tables.l2_norm(flux_eps - np.einsum("qst,qt->qs", g_tilde, standard)),
        "e_L2_opnorm": np.nan,
        "corrector_Hp": hp_norm(tables, K),
        "residual_eps": u_eps.residual,
        "residual_eff": u0.residual,
        "dofs": disc.space.dof_count,
    }
    logger.info(f"{study} eps={eps:.5g}: e_L2={row['e_L2']:.3e}, e_Hp={row['e_Hp']:.3e}, "
                f"e_Hp_plain={row['e_Hp_plain']:.3e}")
    return row


def _run(measure: Callable[[float], Dict], values: Sequence, threads: int) -> List[Dict]:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(measure, values))
    return [measure(value) for value in values]


def _attach_records(result: StudyResult, data: EffectiveData):
    result.records["e_L2"] = build_record("e_L2", result.column("e_L2"), expected_slope=1.0)
    result.records["e_Hp"] = build_record("e_Hp", result.column("e_Hp"), expected_slope=0.5)
    result.records["e_flux"] = build_record("e_flux", result.column("e_flux"), expected_slope=0.5)
    plain_slope = 0.5 if data.case == CASE_BAR else 0.0
    result.records["e_Hp_plain"] = build_record("e_Hp_plain", result.column("e_Hp_plain"), expected_slope=plain_slope)
    if result.column("e_Hp_std"):
        std_slope = 1.0 if data.case == CASE_UNDER else 0.5
        result.records["e_Hp_std"] = build_record("e_Hp_std", result.column("e_Hp_std"), expected_slope=std_slope)


def neumann_error_study(problem: NeumannProblem, eps_list: Sequence[float], zeta: complex = -1.0,
                        threads: int = 1) -> StudyResult:
    """
    Oscillating versus effective Neumann resolvent across eps

    Args:
        problem: Study problem
        eps_list: Period scales aligned with the box
        zeta: Shift off [0, inf)
        threads: Worker threads over eps

    Returns:
        StudyResult with records for e_L2, e_Hp, e_flux, e_Hp_plain and e_Hp_std
    """
    shift_from_zeta(zeta)
    logger.info(f"Neumann study {problem.problem_id}: zeta={zeta}, eps={list(eps_list)}, case={problem.data.case}")
    rows = _run(lambda eps: measure_neumann(problem, eps, zeta), eps_list, threads)
    rows.sort(key=lambda row: -row["eps"])
    result = StudyResult(study="neumann", problem_id=problem.problem_id, rows=rows)
    _attach_records(result, problem.data)
    result.extras["case"] = problem.data.case
    return result


def shift_data(problem: NeumannProblem, eps: float, disc: Optional[Discretization] = None) -> SpectralShiftData:
    disc = disc or discretize(problem, eps)
    return spectral_shift(disc.stiffness_eps, disc.stiffness_eff, disc.mass, disc.kernel_Z(problem.b))


def b_resolvent_study(problem: NeumannProblem, zeta: complex, eps_list: Sequence[float],
                      variant: str = VARIANT_B, threads: int = 1) -> StudyResult:
    """
    Errors for shifts in C minus [c_flat, inf), including (0, c_flat)

    Variant "A" keeps F and projects the corrector input onto the complement of
    Z; variant "B" projects F itself.

    Returns:
        StudyResult "b_resolvent_<variant>" with rho_flat and the kernel identity defect per eps
    """
    if variant not in (VARIANT_A, VARIANT_B):
        raise DomainError(f"unknown variant {variant!r}")
    zeta = complex(zeta)
    if zeta == 0:
        raise DomainError("zeta must be nonzero")
    study = f"b_resolvent_{variant}"

    def measure(eps):
        disc = discretize(problem, eps)
        shift = spectral_shift(disc.stiffness_eps, disc.stiffness_eff, disc.mass, disc.kernel_Z(problem.b))
        weight = rho_flat(zeta, shift.c_flat)
        row = measure_neumann(problem, eps, zeta, variant, study, disc)
        row["c_flat"] = shift.c_flat
        row["rho_flat"] = weight
        row["kernel_identity"] = kernel_identity_defect(disc.stiffness_eps, disc.mass, disc.kernel_Z(problem.b), zeta)
        return row

    rows = _run(measure, eps_list, threads)
    rows.sort(key=lambda row: -row["eps"])
    result = StudyResult(study=study, problem_id=problem.problem_id, rows=rows)
    _attach_records(result, problem.data)
    result.extras["kernel_identity"] = max(row["kernel_identity"] for row in rows)
    return result


def rho_sweep(problem: NeumannProblem, eps: float, deltas: Sequence[float] = (0.2, 0.1, 0.05)) -> StudyResult:
    """
    e_L2 at zeta = c_flat (1 - delta) on the real axis against the rho_flat prediction

    Returns:
        StudyResult "rho_sweep" with measured and predicted growth relative to the first delta
    """
    disc = discretize(problem, eps)
    c_flat = shift_data(problem, eps, disc).c_flat
    rows = []
    for delta in deltas:
        zeta = c_flat * (1.0 - delta)
        row = measure_neumann(problem, eps, zeta, VARIANT_B, "rho_sweep", disc)
        row["delta"] = float(delta)
        row["c_flat"] = c_flat
        row["rho_flat"] = rho_flat(zeta, c_flat)
        rows.append(row)
    result = StudyResult(study="rho_sweep", problem_id=problem.problem_id, rows=rows)
    first = rows[0]
    result.extras["predicted_growth"] = [row["rho_flat"] / first["rho_flat"] for row in rows]
    result.extras["c_flat"] = c_flat
    if any(row["e_L2"] <= 10.0 * config.STUDY_DEFAULTS["noise_floor"] for row in rows):
        logger.info("rho sweep: e_L2 at the noise floor, no growth measured")
        result.extras["status"] = FIT_DEGENERATE
        result.extras["measured_growth"] = [np.nan] * len(rows)
        return result
    result.extras["status"] = FIT_FITTED
    result.extras["measured_growth"] = [row["e_L2"] / first["e_L2"] for row in rows]
    logger.info(f"rho sweep: measured {np.round(result.extras['measured_growth'], 3).tolist()}, "
                f"predicted {np.round(result.extras['predicted_growth'], 3).tolist()}")
    return result


def small_shift_study(problem: NeumannProblem, eps: float, zetas: Sequence[complex],
                      threads: int = 1) -> StudyResult:
    """
    Errors for |zeta| <= 1 weighted by c(phi)^2 |zeta|^{-2} (L2) and c(phi) |zeta|^{-1} (H^p)

    Returns:
        StudyResult "small_shift" with weighted ratios per zeta
    """
    for zeta in zetas:
        if abs(zeta) > 1.0:
            raise DomainError(f"small-shift study needs |zeta| <= 1, got {zeta}")

    def measure(zeta):
        shift = shift_from_zeta(zeta)
        row = measure_neumann(problem, eps, shift.zeta, study="small_shift")
        weight_L2 = shift.c_phi ** 2 / shift.modulus ** 2
        weight_Hp = shift.c_phi / shift.modulus
        row.update({
            "zeta_abs": shift.modulus,
            "weight_L2": weight_L2,
            "weight_Hp": weight_Hp,
            "e_L2_weighted": row["e_L2"] / weight_L2,
            "e_Hp_weighted": row["e_Hp"] / weight_Hp,
        })
        return row

    rows = _run(measure, list(zetas), threads)
    rows.sort(key=lambda row: row["zeta_abs"])
    result = StudyResult(study="small_shift", problem_id=problem.problem_id, rows=rows)
    result.extras["max_e_L2_weighted"] = max(row["e_L2_weighted"] for row in rows)
    result.extras["max_e_Hp_weighted"] = max(row["e_Hp_weighted"] for row in rows)
    return result


def resolvent_norm_bounds(tables: BasisTables, u: np.ndarray, F_norm: float, zeta: complex,
                          k1: float, k2: float, ginv_inf: float) -> Dict[str, float]:
    """
    ||u|| <= c(phi) |zeta|^{-1} ||F|| and, at zeta = -1, ||u||_{H^p} <= C0 ||F||

    Returns:
        Dictionary with measured norms, bounds and the flag "ok"
    """
    shift = shift_from_zeta(zeta)
    l2 = tables.l2_norm(tables.values(u, (0,) * tables.space.d))
    hp = hp_norm(tables, solution_derivatives(tables, u))
    l2_bound = shift.c_phi / shift.modulus * F_norm
    report = {"L2": l2, "L2_bound": l2_bound, "Hp": hp, "Hp_bound": np.nan}
    ok = l2 <= l2_bound * (1.0 + 1e-8)
    if shift.zeta == -1:
        report["Hp_bound"] = regularity_constant(k1, k2, ginv_inf) * F_norm
        ok = ok and hp <= report["Hp_bound"] * (1.0 + 1e-8)
    report["ok"] = bool(ok)
    return report
