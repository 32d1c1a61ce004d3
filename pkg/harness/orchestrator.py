"""
Study Orchestrator Module
Builds the configured problem, runs one subcommand's studies, evaluates the
acceptance thresholds and writes the result bundle
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

import config
from cell.effective import EffectiveData, lambda_bound_check, voigt_reuss_gaps
from cell.solver import homogenize
from core.symbol import Symbol
from errors import ConfigError, DomainError, HomogenizationError, ShapeError
from harness.checks import (
    PropertySuite,
    evaluate_b_resolvent,
    evaluate_neumann,
    evaluate_rho_sweep,
    evaluate_wholespace,
    evaluate_zeta_scaling,
    summarize_outcomes,
)
from harness.expressions import build_coefficient, build_domain_rhs, build_symbol, build_torus_rhs
from harness.rates import StudyResult
from harness.study_config import StudyConfig, config_fingerprint, serialize_config
from neumann.assembly import BasisTables
from neumann.garding import c_flat_lower_bound, estimate_garding, regularity_constant
from neumann.spectral_shift import kernel_identity_defect
from neumann.studies import (
    NeumannProblem,
    b_resolvent_study,
    discretize,
    neumann_error_study,
    rho_sweep,
    shift_data,
    small_shift_study,
)
from storage.csv_writer import CSVWriter
from storage.excel_writer import ExcelWriter
from storage.json_writer import JSONWriter
from torus.coefficient import CoefficientG
from torus.field import PeriodicField
from wholespace.studies import wholespace_error_study, zeta_scaling_study

logger = logging.getLogger(__name__)

COMMANDS = ("cell", "check", "wholespace-rates", "neumann-rates", "zeta-sweep", "spectrum")
SWEEP_MODULI = (1.0, 4.0, 16.0, 64.0)
SMALL_SHIFTS = (-0.1, -0.25 + 0.25j, 0.5j, -1.0)


@dataclass
class PreparedProblem:
    """Coefficient, symbol, homogenized data and right-hand side of one configuration"""

    cfg: StudyConfig
    g: CoefficientG
    b: Symbol
    data: EffectiveData
    F: PeriodicField

    def neumann_problem(self) -> NeumannProblem:
        if self.cfg.domain is None:
            raise ConfigError(f"configuration '{self.cfg.problem_id}' has no bounded domain")
        bounds = tuple(self.cfg.bounds)
        return NeumannProblem(
            g=self.g,
            b=self.b,
            data=self.data,
            bounds=bounds,
            rhs=build_domain_rhs(self.cfg.rhs, bounds, self.b.n),
            resolution=int(self.cfg.domain.get("resolution", config.STUDY_DEFAULTS["resolution"])),
            problem_id=self.cfg.problem_id,
            collar=self.cfg.domain.get("collar"),
        )


@dataclass
class ResultBundle:
    """Everything one run produced"""

    command: str
    problem_id: str
    fingerprint: str
    summary: Dict[str, Any] = field(default_factory=dict)
    results: List[StudyResult] = field(default_factory=list)
    outcomes: List[Dict[str, Any]] = field(default_factory=list)
    status: str = config.STUDY_STATUS["PASSED"]
    paths: Dict[str, Path] = field(default_factory=dict)

    @property
    def rows(self) -> List[Dict]:
        return [row for result in self.results for row in result.rows]

    @property
    def records(self) -> List[Dict]:
        return [dict(record.to_dict(), study=result.study)
                for result in self.results for record in result.records.values()]

    @property
    def passed(self) -> bool:
        return self.status != config.STUDY_STATUS["FAILED"]


def prepare(cfg: StudyConfig, threads: int = 1) -> PreparedProblem:
    """Build g, b and F from the configuration and solve the cell problem"""
    b = build_symbol(cfg.symbol, cfg.dimension, cfg.order)
    g = build_coefficient(cfg.coefficient, cfg.cell_lengths, cfg.cutoff, b.m, seed=cfg.seeds["coefficient"])
    data, g = homogenize(g, b, cutoff=cfg.cutoff, tol=cfg.tolerance("cg_tol"), threads=threads)
    F = build_torus_rhs(cfg.rhs, cfg.cell_lengths, cfg.cutoff, b.n)
    return PreparedProblem(cfg=cfg, g=g, b=b, data=data, F=F)


def _effective_summary(problem: PreparedProblem) -> Dict[str, Any]:
    summary = problem.data.summary()
    upper, lower = voigt_reuss_gaps(problem.data)
    summary["voigt_reuss_gaps"] = [upper, lower]
    summary["lambda_bounds"] = lambda_bound_check(problem.data, problem.g, problem.b)
    summary["alpha0"] = problem.b.alpha0
    summary["alpha1"] = problem.b.alpha1
    summary["g_inf"] = problem.g.g_inf
    summary["ginv_inf"] = problem.g.ginv_inf
    return summary


# subcommands

def run_cell(problem: PreparedProblem, bundle: ResultBundle, threads: int):
    bundle.summary["cell"] = {
        "final_energy": [history[-1] if history else None for history in problem.data.energy_history],
        "contrast": problem.g.contrast,
    }


def run_check(problem: PreparedProblem, bundle: ResultBundle, threads: int):
    neumann = problem.neumann_problem() if problem.cfg.domain else None
    suite = PropertySuite(problem.g, problem.b, problem.data, seed=problem.cfg.seeds["probe"], neumann=neumann)
    report = suite.run_all()
    bundle.summary["checks"] = {"passed": report["passed"], "failed": report["failed"], "status": report["status"]}
    bundle.outcomes.extend({"name": item["name"], "value": None, "threshold": item["messages"],
                            "status": item["status"]} for item in report["checks"])


def run_wholespace(problem: PreparedProblem, bundle: ResultBundle, threads: int):
    cfg = problem.cfg
    for zeta in cfg.zetas:
        result = wholespace_error_study(problem.g, problem.b, problem.data, zeta, problem.F, cfg.eps_list,
                                        problem_id=cfg.problem_id, threads=threads,
                                        operator_norm=cfg.operator_norm, seed=cfg.seeds["probe"])
        bundle.results.append(result)
        bundle.outcomes.extend(evaluate_wholespace(result, cfg.acceptance))


def run_neumann(problem: PreparedProblem, bundle: ResultBundle, threads: int):
    cfg = problem.cfg
    neumann = problem.neumann_problem()
    for zeta in cfg.zetas:
        result = neumann_error_study(neumann, cfg.eps_list, zeta, threads=threads)
        bundle.results.append(result)
        bundle.outcomes.extend(evaluate_neumann(result, problem.data, problem.b, cfg.acceptance))

    if cfg.shift_study:
        variant = cfg.shift_study.get("variant", "B")
        c_flat = shift_data(neumann, cfg.eps_list[0]).c_flat
        bundle.summary["c_flat"] = c_flat
        for fraction in cfg.shift_study.get("fractions", [0.5]):
            result = b_resolvent_study(neumann, fraction * c_flat, cfg.eps_list, variant, threads=threads)
            result.extras["fraction"] = fraction
            bundle.results.append(result)
            bundle.outcomes.extend(evaluate_b_resolvent(result, cfg.acceptance))


def run_zeta_sweep(problem: PreparedProblem, bundle: ResultBundle, threads: int):
    """Ray |zeta| -> infinity on the torus; with a domain also small shifts and the approach to c_flat"""
    cfg = problem.cfg
    eps = min(cfg.eps_list)
    direction = cfg.zetas[0] / abs(cfg.zetas[0])
    zetas = [modulus * direction for modulus in SWEEP_MODULI]
    result = zeta_scaling_study(problem.g, problem.b, problem.data, eps, zetas, problem.F,
                                problem_id=cfg.problem_id, threads=threads)
    bundle.results.append(result)
    bundle.outcomes.extend(evaluate_zeta_scaling(result, cfg.acceptance))
    if cfg.domain is None:
        return

    neumann = problem.neumann_problem()
    small = [zeta for zeta in cfg.zetas if abs(zeta) <= 1.0] or list(SMALL_SHIFTS)
    result = small_shift_study(neumann, eps, small, threads=threads)
    bundle.results.append(result)
    deltas = (cfg.shift_study or {}).get("rho_deltas", [0.2, 0.1, 0.05])
    sweep = rho_sweep(neumann, eps, deltas)
    bundle.results.append(sweep)
    bundle.outcomes.extend(evaluate_rho_sweep(sweep, cfg.acceptance))


def run_spectrum(problem: PreparedProblem, bundle: ResultBundle, threads: int):
    """Kernel of b(D), c_flat, Garding constants and the kernel resolvent identity"""
    cfg = problem.cfg
    neumann = problem.neumann_problem()
    eps = cfg.eps_list[0]
    disc = discretize(neumann, eps)
    shift = shift_data(neumann, eps, disc)
    kernel = disc.kernel_Z(problem.b)

    coarse = neumann.study_space()
    tables = BasisTables(coarse, coarse.quadrature())
    k1, k2 = estimate_garding(coarse, problem.b, tables=tables)
    spectrum = shift.summary()
    spectrum.update({
        "eps": eps,
        "kernel_eigenvalues": [float(v) for v in kernel.eigenvalues],
        "garding_k1": k1,
        "garding_k2": k2,
        "regularity_constant": regularity_constant(k1, k2, problem.g.ginv_inf),
        "c_flat_lower_bound": c_flat_lower_bound(coarse, problem.b, problem.g.ginv_inf, tables=tables),
        "kernel_identity": kernel_identity_defect(disc.stiffness_eps, disc.mass, kernel, -2.0),
    })
    bundle.summary["spectrum"] = spectrum
    identity_ok = spectrum["kernel_identity"] <= 1e-10
    bundle.outcomes.append({"name": "spectrum:kernel_identity", "value": spectrum["kernel_identity"],
                            "threshold": 1e-10,
                            "status": config.STUDY_STATUS["PASSED" if identity_ok else "FAILED"]})


RUNNERS = {
    "cell": run_cell,
    "check": run_check,
    "wholespace-rates": run_wholespace,
    "neumann-rates": run_neumann,
    "zeta-sweep": run_zeta_sweep,
    "spectrum": run_spectrum,
}


def write_bundle(bundle: ResultBundle, cfg: StudyConfig, output_dir: Optional[Path] = None) -> Dict[str, Path]:
    """CSV of all rows, JSON summary with the configuration, Excel report"""
    output_dir = Path(output_dir or cfg.output_dir or config.OUTPUT_DIR)
    stem = f"{cfg.problem_id}_{bundle.command}"
    paths = {}
    if bundle.rows:
        extra = sorted({key for row in bundle.rows for key in row} - set(config.CSV_COLUMNS))
        paths["csv"] = CSVWriter(output_dir / "csv").write_rows(bundle.rows, stem, extra_columns=extra)
    json_writer = JSONWriter(output_dir / "reports")
    paths["summary"] = json_writer.write_summary({
        "problem_id": bundle.problem_id,
        "command": bundle.command,
        "fingerprint": bundle.fingerprint,
        "status": bundle.status,
        "summary": bundle.summary,
        "results": [result.to_dict() for result in bundle.results],
        "thresholds": bundle.outcomes,
    }, stem)
    paths["config"] = json_writer.write_config(serialize_config(cfg), f"{stem}_config")
    flat = {"problem_id": bundle.problem_id, "command": bundle.command, "fingerprint": bundle.fingerprint,
            "status": bundle.status}
    flat.update({key: value for key, value in bundle.summary.get("effective", {}).items()
                 if key in ("g0", "case", "residual", "iterations")})
    paths["excel"] = ExcelWriter(output_dir / "excel").write_report(flat, bundle.records, bundle.outcomes, stem)
    return paths


def run_study(cfg: StudyConfig, command: str = "cell", output_dir: Optional[Path] = None, threads: int = 1,
              write: bool = True) -> ResultBundle:
    """
    Run one subcommand on a validated configuration

    Args:
        cfg: Parsed study configuration
        command: One of COMMANDS
        output_dir: Root of the csv/, reports/ and excel/ outputs
        threads: Worker threads over independent eps values
        write: Write the CSV, JSON and Excel artifacts

    Returns:
        ResultBundle with effective data summary, study results, threshold outcomes and status

    Raises:
        ConfigError: Unknown command or a configuration the command cannot use
        SolverError: Propagated from the studies, annotated with the problem id
    """
    if command not in RUNNERS:
        raise ConfigError(f"unknown command {command!r}", [f"choose one of {list(COMMANDS)}"])
    if command in ("spectrum",) and cfg.domain is None:
        raise ConfigError(f"'{command}' needs a bounded domain in configuration '{cfg.problem_id}'")

    fingerprint = config_fingerprint(cfg)
    logger.info(f"Running {command} on {cfg.problem_id} ({fingerprint})")
    bundle = ResultBundle(command=command, problem_id=cfg.problem_id, fingerprint=fingerprint)
    try:
        problem = prepare(cfg, threads)
        bundle.summary["effective"] = _effective_summary(problem)
        RUNNERS[command](problem, bundle, threads)
    except (DomainError, ShapeError) as exc:
        raise ConfigError(f"{cfg.problem_id}: {exc}") from exc
    except HomogenizationError as exc:
        logger.error(f"{command} on {cfg.problem_id} failed: {exc}")
        raise

    if command == "check":
        bundle.status = bundle.summary["checks"]["status"]
    else:
        bundle.status = summarize_outcomes(bundle.outcomes)
    if write:
        bundle.paths = write_bundle(bundle, cfg, output_dir)
    logger.info(f"{command} on {cfg.problem_id}: {bundle.status}, {len(bundle.rows)} rows, "
                f"{sum(o['status'] == config.STUDY_STATUS['FAILED'] for o in bundle.outcomes)} failed thresholds")
    return bundle


def g0_text(bundle: ResultBundle) -> str:
    g0 = np.asarray([[complex(re, im) for re, im in row] for row in bundle.summary["effective"]["g0"]])
    if np.all(np.abs(g0.imag) <= 1e-14 * max(np.abs(g0).max(), 1.0)):
        g0 = g0.real
    return np.array2string(g0, precision=12)
