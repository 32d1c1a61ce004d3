"""Tests for the bounded-domain correctors and studies"""
import numpy as np
import pytest

import config
from cell.solver import homogenize
from errors import DomainError, GateError, ResolutionError
from harness.checks import evaluate_rho_sweep
from harness.expressions import build_coefficient, build_domain_rhs
from harness.rates import FIT_DEGENERATE
from neumann.assembly import BasisTables
from neumann.correctors import corrector_KN0, hp_norm, solution_derivatives, table_difference
from neumann.solver import solve_with_load
from neumann.space import GalerkinSpace
from neumann.studies import (
    NeumannProblem,
    b_resolvent_study,
    discretize,
    measure_neumann,
    neumann_error_study,
    resolvent_norm_bounds,
    rho_sweep,
    small_shift_study,
)
from tests.conftest import TWO_PHASE

HALF_PERIOD = ((0.0, np.pi),)


@pytest.fixture(scope="module")
def unit_problem(gradient_1d):
    g = build_coefficient({"type": "constant", "value": 1.0}, [np.pi], 16, 1)
    data, g = homogenize(g, gradient_1d)
    return NeumannProblem(g=g, b=gradient_1d, data=data, bounds=HALF_PERIOD,
                          rhs=build_domain_rhs(None, HALF_PERIOD, 1), resolution=4, problem_id="unit_pi")


@pytest.fixture(scope="module")
def two_phase_problem(gradient_1d):
    g = build_coefficient(TWO_PHASE, [1.0], 128, 1)
    data, g = homogenize(g, gradient_1d)
    bounds = ((0.0, 1.0),)
    return NeumannProblem(g=g, b=gradient_1d, data=data, bounds=bounds,
                          rhs=build_domain_rhs(None, bounds, 1), resolution=8, problem_id="two_phase")


class TestReferenceMesh:
    def test_aligned_and_refined(self, unit_problem):
        assert unit_problem.study_space().axes[0].elements == 13
        assert unit_problem.reference_space(0.5).axes[0].elements == 128

    def test_misaligned_eps_rejected(self, unit_problem):
        with pytest.raises(ResolutionError):
            unit_problem.reference_space(0.3)


class TestConstantCoefficient:
    def test_oscillating_and_effective_solutions_coincide(self, unit_problem):
        row = measure_neumann(unit_problem, 0.5, -2.0)
        assert row["study"] == "neumann"
        assert row["e_L2"] < 1e-10
        assert row["e_Hp_plain"] < 1e-8
        assert row["e_Hp"] < 1e-8
        assert row["corrector_Hp"] == 0.0
        assert row["dofs"] == 257
        assert row["residual_eps"] < 1e-10

    def test_resolvent_bounds_hold(self, unit_problem):
        disc = discretize(unit_problem, 0.5)
        u = solve_with_load(disc.stiffness_eff, disc.mass, -1.0, disc.load).coeffs
        F_norm = disc.tables.l2_norm(unit_problem.rhs(disc.tables.points))
        report = resolvent_norm_bounds(disc.tables, u, F_norm, -1.0, 1.0, 1.0, 1.0)
        assert report["ok"]
        assert report["Hp_bound"] == pytest.approx(np.sqrt(3.0) * F_norm)

    def test_positive_shift_below_first_eigenvalue(self, unit_problem):
        result = b_resolvent_study(unit_problem, 0.45, [0.5, 0.25])
        assert result.study == "b_resolvent_B"
        assert [row["eps"] for row in result.rows] == [0.5, 0.25]
        for row in result.rows:
            assert row["c_flat"] == pytest.approx(0.9, rel=1e-3)
            assert row["rho_flat"] > 1.0
            assert row["e_L2"] < 1e-10
        assert result.extras["kernel_identity"] < 1e-8

    def test_unknown_variant_and_zero_shift(self, unit_problem):
        with pytest.raises(DomainError):
            b_resolvent_study(unit_problem, 0.45, [0.5], variant="C")
        with pytest.raises(DomainError):
            b_resolvent_study(unit_problem, 0.0, [0.5])

    def test_small_shift_needs_unit_modulus(self, unit_problem):
        with pytest.raises(DomainError):
            small_shift_study(unit_problem, 0.5, [-0.5, -2.0])

    def test_rho_sweep_without_error_is_degenerate(self, unit_problem):
        result = rho_sweep(unit_problem, 0.125, [0.2, 0.1, 0.05])
        assert result.extras["status"] == FIT_DEGENERATE
        assert np.isnan(result.extras["measured_growth"]).all()
        assert result.extras["predicted_growth"][0] == pytest.approx(1.0)
        monotone, factor = evaluate_rho_sweep(result, config.ACCEPTANCE_THRESHOLDS)
        assert monotone["status"] == config.STUDY_STATUS["FAILED"]
        assert factor["status"] == config.STUDY_STATUS["PASSED"]

    def test_error_study_records_at_noise_floor(self, unit_problem):
        result = neumann_error_study(unit_problem, [0.5, 0.25, 0.125], zeta=-2.0)
        assert result.records["e_L2"].status == FIT_DEGENERATE
        assert result.extras["case"] == unit_problem.data.case


def test_standard_corrector_gate(smooth_data_2d, smooth_g_2d, gradient_2d):
    space = GalerkinSpace.rectangle([(0.0, 1.0), (0.0, 1.0)], [2, 2])
    tables = BasisTables(space, space.quadrature())
    with pytest.raises(GateError):
        corrector_KN0(smooth_data_2d, smooth_g_2d, gradient_2d, 0.5, np.zeros(space.dof_count), tables)


def test_derivative_tables():
    space = GalerkinSpace.interval(0.0, 1.0, 4, 1)
    tables = BasisTables(space, space.quadrature())
    ones = solution_derivatives(tables, np.ones(space.dof_count))
    assert sorted(ones) == [(0,), (1,)]
    assert hp_norm(tables, ones) == pytest.approx(1.0)
    assert hp_norm(tables, table_difference(ones, ones)) == 0.0


class TestTwoPhase:
    def test_row_on_coarse_eps(self, two_phase_problem):
        row = measure_neumann(two_phase_problem, 0.125, -1.0)
        assert row["e_Hp"] < row["e_Hp_plain"]
        assert np.isfinite(row["e_Hp_std"])
        assert row["corrector_Hp"] > 0.0

    @pytest.mark.slow
    def test_rates(self, two_phase_problem):
        result = neumann_error_study(two_phase_problem, [0.125, 0.0625, 0.03125], zeta=-1.0)
        assert 0.7 <= result.records["e_L2"].slope <= 1.5
        assert result.records["e_Hp"].slope > 0.3
        finest = result.rows[-1]
        assert finest["e_Hp"] < finest["e_Hp_plain"]

    @pytest.mark.slow
    def test_rho_sweep_prediction_grows(self, two_phase_problem):
        result = rho_sweep(two_phase_problem, 0.125)
        predicted = result.extras["predicted_growth"]
        assert predicted[0] == pytest.approx(1.0)
        assert all(later > earlier for earlier, later in zip(predicted, predicted[1:]))
        assert all(np.isfinite(result.extras["measured_growth"]))
        assert [row["delta"] for row in result.rows] == [0.2, 0.1, 0.05]
