"""Tests for torus resolvents, correctors and the whole-space studies"""
import numpy as np
import pytest

from cell.solver import homogenize
from errors import DomainError, ResolutionError, ShapeError
from harness.expressions import build_coefficient, build_torus_rhs
from harness.rates import FIT_DEGENERATE
from tests.conftest import TWO_PHASE
from torus.coefficient import CoefficientG
from torus.field import PeriodicField
from torus.operators import norms
from wholespace.corrector import corrected_errors, corrector_K, flux_errors
from wholespace.resolvent import dense_oscillatory_solve, solve_effective, solve_oscillatory
from wholespace.studies import (
    data_grid,
    measure_at_eps,
    resolvent_difference_norm,
    unit_rhs,
    wholespace_error_study,
    zeta_scaling_study,
)


@pytest.fixture(scope="module")
def coarse_problem(gradient_1d):
    g = build_coefficient(TWO_PHASE, [1.0], 16, 1)
    data, g = homogenize(g, gradient_1d)
    F = build_torus_rhs(None, [1.0], 16, 1)
    return g, gradient_1d, data, F


def rhs_on(g, eps, F):
    return unit_rhs(F, data_grid(g, eps))


class TestEffectiveResolvent:
    def test_single_mode_solution(self, coarse_problem):
        g, b, data, F = coarse_problem
        solution = solve_effective(data.g0, b, -1.0, F)
        factor = 1.0 / (1.6 * 4 * np.pi ** 2 + 1.0)
        np.testing.assert_allclose(solution.u.values, factor * F.values, atol=1e-12)
        assert solution.eps is None

    def test_shift_on_spectrum_rejected(self, coarse_problem):
        g, b, data, F = coarse_problem
        with pytest.raises(DomainError):
            solve_effective(data.g0, b, 2.0, F)

    def test_rhs_shape_checked(self, coarse_problem):
        g, b, data, F = coarse_problem
        with pytest.raises(ShapeError):
            solve_effective(data.g0, b, -1.0, PeriodicField.zeros(F.lattice, (16,), (2, 1)))


class TestOscillatoryResolvent:
    @pytest.mark.parametrize("zeta", [-1.0, -1.0 + 2.0j])
    def test_matches_dense_oracle(self, coarse_problem, zeta):
        g, b, data, F = coarse_problem
        F_eps = rhs_on(g, 0.5, F)
        iterative = solve_oscillatory(g, b, 0.5, zeta, F_eps, g0=data.g0)
        dense = dense_oscillatory_solve(g, b, 0.5, zeta, F_eps)
        assert norms(iterative.u - dense.u, 0) <= 1e-8 * norms(dense.u, 0)

    def test_constant_coefficient_has_no_oscillation(self, unit_lattice_1d, gradient_1d):
        g = CoefficientG(PeriodicField.constant(unit_lattice_1d, (8,), [[2.0]]))
        F = build_torus_rhs(None, [1.0], 32, 1)
        oscillating = solve_oscillatory(g, gradient_1d, 0.25, -1.0, F)
        effective = solve_effective(np.array([[2.0]]), gradient_1d, -1.0, F)
        np.testing.assert_allclose(oscillating.u.values, effective.u.values, atol=1e-9)

    def test_zero_rhs(self, coarse_problem):
        g, b, data, F = coarse_problem
        solution = solve_oscillatory(g, b, 0.5, -1.0, rhs_on(g, 0.5, F) * 0.0)
        assert solution.norms["L2"] == 0.0

    def test_grid_must_hold_rescaled_coefficient(self, coarse_problem):
        g, b, data, F = coarse_problem
        with pytest.raises(ResolutionError):
            solve_oscillatory(g, b, 0.25, -1.0, rhs_on(g, 0.5, F))


class TestCorrector:
    def test_smoothed_corrector_improves_on_plain_error(self, coarse_problem):
        g, b, data, F = coarse_problem
        F_eps = rhs_on(g, 0.125, F)
        u_eps = solve_oscillatory(g, b, 0.125, -1.0, F_eps, g0=data.g0)
        u0 = solve_effective(data.g0, b, -1.0, F_eps)
        errors = corrected_errors(data, b, 0.125, u_eps, u0)
        assert errors["e_Hp"] < errors["e_Hp_plain"]
        e_flux, e_flux_std = flux_errors(data, g, b, 0.125, u_eps, u0)
        assert e_flux > 0.0
        assert e_flux_std > 0.0

    def test_corrector_lives_on_data_grid(self, coarse_problem):
        g, b, data, F = coarse_problem
        u0 = solve_effective(data.g0, b, -1.0, rhs_on(g, 0.25, F))
        K = corrector_K(data, b, 0.25, u0)
        assert K.grid_shape == (64,)
        assert K.shape == (1, 1)


class TestStudies:
    def test_row_has_table_columns(self, coarse_problem):
        g, b, data, F = coarse_problem
        row = measure_at_eps(g, b, data, -1.0, F, 0.25, problem_id="coarse")
        assert row["study"] == "wholespace"
        assert row["zeta_re"] == -1.0
        assert np.isnan(row["e_L2_opnorm"])
        assert row["e_L2"] > 0.0

    def test_power_iteration_never_lowers_estimate(self, coarse_problem):
        g, b, data, F = coarse_problem
        probes_only = resolvent_difference_norm(g, b, data, 0.25, -1.0, probe_count=2, power_iterations=0)
        refined = resolvent_difference_norm(g, b, data, 0.25, -1.0, probe_count=2, power_iterations=3)
        assert probes_only > 0.0
        assert refined >= probes_only

    @pytest.mark.slow
    def test_first_order_rates(self, coarse_problem):
        g, b, data, F = coarse_problem
        result = wholespace_error_study(g, b, data, -1.0, F, [0.25, 0.125, 0.0625], problem_id="coarse")
        assert [row["eps"] for row in result.rows] == [0.25, 0.125, 0.0625]
        assert 0.8 <= result.records["e_L2"].slope <= 1.3
        assert result.records["e_Hp"].slope >= 0.7
        assert result.records["e_Hp_plain"].status != FIT_DEGENERATE

    @pytest.mark.slow
    def test_error_decays_along_negative_axis(self, coarse_problem):
        g, b, data, F = coarse_problem
        result = zeta_scaling_study(g, b, data, 0.25, [-1.0, -4.0, -16.0, -64.0], F)
        assert result.extras["expected_exponent"] == pytest.approx(-0.5)
        assert result.records["e_L2"].slope < 0.0
        assert [row["zeta_abs"] for row in result.rows] == [1.0, 4.0, 16.0, 64.0]


class TestResolventInvariants:
    def test_resolvent_identity(self, coarse_problem):
        g, b, data, F = coarse_problem
        zeta_1, zeta_2 = -1.0, -2.0 + 1.5j
        F_eps = rhs_on(g, 0.5, F)
        first = solve_oscillatory(g, b, 0.5, zeta_1, F_eps, g0=data.g0, tol=1e-12).u
        second = solve_oscillatory(g, b, 0.5, zeta_2, F_eps, g0=data.g0, tol=1e-12).u
        composed = solve_oscillatory(g, b, 0.5, zeta_1, second, g0=data.g0, tol=1e-12).u
        residual = norms(first - second - composed * (zeta_1 - zeta_2), 0)
        assert residual <= 1e-8 * norms(first, 0)

    def test_conjugate_shifts_give_equal_errors(self, coarse_problem):
        g, b, data, F = coarse_problem
        assert np.allclose(F.values.imag, 0.0)
        upper = measure_at_eps(g, b, data, -1.0 + 2.0j, F, 0.25)
        lower = measure_at_eps(g, b, data, -1.0 - 2.0j, F, 0.25)
        assert lower["zeta_im"] == -upper["zeta_im"]
        for name in ("e_L2", "e_Hp", "e_Hp_plain", "e_Hp_std", "e_flux"):
            assert lower[name] == pytest.approx(upper[name], rel=1e-10, abs=1e-14)

    @pytest.mark.slow
    def test_plain_error_does_not_vanish(self, coarse_problem):
        g, b, data, F = coarse_problem
        result = wholespace_error_study(g, b, data, -1.0, F, [0.25, 0.125, 0.0625, 0.03125, 0.015625])
        plain = [row["e_Hp_plain"] for row in result.rows]
        assert result.rows[-1]["eps"] == 0.015625
        assert min(plain) > 10.0 * result.rows[-1]["e_Hp"]
