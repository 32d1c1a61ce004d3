"""Tests for the cell problem, the effective matrix and the flux potentials"""
from dataclasses import replace

import numpy as np
import pytest

import config
from cell.effective import (
    CASE_BAR,
    CASE_GENERIC,
    CASE_UNDER,
    detect_special_case,
    flux_at_points,
    lambda_bound_check,
    multiplier_condition,
    voigt_reuss_check,
    voigt_reuss_gaps,
)
from cell.potentials import flux_potentials
from cell.solver import homogenize, resample_coefficient, solve_cell_problem
from core.symbol import gradient_symbol, power_symbol
from errors import ShapeError, SolverError
from harness.checks import voigt_reuss_suite
from harness.expressions import build_coefficient
from torus.coefficient import CoefficientG
from torus.field import PeriodicField
from torus.lattice import Lattice


class TestOneDimensional:
    def test_two_phase_gives_harmonic_mean(self, two_phase_data):
        assert two_phase_data.g0[0, 0].real == pytest.approx(1.6, rel=1e-8)
        assert two_phase_data.g_bar[0, 0].real == pytest.approx(2.5)
        assert two_phase_data.g_under[0, 0].real == pytest.approx(1.6)
        assert two_phase_data.case == CASE_UNDER

    def test_higher_order_symbol_has_same_mean(self, two_phase_data_p2):
        assert two_phase_data_p2.g0[0, 0].real == pytest.approx(1.6, rel=1e-8)

    def test_smooth_reciprocal_coefficient(self, gradient_1d):
        spec = {"type": "reciprocal_trig_polynomial", "mean": 2.0,
                "modes": [{"wave": [1], "amplitude": 1.0, "kind": "sin"}]}
        g = build_coefficient(spec, [2 * np.pi], 64, 1)
        data, _ = homogenize(g, gradient_1d)
        assert data.g0[0, 0].real == pytest.approx(0.5, rel=1e-8)

    def test_flux_at_points_in_each_phase(self, two_phase_data, two_phase_g):
        flux = flux_at_points(two_phase_data, two_phase_g, np.array([[0.25], [0.75]]))
        np.testing.assert_allclose(flux[:, 0, 0].real, [0.6, -0.6], atol=1e-8)


class TestConstantCoefficient:
    def test_corrector_vanishes(self, unit_lattice_2d, gradient_2d):
        g = CoefficientG(PeriodicField.constant(unit_lattice_2d, (8, 8), [[2.0, 0.5], [0.5, 1.0]]))
        data, _ = homogenize(g, gradient_2d)
        assert np.abs(data.Lambda.values).max() < 1e-12
        np.testing.assert_allclose(data.g0, [[2.0, 0.5], [0.5, 1.0]], atol=1e-12)
        assert data.case == CASE_BAR


class TestLaminate:
    def test_divergence_free_columns_give_arithmetic_mean(self, gradient_2d):
        spec = {
            "type": "laminate",
            "a": {"mean": 2.0, "modes": [{"wave": [1], "amplitude": 1.0, "kind": "cos"}]},
            "b": {"mean": 3.0, "modes": [{"wave": [1], "amplitude": 1.0, "kind": "sin"}]},
        }
        g = build_coefficient(spec, [1.0, 1.0], 16, 2)
        data, _ = homogenize(g, gradient_2d)
        assert data.case == CASE_BAR
        np.testing.assert_allclose(data.g0, np.diag([2.0, 3.0]), atol=1e-10)

    def test_bar_case_requires_vanishing_corrector(self, gradient_2d):
        spec = {
            "type": "laminate",
            "a": {"mean": 2.0, "modes": [{"wave": [1], "amplitude": 1.0, "kind": "cos"}]},
            "b": {"mean": 3.0, "modes": [{"wave": [1], "amplitude": 1.0, "kind": "sin"}]},
        }
        g = build_coefficient(spec, [1.0, 1.0], 16, 2)
        data, g = homogenize(g, gradient_2d)
        assert data.case == CASE_BAR
        lattice = data.Lambda.lattice
        stray = PeriodicField.from_function(
            lattice, data.Lambda.grid_shape,
            lambda points: np.broadcast_to(np.cos(2 * np.pi * points[:, :1])[:, :, None], (len(points), 1, 2)))
        with pytest.raises(SolverError, match="corrector"):
            detect_special_case(replace(data, Lambda=stray), gradient_2d, g)


class TestGenericTwoDimensional:
    def test_case_and_hermitian_matrix(self, smooth_data_2d):
        assert smooth_data_2d.case == CASE_GENERIC
        np.testing.assert_allclose(smooth_data_2d.g0, np.conj(smooth_data_2d.g0.T), atol=1e-14)
        assert smooth_data_2d.skew <= config.SOLVER_SETTINGS["skew_tol"]

    def test_residual_within_tolerance(self, smooth_data_2d):
        assert smooth_data_2d.residual <= 10 * config.SOLVER_SETTINGS["cg_tol"]
        assert len(smooth_data_2d.iterations) == 2

    def test_energy_is_monotone(self, smooth_data_2d):
        for history in smooth_data_2d.energy_history:
            steps = np.diff(history)
            scale = max(abs(h) for h in history)
            assert np.all(steps <= 1e-12 * scale)

    def test_voigt_reuss_bracketing(self, smooth_data_2d):
        assert voigt_reuss_check(smooth_data_2d)
        upper, lower = voigt_reuss_gaps(smooth_data_2d)
        assert upper > 0
        assert lower > 0

    def test_corrector_bounds(self, smooth_data_2d, smooth_g_2d, gradient_2d):
        report = lambda_bound_check(smooth_data_2d, smooth_g_2d, gradient_2d)
        assert report["bD_lambda_ratio"] <= 1.0
        assert report["lambda_Hp_ratio"] <= 1.0

    def test_corrector_has_zero_mean(self, smooth_data_2d):
        assert np.abs(smooth_data_2d.Lambda.mean()).max() < 1e-14

    def test_flux_potentials(self, smooth_data_2d, gradient_2d):
        potentials = flux_potentials(smooth_data_2d, gradient_2d)
        assert potentials.residual_repr <= 1e-9
        assert potentials.antisymmetry_defect() == 0.0
        assert len(potentials.M) == 4

    def test_threads_do_not_change_result(self, smooth_g_2d, gradient_2d, smooth_data_2d):
        threaded, _ = homogenize(smooth_g_2d, gradient_2d, threads=2)
        np.testing.assert_allclose(threaded.g0, smooth_data_2d.g0, atol=1e-10)

    def test_summary_is_plain_data(self, smooth_data_2d):
        summary = smooth_data_2d.summary()
        assert summary["case"] == CASE_GENERIC
        assert summary["grid"] == [32, 32]
        assert len(summary["g0"]) == 2


class TestValidation:
    def test_symbol_and_coefficient_sizes_must_agree(self, two_phase_g, gradient_2d):
        with pytest.raises(ShapeError):
            solve_cell_problem(two_phase_g, gradient_2d)

    def test_odd_grid_rejected(self, two_phase_g):
        with pytest.raises(ShapeError):
            resample_coefficient(two_phase_g, 33)

    def test_sampled_coefficient_cannot_change_grid(self):
        g = CoefficientG(PeriodicField.constant(Lattice.rectangular([1.0]), (8,), [[1.0]]))
        with pytest.raises(ShapeError):
            resample_coefficient(g, 16)

    @pytest.mark.parametrize("p, d, case, expected", [
        (1, 1, CASE_GENERIC, True),
        (1, 2, CASE_GENERIC, False),
        (1, 2, CASE_UNDER, True),
        (2, 3, CASE_GENERIC, True),
    ])
    def test_multiplier_condition(self, p, d, case, expected):
        assert multiplier_condition(p, d, case) is expected


def test_power_symbol_on_constant_coefficient_is_trivial():
    g = CoefficientG(PeriodicField.constant(Lattice.rectangular([1.0]), (16,), [[3.0]]))
    data, _ = homogenize(g, power_symbol(2).with_ellipticity())
    assert data.g0[0, 0].real == pytest.approx(3.0)
    assert data.iterations == [0]


def test_gradient_symbol_unchanged_by_resampling(two_phase_g):
    coarse = resample_coefficient(two_phase_g, 64)
    assert coarse.field.grid_shape == (64,)
    data, _ = homogenize(coarse, gradient_symbol(1).with_ellipticity())
    assert data.g0[0, 0].real == pytest.approx(1.6, rel=1e-8)


@pytest.mark.slow
def test_bracketing_over_seeded_random_coefficients(gradient_2d):
    def builder(seed):
        g = build_coefficient({"type": "random_trig", "band": 1, "contrast": 0.9}, [1.0, 1.0], 16, 2, seed=seed)
        data, g = homogenize(g, gradient_2d)
        return g, data

    passed, errors = voigt_reuss_suite(builder, count=100)
    assert passed, errors
