"""Tests for lattices, periodic fields and Fourier-multiplier operators"""
import numpy as np
import pytest

from core.symbol import gradient_symbol
from errors import DomainError, ShapeError
from torus.coefficient import CoefficientG
from torus.field import PeriodicField
from torus.lattice import Lattice
from torus.operators import (
    apply_bD,
    apply_bD_adjoint,
    apply_derivative,
    apply_steklov,
    eps_to_k,
    evaluate,
    multiply,
    norms,
    rescale_to_eps,
    resample_field,
    steklov_multiplier,
    steklov_product_bound_check,
    trigonometric_field,
    zero_mode_projection,
)


def cosine(lattice, grid, k=1):
    return trigonometric_field(lattice, grid, [{"wave": [k] + [0] * (lattice.d - 1), "kind": "cos"}])


def inner(u, v):
    return np.sum(np.conj(u.coeffs) * v.coeffs) * u.lattice.cell_volume


class TestLattice:
    def test_rectangular_constants(self):
        lattice = Lattice.rectangular([2.0, 3.0])
        np.testing.assert_allclose(lattice.dual_basis, np.diag([np.pi, 2 * np.pi / 3]))
        assert lattice.cell_volume == pytest.approx(6.0)
        assert lattice.r0 == pytest.approx(np.pi / 3)
        assert lattice.r1 == pytest.approx(0.5 * np.sqrt(13.0))

    def test_degenerate_basis_rejected(self):
        with pytest.raises(ShapeError):
            Lattice(np.array([[1.0, 2.0], [2.0, 4.0]]))

    def test_nonpositive_length_rejected(self):
        with pytest.raises(ShapeError):
            Lattice.rectangular([1.0, 0.0])


class TestPeriodicField:
    def test_cosine_coefficients(self, unit_lattice_1d):
        u = cosine(unit_lattice_1d, (8,))
        coeffs = u.coeffs[:, 0, 0]
        assert coeffs[1] == pytest.approx(0.5)
        assert coeffs[-1] == pytest.approx(0.5)
        assert np.abs(np.delete(coeffs, [1, 7])).max() < 1e-14

    def test_hermitian_flag_is_checked(self, unit_lattice_1d):
        values = np.zeros((4, 2, 2), dtype=complex)
        values[:, 0, 1] = 1.0
        with pytest.raises(ShapeError):
            PeriodicField(unit_lattice_1d, values, hermitian=True)

    def test_zero_mean_flag_is_checked(self, unit_lattice_1d):
        with pytest.raises(ShapeError):
            PeriodicField(unit_lattice_1d, np.ones((4, 1, 1)), zero_mean=True)

    def test_grid_too_small(self, unit_lattice_1d):
        with pytest.raises(ShapeError):
            PeriodicField(unit_lattice_1d, np.ones((1, 1, 1)))

    def test_nyquist_mask_drops_negative_half(self, unit_lattice_1d):
        mask = PeriodicField.zeros(unit_lattice_1d, (8,), (1, 1)).nyquist_mask
        assert not mask[4]
        assert mask.sum() == 7

    def test_zero_mode_projection(self, unit_lattice_1d):
        u = cosine(unit_lattice_1d, (8,)) + 3.0
        projected = zero_mode_projection(u)
        assert abs(projected.mean()[0, 0]) < 1e-14
        np.testing.assert_allclose(projected.values, cosine(unit_lattice_1d, (8,)).values, atol=1e-13)


class TestOperators:
    def test_derivative_of_sine(self, unit_lattice_1d):
        u = trigonometric_field(unit_lattice_1d, (16,), [{"wave": [1], "kind": "sin"}])
        du = apply_derivative(u, (1,))
        expected = 2 * np.pi * cosine(unit_lattice_1d, (16,)).values
        np.testing.assert_allclose(du.values, expected, atol=1e-12)

    def test_gradient_symbol_of_sine(self, unit_lattice_2d):
        u = trigonometric_field(unit_lattice_2d, (8, 8), [{"wave": [1, 0], "kind": "sin"}])
        bu = apply_bD(gradient_symbol(2), u)
        assert bu.shape == (2, 1)
        # D = -i grad
        expected = -1j * 2 * np.pi * cosine(unit_lattice_2d, (8, 8)).values[..., 0, 0]
        np.testing.assert_allclose(bu.values[..., 0, 0], expected, atol=1e-12)
        np.testing.assert_allclose(bu.values[..., 1, 0], 0.0, atol=1e-12)

    def test_adjoint_identity(self, unit_lattice_2d, rng):
        b = gradient_symbol(2)
        u = PeriodicField(unit_lattice_2d, rng.standard_normal((8, 8, 1, 1)))
        v = PeriodicField(unit_lattice_2d, rng.standard_normal((8, 8, 2, 1)))
        left = inner(apply_bD(b, u), v)
        right = inner(u, apply_bD_adjoint(b, v))
        assert left == pytest.approx(right, rel=1e-12)

    def test_row_mismatch(self, unit_lattice_2d):
        with pytest.raises(ShapeError):
            apply_bD(gradient_symbol(2), PeriodicField.zeros(unit_lattice_2d, (4, 4), (2, 1)))

    def test_steklov_multiplier_values(self, unit_lattice_1d):
        assert steklov_multiplier(np.array([0.0]), 0.5, unit_lattice_1d) == pytest.approx(1.0)
        assert steklov_multiplier(np.array([2 * np.pi]), 0.5, unit_lattice_1d) == pytest.approx(2 / np.pi)
        assert abs(steklov_multiplier(np.array([2 * np.pi]), 1.0, unit_lattice_1d)) < 1e-15

    def test_steklov_of_cell_scale_wave_vanishes(self, unit_lattice_1d):
        smoothed = apply_steklov(cosine(unit_lattice_1d, (8,)), 1.0)
        assert np.abs(smoothed.values).max() < 1e-14

    def test_steklov_rejects_nonpositive_eps(self, unit_lattice_1d):
        with pytest.raises(DomainError):
            steklov_multiplier(np.array([1.0]), 0.0, unit_lattice_1d)

    def test_eps_to_k(self):
        assert eps_to_k(0.25) == 4
        with pytest.raises(DomainError):
            eps_to_k(0.3)
        with pytest.raises(DomainError):
            eps_to_k(-0.5)

    def test_rescale_tiles_values(self, unit_lattice_1d):
        f = cosine(unit_lattice_1d, (8,))
        fine = rescale_to_eps(f, 0.25)
        assert fine.grid_shape == (32,)
        np.testing.assert_allclose(fine.values, cosine(unit_lattice_1d, (32,), k=4).values, atol=1e-13)

    def test_norms(self):
        lattice = Lattice.rectangular([2.0])
        one = PeriodicField.constant(lattice, (8,), [[1.0]])
        assert norms(one) == pytest.approx(np.sqrt(2.0))
        unit = Lattice.rectangular([1.0])
        u = trigonometric_field(unit, (16,), [{"wave": [1], "kind": "sin"}])
        assert norms(u, 1) == pytest.approx(np.sqrt(0.5 * (1 + 4 * np.pi ** 2)))
        with pytest.raises(ValueError):
            norms(u, -1)

    def test_dealiased_product_drops_aliased_modes(self, unit_lattice_1d):
        u = cosine(unit_lattice_1d, (8,), k=3)
        aliased = multiply(u, u)
        clean = multiply(u, u, dealias=True)
        assert abs(aliased.coeffs[2, 0, 0]) == pytest.approx(0.25)
        np.testing.assert_allclose(clean.values, 0.5, atol=1e-13)

    def test_evaluate_between_nodes(self, unit_lattice_1d):
        u = cosine(unit_lattice_1d, (8,))
        values = evaluate(u, np.array([[0.1], [0.37]]))
        np.testing.assert_allclose(values[:, 0, 0], np.cos(2 * np.pi * np.array([0.1, 0.37])), atol=1e-13)

    def test_resample_keeps_low_modes(self, unit_lattice_1d):
        fine = resample_field(cosine(unit_lattice_1d, (8,)), (16,))
        np.testing.assert_allclose(fine.values, cosine(unit_lattice_1d, (16,)).values, atol=1e-13)

    def test_steklov_product_bound(self, unit_lattice_1d):
        f = cosine(unit_lattice_1d, (8,)) * 0.5 + 1.0
        u = cosine(unit_lattice_1d, (32,)) + 1.0
        measured, bound = steklov_product_bound_check(f, u, 0.25)
        assert measured <= bound * (1 + 1e-10)


class TestCoefficient:
    def test_constants_of_two_phase(self, two_phase_g):
        assert two_phase_g.g_inf == pytest.approx(4.0)
        assert two_phase_g.ginv_inf == pytest.approx(1.0)
        assert two_phase_g.contrast == pytest.approx(4.0)
        assert two_phase_g.field.hermitian

    def test_indefinite_rejected(self, unit_lattice_1d):
        values = np.ones((4, 1, 1))
        values[2] = -1.0
        with pytest.raises(DomainError):
            CoefficientG(PeriodicField(unit_lattice_1d, values))

    def test_evaluate_uses_closed_form(self, two_phase_g):
        values = two_phase_g.evaluate(np.array([[0.25], [0.75]]))
        np.testing.assert_allclose(values[:, 0, 0], [1.0, 4.0])

    def test_inverse_field(self, two_phase_g):
        product = two_phase_g.field.values @ two_phase_g.inverse_field().values
        np.testing.assert_allclose(product, 1.0, atol=1e-14)
