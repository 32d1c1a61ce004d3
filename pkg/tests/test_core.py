"""Tests for multi-indices, symbols and shifts"""
import numpy as np
import pytest

from core.multiindex import MultiIndex, multi_indices, multi_indices_up_to, sub_indices
from core.shift import c_of_phi, flat_resolvent_weight, rho_flat, shift_from_zeta
from core.symbol import (
    Symbol,
    complex_rank_check,
    gradient_symbol,
    hessian_symbol,
    power_symbol,
    symbol_ellipticity,
    symbol_eval,
    symbol_from_terms,
)
from errors import DomainError, ShapeError


class TestMultiIndex:
    def test_order_and_partial_order(self):
        alpha = MultiIndex((2, 1))
        assert alpha.order == 3
        assert MultiIndex((1, 1)) <= alpha
        assert not MultiIndex((0, 2)) <= alpha

    def test_negative_entries_rejected(self):
        with pytest.raises(ValueError):
            MultiIndex((1, -1))

    def test_binomial_is_product_of_coordinate_binomials(self):
        assert MultiIndex((3, 2)).binomial(MultiIndex((1, 1))) == 3 * 2

    def test_enumeration(self):
        assert [a.entries for a in multi_indices(2, 2)] == [(2, 0), (1, 1), (0, 2)]
        assert len(multi_indices_up_to(2, 2)) == 6
        assert len(list(sub_indices(MultiIndex((2, 1))))) == 6

    def test_monomial(self):
        xi = np.array([[2.0, 3.0]])
        np.testing.assert_allclose(MultiIndex((2, 1)).monomial(xi), [12.0])


class TestSymbol:
    def test_gradient_is_isotropic(self):
        alpha0, alpha1, rank_ok = symbol_ellipticity(gradient_symbol(2))
        assert rank_ok
        assert alpha0 == pytest.approx(1.0)
        assert alpha1 == pytest.approx(1.0)

    def test_hessian_gram_is_fourth_power_of_norm(self):
        alpha0, alpha1, _ = symbol_ellipticity(hessian_symbol())
        assert alpha0 == pytest.approx(1.0)
        assert alpha1 == pytest.approx(1.0)

    def test_power_symbol_values(self):
        values = symbol_eval(power_symbol(3), np.array([[2.0]]))
        np.testing.assert_allclose(values[0], [[8.0]])

    def test_wrong_order_term_rejected(self):
        with pytest.raises(ShapeError):
            symbol_from_terms(2, 1, [((1,), [[1.0]])])

    def test_more_columns_than_rows_rejected(self):
        with pytest.raises(ShapeError):
            Symbol(1, 1, 1, 2, (((1,), np.ones((1, 2))),))

    def test_scaled_symbol(self):
        b = gradient_symbol(1).scaled(2.0)
        np.testing.assert_allclose(b.coefficient((1,)), [[2.0]])

    def test_to_dict_lists_terms(self):
        data = hessian_symbol().to_dict()
        assert data["order"] == 2
        assert [term["alpha"] for term in data["terms"]] == [[2, 0], [1, 1], [0, 2]]

    def test_complex_rank_holds_for_gradient(self):
        assert complex_rank_check(gradient_symbol(2), trials=8)

    def test_complex_rank_fails_for_scalar_laplacian(self):
        laplacian = symbol_from_terms(2, 2, [((2, 0), [[1.0]]), ((0, 2), [[1.0]])])
        _, _, rank_ok = symbol_ellipticity(laplacian)
        assert rank_ok
        assert not complex_rank_check(laplacian, trials=16)


class TestShift:
    @pytest.mark.parametrize("phi, expected", [(np.pi, 1.0), (np.pi / 2, 1.0), (np.pi / 4, np.sqrt(2.0)),
                                               (7 * np.pi / 4, np.sqrt(2.0))])
    def test_sector_weight(self, phi, expected):
        assert c_of_phi(phi) == pytest.approx(expected)

    def test_sector_weight_domain(self):
        with pytest.raises(DomainError):
            c_of_phi(0.0)

    def test_shift_on_half_line_rejected(self):
        with pytest.raises(DomainError):
            shift_from_zeta(1.0)
        with pytest.raises(DomainError):
            shift_from_zeta(0.0)

    def test_negative_shift(self):
        shift = shift_from_zeta(-4.0)
        assert shift.phi == pytest.approx(np.pi)
        assert shift.c_phi == 1.0
        assert shift.modulus == 4.0

    def test_rho_flat_near_and_far(self):
        assert rho_flat(0.5, 1.0) == pytest.approx(4.0)
        assert rho_flat(-5.0, 1.0) == pytest.approx(1.0)

    def test_rho_flat_on_cut_rejected(self):
        with pytest.raises(DomainError):
            rho_flat(2.0, 1.0)
        with pytest.raises(DomainError):
            rho_flat(-1.0, 0.0)

    @pytest.mark.parametrize("zeta", [-1.0, 0.5, 0.9 + 0.01j, 1.0 + 1j, -2.0 + 2.0j])
    def test_flat_resolvent_weight_bound(self, zeta):
        c_flat = 1.0
        weight = flat_resolvent_weight(zeta, c_flat)
        assert weight <= (c_flat + 2.0) * np.sqrt(rho_flat(zeta, c_flat)) * (1 + 1e-9)

    def test_flat_resolvent_weight_at_minus_one(self):
        assert flat_resolvent_weight(-1.0, 1.0) == pytest.approx(1.0)
