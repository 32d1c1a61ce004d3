"""
Multi-index calculus, differential symbols and shift weights
"""
from .multiindex import MultiIndex, multi_indices, multi_indices_up_to
from .symbol import (
    Symbol,
    symbol_eval,
    symbol_ellipticity,
    complex_rank_check,
    gradient_symbol,
    power_symbol,
    hessian_symbol,
)
from .shift import Shift, c_of_phi, rho_flat, shift_from_zeta, flat_resolvent_weight

__all__ = [
    "MultiIndex",
    "multi_indices",
    "multi_indices_up_to",
    "Symbol",
    "symbol_eval",
    "symbol_ellipticity",
    "complex_rank_check",
    "gradient_symbol",
    "power_symbol",
    "hessian_symbol",
    "Shift",
    "c_of_phi",
    "rho_flat",
    "shift_from_zeta",
    "flat_resolvent_weight",
]
