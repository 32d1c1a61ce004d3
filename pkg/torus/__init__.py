"""
Lattices, periodic fields and Fourier-multiplier actions on the torus
"""
from .lattice import Lattice
from .field import PeriodicField
from .coefficient import CoefficientG
from .operators import (
    apply_bD,
    apply_bD_adjoint,
    apply_derivative,
    steklov_multiplier,
    apply_steklov,
    rescale_to_eps,
    norms,
    multiindex_norm,
    multiply,
    evaluate,
    steklov_product_bound_check,
    trigonometric_field,
    resample_field,
)

__all__ = [
    "Lattice",
    "PeriodicField",
    "CoefficientG",
    "apply_bD",
    "apply_bD_adjoint",
    "apply_derivative",
    "steklov_multiplier",
    "apply_steklov",
    "rescale_to_eps",
    "norms",
    "multiindex_norm",
    "multiply",
    "evaluate",
    "steklov_product_bound_check",
    "trigonometric_field",
    "resample_field",
]
