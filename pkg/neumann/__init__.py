"""
Bounded-domain Neumann problems: Galerkin spaces, assembly, kernel of b(D),
Garding constants, extension, correctors and the rate studies
"""
from .space import AxisBasis, GalerkinSpace, QuadratureRule, default_degree
from .assembly import (
    BasisTables,
    assemble,
    load_vector,
    mass_matrix,
    panels_for,
    sobolev_gram,
    stiffness_matrix,
    under_resolved,
)
from .kernel import KernelZ, kernel_Z, kernel_hp_residuals, smallest_eigenpairs, subspace_angle
from .garding import (
    GardingPencil,
    c_flat_lower_bound,
    estimate_garding,
    garding_k1,
    garding_scan,
    regularity_constant,
)
from .extension import ExtensionOperator, TrigProbe, reflection_weights, smoothstep
from .solver import NeumannSolution, factorize, solve_neumann, solve_with_load
from .correctors import corrector_KN, corrector_KN0, hp_norm, solution_derivatives, table_difference
from .spectral_shift import SpectralShiftData, kernel_identity_defect, spectral_shift
from .studies import (
    VARIANT_A,
    VARIANT_B,
    Discretization,
    NeumannProblem,
    b_resolvent_study,
    check_reference,
    discretize,
    measure_neumann,
    neumann_error_study,
    resolvent_norm_bounds,
    rho_sweep,
    shift_data,
    small_shift_study,
)

__all__ = [
    "AxisBasis",
    "GalerkinSpace",
    "QuadratureRule",
    "default_degree",
    "BasisTables",
    "assemble",
    "load_vector",
    "mass_matrix",
    "panels_for",
    "sobolev_gram",
    "stiffness_matrix",
    "under_resolved",
    "KernelZ",
    "kernel_Z",
    "kernel_hp_residuals",
    "smallest_eigenpairs",
    "subspace_angle",
    "GardingPencil",
    "c_flat_lower_bound",
    "estimate_garding",
    "garding_k1",
    "garding_scan",
    "regularity_constant",
    "ExtensionOperator",
    "TrigProbe",
    "reflection_weights",
    "smoothstep",
    "NeumannSolution",
    "factorize",
    "solve_neumann",
    "solve_with_load",
    "corrector_KN",
    "corrector_KN0",
    "hp_norm",
    "solution_derivatives",
    "table_difference",
    "SpectralShiftData",
    "kernel_identity_defect",
    "spectral_shift",
    "VARIANT_A",
    "VARIANT_B",
    "Discretization",
    "NeumannProblem",
    "b_resolvent_study",
    "check_reference",
    "discretize",
    "measure_neumann",
    "neumann_error_study",
    "resolvent_norm_bounds",
    "rho_sweep",
    "shift_data",
    "small_shift_study",
]
