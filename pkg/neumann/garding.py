"""
Garding Module
Discrete constants of ||u||^2_{H^p} <= k1 ||b(D)u||^2 + k2 ||u||^2 and the
lower bound for the first nonzero Neumann eigenvalue
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as la

import config
from core.symbol import Symbol
from errors import SolverError
from .assembly import BasisTables, mass_matrix, sobolev_gram, stiffness_matrix
from .kernel import KernelZ, kernel_Z
from .space import GalerkinSpace

logger = logging.getLogger(__name__)

BISECTION_STEPS = 80
DOUBLINGS = 60


def _dense(matrix) -> np.ndarray:
    dense = matrix.toarray()
    return dense.real if not np.any(dense.imag) else dense


class GardingPencil:
    """Dense H^p Gram, b-stiffness (g = 1) and mass of a coarse space"""

    def __init__(self, space: GalerkinSpace, b: Symbol, tables: Optional[BasisTables] = None):
        tables = tables or BasisTables(space, space.quadrature())
        self.space = space
        self.b = b
        self.tables = tables
        self.G = _dense(sobolev_gram(tables))
        self.S = _dense(stiffness_matrix(tables, np.eye(b.m), b))
        self.M = _dense(mass_matrix(tables))
        self.scale = float(la.eigh(self.G, self.M, eigvals_only=True, subset_by_index=[len(self.M) - 1] * 2)[0])

    def lowest(self, t: float, k2: float) -> float:
        """lambda_min(t S + k2 M - G, M)"""
        pencil = t * self.S + k2 * self.M - self.G
        return float(la.eigh(pencil, self.M, eigvals_only=True, subset_by_index=[0, 0])[0])

    def feasible(self, t: float, k2: float, tol: float) -> bool:
        return self.lowest(t, k2) >= -tol * self.scale

    def satisfied_by(self, coeffs: np.ndarray, k1: float, k2: float, slack: float = 1e-8) -> bool:
        """Direct comparison of the quadratic forms on one coefficient vector"""
        def form(matrix):
            return float(np.real(np.vdot(coeffs, matrix @ coeffs)))

        return form(self.G) <= (1.0 + slack) * (k1 * form(self.S) + k2 * form(self.M))


def kernel_floor(pencil: GardingPencil, kernel: KernelZ) -> float:
    """Smallest admissible k2: the largest H^p Rayleigh quotient on Z"""
    if kernel.q == 0:
        return 0.0
    Z = kernel.basis
    restricted = Z.conj().T @ pencil.G @ Z
    return float(np.linalg.eigvalsh((restricted + restricted.conj().T) / 2.0).max())


def minimal_k1(pencil: GardingPencil, k2: float, tol: float = 1e-10) -> Optional[float]:
    """Bisection on t for the smallest feasible t S + k2 M - G >= 0; None when unbounded"""
    if pencil.feasible(0.0, k2, tol):
        return 0.0
    high = 1.0
    for _ in range(DOUBLINGS):
        if pencil.feasible(high, k2, tol):
            break
        high *= 2.0
    else:
        return None
    low = 0.0
    for _ in range(BISECTION_STEPS):
        middle = 0.5 * (low + high)
        if pencil.feasible(middle, k2, tol):
            high = middle
        else:
            low = middle
        if high - low <= 1e-12 * high:
            break
    return high


def garding_k1(space: GalerkinSpace, b: Symbol, k2: float, tables: Optional[BasisTables] = None,
               tol: float = 1e-10) -> float:
    """
    Minimal k1 at a fixed k2

    Raises:
        SolverError: No finite k1 exists for this k2
    """
    k1 = minimal_k1(GardingPencil(space, b, tables), k2, tol)
    if k1 is None:
        raise SolverError(f"no finite k1 for k2={k2}")
    return k1


def garding_scan(pencil: GardingPencil, kernel: KernelZ, scan: Optional[int] = None,
                 tol: float = 1e-10) -> List[Tuple[float, float]]:
    """Feasible (k1, k2) pairs on a k2 grid starting at the kernel floor"""
    scan = scan or config.STUDY_DEFAULTS["garding_scan"]
    floor = kernel_floor(pencil, kernel)
    offsets = np.concatenate([[0.0], np.logspace(-3, 1, scan - 1)])
    pairs = []
    for k2 in floor + (1.0 + floor) * offsets:
        k1 = minimal_k1(pencil, float(k2), tol)
        if k1 is not None:
            pairs.append((k1, float(k2)))
    return pairs


def estimate_garding(space: GalerkinSpace, b: Symbol, scan: Optional[int] = None,
                     tables: Optional[BasisTables] = None, tol: float = 1e-10) -> Tuple[float, float]:
    """
    Pareto-minimal (k1, k2) for H^p-Gram <= k1 (b-stiffness, g = 1) + k2 mass

    Dense generalized eigenproblems; pass a coarse space.

    Args:
        space: Galerkin space
        b: Symbol
        scan: Number of k2 grid points
        tables: Basis tables of the space
        tol: Relative slack on the smallest pencil eigenvalue

    Returns:
        Tuple of (k1, k2) minimizing k1 + k2 over the scan

    Raises:
        SolverError: No finite k1 on the whole scan
    """
    pencil = GardingPencil(space, b, tables)
    kernel = kernel_Z(space, b, tables=pencil.tables)
    pairs = garding_scan(pencil, kernel, scan, tol)
    if not pairs:
        raise SolverError("coercivity fails on the discrete space: no finite k1 on the k2 scan")
    k1, k2 = min(pairs, key=lambda pair: pair[0] + pair[1])
    logger.info(f"Garding constants: k1={k1:.6g}, k2={k2:.6g} ({len(pairs)} feasible scan points)")
    return k1, k2


def regularity_constant(k1: float, k2: float, ginv_inf: float) -> float:
    """C0 with C0^2 = 2 k1 |g^{-1}| + k2"""
    return float(np.sqrt(2.0 * k1 * ginv_inf + k2))


def c_flat_lower_bound(space: GalerkinSpace, b: Symbol, g_inv_norm: float, kernel: Optional[KernelZ] = None,
                       tables: Optional[BasisTables] = None) -> float:
    """
    |g^{-1}|^{-1} / k1~ with k1~ = sup over u orthogonal to Z of ||u||^2_{H^p} / ||b(D)u||^2

    Returns:
        Lower bound for the first nonzero eigenvalue of every Neumann operator with this b
    """
    pencil = GardingPencil(space, b, tables)
    kernel = kernel or kernel_Z(space, b, tables=pencil.tables)
    if kernel.q:
        complement = la.null_space(kernel.basis.conj().T @ pencil.M)
    else:
        complement = np.eye(len(pencil.M))
    G = complement.conj().T @ pencil.G @ complement
    S = complement.conj().T @ pencil.S @ complement
    k1_tilde = float(la.eigh((G + G.conj().T) / 2.0, (S + S.conj().T) / 2.0, eigvals_only=True)[-1])
    bound = 1.0 / (g_inv_norm * k1_tilde)
    logger.info(f"k1~={k1_tilde:.6g}, lower bound for the first nonzero eigenvalue {bound:.6g}")
    return bound
