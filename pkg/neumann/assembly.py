"""
Assembly Module
Quadrature-based stiffness, mass and H^p Gram matrices of the Neumann forms
"""
import logging
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

import config
from core.multiindex import multi_indices_up_to
from core.symbol import Symbol
from errors import ResolutionError, ShapeError
from torus.coefficient import CoefficientG
from .space import GalerkinSpace, QuadratureRule

logger = logging.getLogger(__name__)

Coefficient = Union[CoefficientG, np.ndarray]


def panels_for(space: GalerkinSpace, eps: Optional[float], cell_lengths: Optional[Sequence[float]]) -> int:
    """Panels per element so that every eps-period holds the configured number of panels"""
    if eps is None or cell_lengths is None:
        return 1
    per_period = config.STUDY_DEFAULTS["quadrature_panels_per_period"]
    needed = [per_period * axis.h / (eps * length) for axis, length in zip(space.axes, cell_lengths)]
    return max(1, int(np.ceil(max(needed) - 1e-9)))


def under_resolved(space: GalerkinSpace, rule: QuadratureRule, eps: float, cell_lengths: Sequence[float]) -> bool:
    """True when an eps-period is shorter than four quadrature subcells"""
    subcell = max(axis.h / rule.panels for axis in space.axes)
    return bool(eps * min(cell_lengths) < 4.0 * subcell)


class BasisTables:
    """Basis derivative matrices of a space at one quadrature rule, built on demand"""

    def __init__(self, space: GalerkinSpace, rule: QuadratureRule):
        self.space = space
        self.rule = rule
        self._scalar: Dict[Tuple[int, ...], sp.csr_matrix] = {}

    @property
    def weights(self) -> np.ndarray:
        return self.rule.weights

    @property
    def points(self) -> np.ndarray:
        return self.rule.points

    def scalar(self, beta: Sequence[int]) -> sp.csr_matrix:
        key = tuple(int(k) for k in beta)
        if key not in self._scalar:
            self._scalar[key] = self.space.basis_matrix(self.rule, key)
        return self._scalar[key]

    def vector(self, beta: Sequence[int]) -> sp.csr_matrix:
        """kron(I_n, Phi_beta): rows (component, point), columns (component, basis)"""
        return sp.kron(sp.identity(self.space.n, format="csr"), self.scalar(beta), format="csr")

    def b_matrix(self, b: Symbol) -> sp.csr_matrix:
        """b(D) from coefficients to values at the quadrature points, rows (row of b, point)"""
        if b.n != self.space.n or b.d != self.space.d:
            raise ShapeError(f"symbol ({b.m}x{b.n}, d={b.d}) does not act on this space (n={self.space.n}, d={self.space.d})")
        factor = (-1j) ** b.p
        total = None
        for alpha, matrix in b.terms:
            term = sp.kron(sp.csr_matrix(matrix * factor), self.scalar(alpha.entries), format="csr")
            total = term if total is None else total + term
        return total.tocsr()

    def values(self, coeffs: np.ndarray, beta: Sequence[int]) -> np.ndarray:
        """d^beta u at the quadrature points, (Q, n)"""
        columns = np.asarray(coeffs).reshape(self.space.n, self.space.scalar_size).T
        return self.scalar(beta) @ columns

    def b_values(self, b: Symbol, coeffs: np.ndarray) -> np.ndarray:
        """b(D) u at the quadrature points, (Q, m)"""
        return (self.b_matrix(b) @ coeffs).reshape(b.m, self.rule.size).T

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.tensordot(self.weights, values, axes=(0, 0)).sum())

    def l2_norm(self, values: np.ndarray) -> float:
        """L2 norm over the domain of values (Q, ...)"""
        squared = np.abs(values) ** 2
        squared = squared.reshape(len(self.weights), -1).sum(axis=1)
        return float(np.sqrt(max(np.dot(self.weights, squared), 0.0)))


def weighted_coefficient(tables: BasisTables, coefficient: Coefficient, eps: Optional[float]) -> sp.csr_matrix:
    """Block matrix of quadrature weights times g(x/eps) (or a constant matrix)"""
    w = tables.weights
    if isinstance(coefficient, CoefficientG):
        if eps is None:
            raise ShapeError("an oscillating coefficient needs eps")
        values = coefficient.evaluate(tables.points / eps)
        m = coefficient.m
        blocks = [[sp.diags(w * values[:, s, t]) for t in range(m)] for s in range(m)]
        return sp.bmat(blocks, format="csr")
    matrix = np.atleast_2d(np.asarray(coefficient, dtype=complex))
    return sp.kron(sp.csr_matrix(matrix), sp.diags(w), format="csr")


def _hermitian(matrix: sp.spmatrix) -> sp.csr_matrix:
    return ((matrix + matrix.getH()) * 0.5).tocsr()


def stiffness_matrix(tables: BasisTables, coefficient: Coefficient, b: Symbol,
                     eps: Optional[float] = None) -> sp.csr_matrix:
    B = tables.b_matrix(b)
    weighted = weighted_coefficient(tables, coefficient, eps)
    if weighted.shape[0] != B.shape[0]:
        raise ShapeError(f"coefficient of size {weighted.shape[0] // tables.rule.size} does not match m={b.m}")
    return _hermitian(B.getH() @ weighted @ B)


def mass_matrix(tables: BasisTables) -> sp.csr_matrix:
    phi = tables.scalar((0,) * tables.space.d)
    scalar = phi.T @ sp.diags(tables.weights) @ phi
    return _hermitian(sp.kron(sp.identity(tables.space.n), scalar, format="csr").astype(complex))


def sobolev_gram(tables: BasisTables) -> sp.csr_matrix:
    """Gram matrix of sum_{|beta| <= p} ||d^beta u||^2"""
    W = sp.diags(tables.weights)
    scalar = None
    for beta in multi_indices_up_to(tables.space.d, tables.space.p):
        phi = tables.scalar(beta.entries)
        term = phi.T @ W @ phi
        scalar = term if scalar is None else scalar + term
    return _hermitian(sp.kron(sp.identity(tables.space.n), scalar, format="csr").astype(complex))


def load_vector(tables: BasisTables, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """(u_j, F)_{L2} for every basis function, F given at points (Q, d) -> (Q, n)"""
    values = np.asarray(func(tables.points), dtype=complex).reshape(tables.rule.size, tables.space.n)
    phi = tables.scalar((0,) * tables.space.d)
    return np.concatenate([phi.T @ (tables.weights * values[:, r]) for r in range(tables.space.n)])


def assemble(space: GalerkinSpace, coefficient: Coefficient, b: Symbol, eps: Optional[float] = None,
             cell_lengths: Optional[Sequence[float]] = None,
             tables: Optional[BasisTables] = None) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """
    Stiffness and mass of the Neumann form a[u, u] = (g(x/eps) b(D)u, b(D)u)

    Args:
        space: Galerkin space
        coefficient: CoefficientG (oscillating, needs eps) or a constant m x m matrix
        b: Symbol
        eps: Period scale
        cell_lengths: Lengths of the coefficient cell (taken from the coefficient when omitted)
        tables: Precomputed basis tables; a rule matching eps is built when omitted

    Returns:
        Tuple of (stiffness, mass) as CSR matrices

    Raises:
        ResolutionError: The quadrature does not resolve the eps-oscillation
    """
    if isinstance(coefficient, CoefficientG) and cell_lengths is None:
        cell_lengths = coefficient.lattice.lengths
    if tables is None:
        tables = BasisTables(space, space.quadrature(panels_for(space, eps, cell_lengths)))
    if isinstance(coefficient, CoefficientG) and under_resolved(space, tables.rule, eps, cell_lengths):
        raise ResolutionError(f"quadrature does not resolve eps={eps} ({tables.rule.panels} panels per element)")
    S = stiffness_matrix(tables, coefficient, b, eps)
    M = mass_matrix(tables)
    logger.debug(f"Assembled {space.dof_count} dofs on {tables.rule.size} quadrature points")
    return S, M
