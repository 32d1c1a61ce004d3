"""
Kernel Module
Z = Ker b(D) inside a Galerkin space, its L2-orthogonal projectors and pencil eigenvalues
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

import config
from core.symbol import Symbol
from errors import SpectrumError
from .assembly import BasisTables, mass_matrix, sobolev_gram, stiffness_matrix
from .space import GalerkinSpace

logger = logging.getLogger(__name__)

DENSE_EIGEN_LIMIT = 1500


def _real_if_possible(matrix: sp.spmatrix) -> sp.spmatrix:
    matrix = sp.csr_matrix(matrix)
    if np.iscomplexobj(matrix.data) and not np.any(matrix.data.imag):
        return sp.csr_matrix(matrix.real)
    return matrix


def smallest_eigenpairs(S: sp.spmatrix, M: sp.spmatrix, count: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    The `count` smallest eigenpairs of the Hermitian pencil (S, M), M positive definite

    Dense for small pencils, shift-invert Lanczos below the spectrum otherwise.

    Returns:
        Tuple of (eigenvalues ascending, M-orthonormal eigenvectors as columns)
    """
    size = S.shape[0]
    count = min(count, size)
    S, M = _real_if_possible(S), _real_if_possible(M)
    if size <= DENSE_EIGEN_LIMIT or count >= size - 1:
        values, vectors = la.eigh(S.toarray(), M.toarray(), subset_by_index=[0, count - 1])
        return values, vectors
    values, vectors = eigsh(S.tocsc(), k=count, M=M.tocsc(), sigma=-1.0, which="LM")
    order = np.argsort(values)
    values, vectors = values[order], vectors[:, order]
    gram = vectors.conj().T @ (M @ vectors)
    factor = la.cholesky((gram + gram.conj().T) / 2.0, lower=True)
    return values, la.solve_triangular(factor, vectors.T, lower=True).T


def split_kernel(values: np.ndarray, tol: float, gap: float) -> int:
    """
    Dimension q of the near-zero cluster at the bottom of an ascending spectrum

    Raises:
        SpectrumError: No clear separation between the cluster and the next eigenvalue
    """
    scale = abs(values[-1])
    q = int(np.sum(values < tol * scale))
    if q == len(values):
        raise SpectrumError(f"all {q} computed eigenvalues are below the kernel tolerance")
    top = float(values[q])
    if q and float(values[q - 1]) >= tol * top:
        raise SpectrumError(f"kernel eigenvalue {values[q - 1]:.3e} not below {tol} x lambda_(q+1) = {top:.3e}")
    below = max(float(values[q - 1]), 0.0) if q else 0.0
    if q and below > 0.0 and top / below < gap:
        raise SpectrumError(f"gap ratio {top / below:.3g} below {gap}")
    return q


@dataclass(frozen=True, eq=False)
class KernelZ:
    """L2-orthonormal basis of Z (columns of coefficient vectors) with the projectors it induces"""

    basis: np.ndarray
    mass: sp.csr_matrix
    eigenvalues: np.ndarray
    next_eigenvalue: float

    @property
    def q(self) -> int:
        return self.basis.shape[1]

    def project_Z(self, coeffs: np.ndarray) -> np.ndarray:
        """P_Z u = Z Z^H M u"""
        if self.q == 0:
            return np.zeros_like(coeffs, dtype=complex)
        return self.basis @ (self.basis.conj().T @ (self.mass @ coeffs))

    def project_H(self, coeffs: np.ndarray) -> np.ndarray:
        """P u = u - P_Z u"""
        return np.asarray(coeffs, dtype=complex) - self.project_Z(coeffs)

    def projector_PZ(self) -> np.ndarray:
        return self.basis @ (self.basis.conj().T @ self.mass.toarray())

    def projector_P(self) -> np.ndarray:
        return np.eye(self.mass.shape[0]) - self.projector_PZ()

    def gram_defect(self) -> float:
        gram = self.basis.conj().T @ (self.mass @ self.basis)
        return float(np.abs(gram - np.eye(self.q)).max()) if self.q else 0.0


def kernel_Z(space: GalerkinSpace, b: Symbol, tol: Optional[float] = None,
             tables: Optional[BasisTables] = None, probe: Optional[int] = None) -> KernelZ:
    """
    Kernel of b(D) from the pencil (b-stiffness with g = 1, mass)

    Args:
        space: Galerkin space
        b: Symbol
        tol: Eigenvalues below tol * lambda_(q+1) count as kernel
        tables: Basis tables of the space
        probe: Number of eigenvalues to compute

    Returns:
        KernelZ with an M-orthonormal basis

    Raises:
        SpectrumError: Ill-separated spectrum
    """
    tol = tol or config.SOLVER_SETTINGS["kernel_tol"]
    tables = tables or BasisTables(space, space.quadrature())
    S1 = stiffness_matrix(tables, np.eye(b.m), b)
    M = mass_matrix(tables)
    probe = probe or max(8, 2 * space.n * b.p ** space.d + 2)
    values, vectors = smallest_eigenpairs(S1, M, probe)
    q = split_kernel(values, tol, config.SOLVER_SETTINGS["kernel_gap"])
    logger.info(f"Kernel of b(D): q={q}, lambda_(q+1)={values[q]:.6g}")
    return KernelZ(basis=vectors[:, :q], mass=M, eigenvalues=values[:q], next_eigenvalue=float(values[q]))


def kernel_hp_residuals(kernel: KernelZ, tables: BasisTables, b: Symbol) -> np.ndarray:
    """||b(D) z||_{L2} / ||z||_{H^p} per basis element"""
    S1 = stiffness_matrix(tables, np.eye(b.m), b)
    G = sobolev_gram(tables)
    top = np.real(np.einsum("ij,ij->j", kernel.basis.conj(), S1 @ kernel.basis))
    bottom = np.real(np.einsum("ij,ij->j", kernel.basis.conj(), G @ kernel.basis))
    return np.sqrt(np.maximum(top, 0.0) / bottom)


def subspace_angle(kernel: KernelZ, tables: BasisTables,
                   functions: Sequence[Callable[[np.ndarray], np.ndarray]]) -> float:
    """Largest principal angle between Z and the span of the given functions in L2"""
    root = np.sqrt(tables.weights)[:, None]
    n = tables.space.n

    def sampled(values):
        values = np.asarray(values, dtype=complex).reshape(tables.rule.size, n)
        return (root * values).T.ravel()

    kernel_samples = np.stack([sampled(tables.values(z, (0,) * tables.space.d)) for z in kernel.basis.T], axis=1)
    reference = np.stack([sampled(func(tables.points)) for func in functions], axis=1)
    return float(la.subspace_angles(kernel_samples, reference).max())
