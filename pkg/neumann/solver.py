"""
Neumann Solver Module
Direct solves of (S - zeta M) u = M F on a Galerkin space
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh, splu

import config
from errors import ShapeError, SpectrumError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NeumannSolution:
    """Coefficients of the discrete resolvent solution with its residual"""

    coeffs: np.ndarray
    zeta: complex
    load: np.ndarray
    residual: float


def _near_spectrum(S: sp.spmatrix, M: sp.spmatrix, zeta: complex) -> Optional[float]:
    """Distance from zeta to the nearest pencil eigenvalue when zeta is on or near the real half-line"""
    if zeta.real < 0.0 or abs(zeta.imag) > config.SOLVER_SETTINGS["spectrum_tol"] * max(1.0, abs(zeta)):
        return None
    try:
        nearest = eigsh(S.tocsc(), k=1, M=M.tocsc(), sigma=zeta.real, which="LM", return_eigenvectors=False)
    except RuntimeError:
        return 0.0
    return float(abs(nearest[0] - zeta))


def factorize(S: sp.spmatrix, M: sp.spmatrix, zeta: complex) -> Callable[[np.ndarray], np.ndarray]:
    """
    Sparse LU of S - zeta M

    Raises:
        SpectrumError: zeta lies within spectrum_tol of a pencil eigenvalue
    """
    zeta = complex(zeta)
    if S.shape != M.shape:
        raise ShapeError(f"stiffness {S.shape} and mass {M.shape} differ")
    threshold = config.SOLVER_SETTINGS["spectrum_tol"] * max(1.0, abs(zeta))
    distance = _near_spectrum(S, M, zeta)
    if distance is not None and distance <= threshold:
        raise SpectrumError(f"zeta={zeta} lies on the discrete spectrum (distance {distance:.2e})")
    try:
        lu = splu((S - zeta * M).astype(complex).tocsc())
    except RuntimeError as exc:
        raise SpectrumError(f"S - zeta M is singular at zeta={zeta}") from exc
    return lu.solve


def solve_with_load(S: sp.spmatrix, M: sp.spmatrix, zeta: complex, load: np.ndarray,
                    solver: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> NeumannSolution:
    """Solve (S - zeta M) u = load"""
    load = np.asarray(load, dtype=complex)
    if load.shape != (S.shape[0],):
        raise ShapeError(f"load of shape {load.shape} does not match {S.shape[0]} dofs")
    norm = np.linalg.norm(load)
    if norm == 0.0:
        return NeumannSolution(coeffs=np.zeros_like(load), zeta=complex(zeta), load=load, residual=0.0)
    solver = solver or factorize(S, M, zeta)
    coeffs = solver(load)
    residual = float(np.linalg.norm(S @ coeffs - zeta * (M @ coeffs) - load) / norm)
    logger.debug(f"Neumann solve at zeta={zeta}: residual {residual:.2e}")
    return NeumannSolution(coeffs=coeffs, zeta=complex(zeta), load=load, residual=residual)


def solve_neumann(S: sp.spmatrix, M: sp.spmatrix, zeta: complex, F: np.ndarray) -> NeumannSolution:
    """
    Galerkin solution of the Neumann resolvent problem with right-hand side F

    Args:
        S: Stiffness
        M: Mass
        zeta: Shift off the discrete spectrum
        F: Coefficients of the right-hand side in the same space

    Returns:
        NeumannSolution
    """
    return solve_with_load(S, M, zeta, M @ np.asarray(F, dtype=complex))
