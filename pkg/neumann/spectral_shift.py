"""
Spectral Shift Module
First nonzero Neumann eigenvalues, the common lower bound c_flat and the
kernel resolvent identity
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

import config
from errors import SpectrumError
from .kernel import KernelZ, smallest_eigenpairs, split_kernel
from .solver import factorize

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SpectralShiftData:
    """q + 1 smallest eigenvalues of both pencils and the shift bound derived from them"""

    lambda_small_eps: np.ndarray
    lambda_small_eff: np.ndarray
    c_flat: float
    kernel: KernelZ
    margin: float

    @property
    def q(self) -> int:
        return self.kernel.q

    @property
    def projector_P(self) -> np.ndarray:
        return self.kernel.projector_P()

    @property
    def projector_PZ(self) -> np.ndarray:
        return self.kernel.projector_PZ()

    def summary(self) -> dict:
        return {
            "q": self.q,
            "lambda_small_eps": [float(v) for v in self.lambda_small_eps],
            "lambda_small_eff": [float(v) for v in self.lambda_small_eff],
            "c_flat": self.c_flat,
            "margin": self.margin,
        }


def _bottom(S: sp.spmatrix, M: sp.spmatrix, q: int, label: str) -> np.ndarray:
    values, _ = smallest_eigenpairs(S, M, q + 2)
    found = split_kernel(values, config.SOLVER_SETTINGS["kernel_tol"], config.SOLVER_SETTINGS["kernel_gap"])
    if found != q:
        raise SpectrumError(f"{label} pencil has a {found}-dimensional kernel, expected {q}")
    return values[:q + 1]


def spectral_shift(stiffness_eps: sp.spmatrix, stiffness_eff: sp.spmatrix, mass: sp.spmatrix,
                   kernel: KernelZ, margin: Optional[float] = None) -> SpectralShiftData:
    """
    c_flat = margin x min(lambda_(q+1) of the oscillating and effective pencils)

    Args:
        stiffness_eps: Stiffness with g(x/eps)
        stiffness_eff: Stiffness with g0
        mass: Mass matrix
        kernel: Kernel of b(D) on the same space
        margin: Factor below one (configured default when omitted)

    Returns:
        SpectralShiftData

    Raises:
        SpectrumError: Kernel dimension mismatch or ill-separated spectrum
    """
    margin = config.STUDY_DEFAULTS["c_flat_margin"] if margin is None else margin
    lambda_eps = _bottom(stiffness_eps, mass, kernel.q, "oscillating")
    lambda_eff = _bottom(stiffness_eff, mass, kernel.q, "effective")
    c_flat = margin * float(min(lambda_eps[kernel.q], lambda_eff[kernel.q]))
    logger.info(f"lambda_2: oscillating {lambda_eps[kernel.q]:.6g}, effective {lambda_eff[kernel.q]:.6g}; "
                f"c_flat={c_flat:.6g}")
    return SpectralShiftData(lambda_small_eps=lambda_eps, lambda_small_eff=lambda_eff, c_flat=c_flat,
                             kernel=kernel, margin=margin)


def kernel_identity_defect(stiffness: sp.spmatrix, mass: sp.spmatrix, kernel: KernelZ, zeta: complex) -> float:
    """max over z in Z of ||(S - zeta M)^{-1} M z + z / zeta|| / ||z||"""
    solver = factorize(stiffness, mass, zeta)
    worst = 0.0
    for z in kernel.basis.T:
        image = solver(mass @ z)
        worst = max(worst, float(np.linalg.norm(image + z / zeta) / np.linalg.norm(z)))
    return worst
