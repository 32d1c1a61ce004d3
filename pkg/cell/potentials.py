"""
Flux Potentials Module
Antisymmetric potentials M_{alpha beta} with f_alpha = sum_beta d^beta M_{alpha beta}
for the flux fluctuations f_alpha = b_alpha* (g~ - g0)
"""
import logging
from dataclasses import dataclass, field
from functools import reduce
from operator import add
from typing import Dict, Tuple

import numpy as np

from core.multiindex import multi_indices
from core.symbol import Symbol
from errors import SolverError
from torus.field import PeriodicField
from torus.operators import apply_derivative, derivative_multiplier, multiindex_norm
from .effective import EffectiveData

logger = logging.getLogger(__name__)

Key = Tuple[Tuple[int, ...], Tuple[int, ...]]


@dataclass(frozen=True, eq=False)
class FluxPotentials:
    """Potentials keyed by (alpha, beta) entries, with the identity residuals"""

    M: Dict[Key, PeriodicField]
    f: Dict[Tuple[int, ...], PeriodicField] = field(default_factory=dict)
    residual_div: float = 0.0
    residual_repr: float = 0.0
    nyquist_energy: float = 0.0

    def antisymmetry_defect(self) -> float:
        defect = 0.0
        for (alpha, beta), potential in self.M.items():
            partner = self.M[(beta, alpha)]
            defect = max(defect, float(np.abs(potential.values + partner.values).max()))
        return defect

    def max_mean(self) -> float:
        return max((float(np.abs(potential.mean()).max()) for potential in self.M.values()), default=0.0)


def _resolved_norm(u: PeriodicField) -> float:
    coeffs = u.coeffs * u.nyquist_mask[..., None, None]
    return float(np.sqrt(u.lattice.cell_volume * np.sum(np.abs(coeffs) ** 2)))


def flux_potentials(data: EffectiveData, b: Symbol, tol: float = 1e-9) -> FluxPotentials:
    """
    Solve sum_{|beta|=p} d^{2 beta} Phi_alpha = f_alpha and form M_{alpha beta}

    Args:
        data: EffectiveData with g_tilde and g0
        b: Symbol
        tol: Bound on the relative divergence residual

    Returns:
        FluxPotentials with residual_div and residual_repr measured on the resolved modes
    """
    if data.g_tilde is None or data.g0 is None:
        raise ValueError("flux field and effective matrix must be computed first")
    alphas = multi_indices(b.d, b.p)
    fluctuation = data.g_tilde - data.g0
    f = {alpha.entries: fluctuation.left_multiply(np.conj(b.coefficient(alpha).T)) for alpha in alphas}

    scale = sum(multiindex_norm(f_alpha, b.p) for f_alpha in f.values())
    if scale == 0.0:
        zero = PeriodicField.zeros(data.Lambda.lattice, data.Lambda.grid_shape, data.Lambda.shape)
        logger.debug("Flux fluctuations vanish; all potentials are zero")
        return FluxPotentials(M={(a.entries, c.entries): zero for a in alphas for c in alphas}, f=f)

    divergence = reduce(add, [apply_derivative(f[alpha.entries], alpha) for alpha in alphas])
    residual_div = _resolved_norm(divergence) / scale
    if residual_div > tol:
        raise SolverError(f"flux divergence residual {residual_div:.3e} exceeds {tol:.1e}; cell solution is broken")

    reference = f[alphas[0].entries]
    laplacian = np.zeros(reference.grid_shape, dtype=complex)
    for beta in alphas:
        laplacian += derivative_multiplier(reference, beta) ** 2
    invertible = np.abs(laplacian) > 0
    inverse = np.zeros_like(laplacian)
    inverse[invertible] = 1.0 / laplacian[invertible]
    phi = {key: value.with_coeffs(value.coeffs * inverse[..., None, None]) for key, value in f.items()}

    potentials: Dict[Key, PeriodicField] = {}
    for i, alpha in enumerate(alphas):
        for beta in alphas[i:]:
            key = (alpha.entries, beta.entries)
            if alpha == beta:
                potentials[key] = phi[alpha.entries] * 0.0
                continue
            potential = apply_derivative(phi[alpha.entries], beta) - apply_derivative(phi[beta.entries], alpha)
            potentials[key] = potential
            potentials[(beta.entries, alpha.entries)] = potential * -1.0

    residual_repr = 0.0
    for alpha in alphas:
        represented = f[alpha.entries] * 0.0
        for beta in alphas:
            represented = represented + apply_derivative(potentials[(alpha.entries, beta.entries)], beta)
        residual_repr = max(residual_repr, _resolved_norm(f[alpha.entries] - represented) / scale)

    nyquist = sum(
        float(np.sum(np.abs(value.coeffs[~value.nyquist_mask]) ** 2)) for value in f.values()
    )
    logger.debug(f"Flux potentials: div residual {residual_div:.2e}, representation residual {residual_repr:.2e}")
    return FluxPotentials(
        M=potentials,
        f=f,
        residual_div=float(residual_div),
        residual_repr=float(residual_repr),
        nyquist_energy=float(np.sqrt(nyquist * reference.lattice.cell_volume)) / scale,
    )
