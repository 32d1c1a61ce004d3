"""
Torus Corrector Module
First-order corrector eps^p Lambda^eps S_eps b(D) u0 and the flux approximation
g~^eps S_eps b(D) u0 on the data torus
"""
import logging

from cell.effective import EffectiveData
from core.symbol import Symbol
from errors import ResolutionError
from torus.coefficient import CoefficientG
from torus.field import PeriodicField
from torus.operators import apply_bD, apply_steklov, eps_to_k, multiply, norms, rescale_to_eps
from .resolvent import ResolventSolution

logger = logging.getLogger(__name__)


def _rescaled(cell_field: PeriodicField, eps: float, target: PeriodicField) -> PeriodicField:
    k = eps_to_k(eps)
    expected = tuple(k * size for size in cell_field.grid_shape)
    if target.grid_shape != expected:
        raise ResolutionError(
            f"data grid {target.grid_shape} cannot hold the modes of the rescaled cell field (need {expected})"
        )
    return rescale_to_eps(cell_field, eps)


def smoothed_flux(b: Symbol, eps: float, u0: ResolventSolution, cell) -> PeriodicField:
    """S_eps b(D) u0 averaged over the eps-scaled cell"""
    return apply_steklov(apply_bD(b, u0.u), eps, cell)


def corrector_K(data: EffectiveData, b: Symbol, eps: float, u0: ResolventSolution,
                smoothing: bool = True) -> PeriodicField:
    """
    eps^p Lambda(x / eps) (S_eps b(D) u0)(x)

    Args:
        data: Cell solution
        b: Symbol
        eps: 1/k
        u0: Effective solution on the data torus
        smoothing: Apply S_eps (False gives the standard corrector)

    Returns:
        n x 1 field on the data torus
    """
    lambda_eps = _rescaled(data.Lambda, eps, u0.u)
    flux = smoothed_flux(b, eps, u0, data.Lambda.lattice) if smoothing else apply_bD(b, u0.u)
    return multiply(lambda_eps, flux, dealias=True) * (eps ** b.p)


def flux_errors(data: EffectiveData, g: CoefficientG, b: Symbol, eps: float,
                u_eps: ResolventSolution, u0: ResolventSolution):
    """
    ||g^eps b(D) u_eps - g~^eps S_eps b(D) u0|| with and without smoothing

    Returns:
        Tuple of (e_flux, e_flux_std)
    """
    g_eps = _rescaled(g.field, eps, u_eps.u)
    g_tilde_eps = _rescaled(data.g_tilde, eps, u0.u)
    flux_eps = multiply(g_eps, apply_bD(b, u_eps.u))
    plain = apply_bD(b, u0.u)
    smoothed = apply_steklov(plain, eps, data.Lambda.lattice)
    e_flux = norms(flux_eps - multiply(g_tilde_eps, smoothed), 0)
    e_flux_std = norms(flux_eps - multiply(g_tilde_eps, plain), 0)
    return e_flux, e_flux_std


def corrected_errors(data: EffectiveData, b: Symbol, eps: float,
                     u_eps: ResolventSolution, u0: ResolventSolution):
    """
    H^p errors of u0 + K (smoothed), u0 + K0 (standard) and u0 alone

    Returns:
        Dictionary with e_Hp, e_Hp_std and e_Hp_plain
    """
    difference = u_eps.u - u0.u
    corrected = difference - corrector_K(data, b, eps, u0)
    standard = difference - corrector_K(data, b, eps, u0, smoothing=False)
    return {
        "e_Hp": norms(corrected, b.p),
        "e_Hp_std": norms(standard, b.p),
        "e_Hp_plain": norms(difference, b.p),
    }


def corrector_energy(data: EffectiveData, b: Symbol, eps: float, u0: ResolventSolution) -> float:
    """||eps^p K||_{H^p}; stays bounded as eps -> 0"""
    value = norms(corrector_K(data, b, eps, u0), b.p)
    logger.debug(f"Corrector H^p norm at eps={eps}: {value:.4e}")
    return float(value)
