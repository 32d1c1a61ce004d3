"""
Torus Resolvent Module
Solves (A_eps - zeta) u = F and (A0 - zeta) u = F for periodic data, eps = 1/k
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg, gmres

import config
from core.shift import Shift, shift_from_zeta
from core.symbol import Symbol
from errors import ConvergenceError, ResolutionError, ShapeError, SpectrumError
from torus.coefficient import CoefficientG
from torus.field import PeriodicField
from torus.operators import eps_to_k, norms, rescale_to_eps, symbol_on_grid

logger = logging.getLogger(__name__)

DENSE_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class ResolventSolution:
    """Solved resolvent problem on the data torus"""

    shift: Shift
    eps: Optional[float]
    u: PeriodicField
    rhs: PeriodicField
    solver_residual: float
    norms: Dict[str, float] = field(default_factory=dict)
    iterations: int = 0


def _check_rhs(b: Symbol, F: PeriodicField):
    if F.shape != (b.n, 1):
        raise ShapeError(f"right-hand side must be a {b.n}x1 field, got {F.shape}")
    if any(size % 2 for size in F.grid_shape):
        raise ShapeError(f"grid sizes must be even, got {F.grid_shape}")


def _solution_norms(u: PeriodicField, p: int) -> Dict[str, float]:
    return {"L2": norms(u, 0), "Hp": norms(u, p)}


def effective_symbol(g0: np.ndarray, b: Symbol, u: PeriodicField) -> np.ndarray:
    """L(xi) = b(xi)* g0 b(xi) on u's grid (Nyquist layer zeroed)"""
    values = symbol_on_grid(b, u)
    return np.conj(np.swapaxes(values, -1, -2)) @ np.asarray(g0) @ values


def effective_resolvent_blocks(g0: np.ndarray, b: Symbol, u: PeriodicField, zeta: complex) -> np.ndarray:
    """(L(xi) - zeta)^{-1} per mode"""
    blocks = effective_symbol(g0, b, u) - zeta * np.eye(b.n)
    singular = np.linalg.svd(blocks, compute_uv=False)[..., -1]
    threshold = config.SOLVER_SETTINGS["spectrum_tol"] * max(1.0, abs(zeta))
    if singular.min() <= threshold:
        raise SpectrumError(f"zeta={zeta} lies on the effective spectrum (distance {singular.min():.2e})")
    return np.linalg.inv(blocks)


def solve_effective(g0: np.ndarray, b: Symbol, zeta: complex, F: PeriodicField) -> ResolventSolution:
    """
    Solve (A0 - zeta) u = F mode by mode

    Args:
        g0: Effective matrix (m x m)
        b: Symbol
        zeta: Shift off [0, inf)
        F: Right-hand side (n x 1 field)

    Returns:
        ResolventSolution with eps=None
    """
    shift = shift_from_zeta(zeta)
    _check_rhs(b, F)
    inverse = effective_resolvent_blocks(g0, b, F, shift.zeta)
    u = F.with_coeffs(inverse @ F.coeffs)
    return ResolventSolution(shift=shift, eps=None, u=u, rhs=F, solver_residual=0.0,
                             norms=_solution_norms(u, b.p))


class OscillatoryOperator:
    """B* G_eps B - zeta on coefficient vectors of the data-torus grid"""

    def __init__(self, g: CoefficientG, b: Symbol, eps: float, grid):
        k = eps_to_k(eps)
        expected = tuple(k * size for size in g.field.grid_shape)
        if tuple(grid) != expected:
            raise ResolutionError(f"data grid {tuple(grid)} must equal {k} x coefficient grid = {expected}")
        self.b = b
        self.eps = eps
        self.g_eps = rescale_to_eps(g.field, eps)
        self.grid = expected
        self.axes = tuple(range(len(expected)))
        self.total = int(np.prod(expected))
        self.symbol = symbol_on_grid(b, self.g_eps)
        self.symbol_adjoint = np.conj(np.swapaxes(self.symbol, -1, -2))
        self.size = self.total * b.n

    def _columns(self, x: np.ndarray) -> np.ndarray:
        return x.reshape(self.grid + (self.b.n, 1))

    def apply(self, x: np.ndarray, zeta: complex) -> np.ndarray:
        coeffs = self.symbol @ self._columns(x)
        values = np.fft.ifftn(coeffs * self.total, axes=self.axes)
        flux = np.fft.fftn(self.g_eps.values @ values, axes=self.axes) / self.total
        return (self.symbol_adjoint @ flux).ravel() - zeta * x

    def linear_operator(self, zeta: complex) -> LinearOperator:
        return LinearOperator((self.size, self.size), matvec=lambda x: self.apply(x, zeta), dtype=complex)


def solve_oscillatory(g: CoefficientG, b: Symbol, eps: float, zeta: complex, F: PeriodicField,
                      g0: Optional[np.ndarray] = None, tol: Optional[float] = None) -> ResolventSolution:
    """
    Galerkin solve of (A_eps - zeta) u = F on the truncated trigonometric space

    Conjugate gradients for real negative zeta, GMRES otherwise; both
    preconditioned by the effective resolvent.

    Args:
        g: Cell coefficient
        b: Symbol
        eps: 1/k
        zeta: Shift off [0, inf)
        F: Right-hand side on a grid k times the coefficient grid
        g0: Effective matrix for the preconditioner (mean of g when omitted)
        tol: Relative residual tolerance

    Returns:
        ResolventSolution
    """
    shift = shift_from_zeta(zeta)
    _check_rhs(b, F)
    tol = tol or config.SOLVER_SETTINGS["resolvent_tol"]
    operator = OscillatoryOperator(g, b, eps, F.grid_shape)
    rhs = F.coeffs.ravel()
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        return ResolventSolution(shift=shift, eps=eps, u=F * 0.0, rhs=F, solver_residual=0.0,
                                 norms={"L2": 0.0, "Hp": 0.0})

    preconditioner_g = g.field.mean() if g0 is None else np.asarray(g0)
    blocks = effective_resolvent_blocks(preconditioner_g, b, F, shift.zeta)
    M = LinearOperator((operator.size, operator.size), dtype=complex,
                       matvec=lambda x: (blocks @ operator._columns(x)).ravel())
    A = operator.linear_operator(shift.zeta)
    cap = max(int(config.SOLVER_SETTINGS["cg_cap_factor"] * np.sqrt(operator.size)),
              config.SOLVER_SETTINGS["resolvent_min_iterations"])
    count = [0]

    def tick(_):
        count[0] += 1

    if shift.zeta.imag == 0.0 and shift.zeta.real < 0.0:
        solution, info = cg(A, rhs, rtol=tol, atol=0.0, maxiter=cap, M=M, callback=tick)
    else:
        solution, info = gmres(A, rhs, rtol=tol, atol=0.0, restart=config.SOLVER_SETTINGS["gmres_restart"],
                               maxiter=cap, M=M, callback=tick, callback_type="pr_norm")
    if info != 0:
        raise ConvergenceError(f"oscillatory resolvent (eps={eps}, zeta={zeta}) did not converge (info={info})")
    residual = float(np.linalg.norm(rhs - A.matvec(solution)) / rhs_norm)
    u = F.with_coeffs(operator._columns(solution))
    logger.debug(f"Oscillatory solve eps={eps}, zeta={zeta}: {count[0]} iterations, residual {residual:.2e}")
    return ResolventSolution(shift=shift, eps=eps, u=u, rhs=F, solver_residual=residual,
                             norms=_solution_norms(u, b.p), iterations=count[0])


def dense_oscillatory_solve(g: CoefficientG, b: Symbol, eps: float, zeta: complex,
                            F: PeriodicField) -> ResolventSolution:
    """Oracle: assemble the Galerkin matrix column by column and solve directly"""
    shift = shift_from_zeta(zeta)
    _check_rhs(b, F)
    operator = OscillatoryOperator(g, b, eps, F.grid_shape)
    if operator.size > DENSE_LIMIT:
        raise ResolutionError(f"dense oracle limited to {DENSE_LIMIT} unknowns, got {operator.size}")
    matrix = np.empty((operator.size, operator.size), dtype=complex)
    unit = np.zeros(operator.size, dtype=complex)
    for j in range(operator.size):
        unit[j] = 1.0
        matrix[:, j] = operator.apply(unit, shift.zeta)
        unit[j] = 0.0
    solution = np.linalg.solve(matrix, F.coeffs.ravel())
    u = F.with_coeffs(operator._columns(solution))
    return ResolventSolution(shift=shift, eps=eps, u=u, rhs=F, solver_residual=0.0,
                             norms=_solution_norms(u, b.p))
