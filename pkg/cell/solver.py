"""
Cell Problem Solver Module
Preconditioned conjugate gradients for b(D)* g (b(D) Lambda + 1) = 0 on the
periodicity cell, one column of Lambda per canonical vector e_k
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Tuple

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

import config
from core.symbol import Symbol
from errors import ConvergenceError, DomainError, ShapeError
from torus.coefficient import CoefficientG
from torus.field import PeriodicField
from torus.operators import symbol_on_grid
from .effective import EffectiveData, effective_matrix, with_case

logger = logging.getLogger(__name__)


def resample_coefficient(g: CoefficientG, cutoff) -> CoefficientG:
    """g on a grid with `cutoff` points per dimension (closed form required to change grids)"""
    if cutoff is None:
        return g
    grid = (int(cutoff),) * g.field.d if np.isscalar(cutoff) else tuple(int(c) for c in cutoff)
    if any(size % 2 for size in grid):
        raise ShapeError(f"grid sizes must be even, got {grid}")
    if grid == g.field.grid_shape:
        return g
    if g.expression is None:
        raise ShapeError(f"coefficient sampled on {g.field.grid_shape} has no closed form to resample on {grid}")
    field = PeriodicField.from_function(g.lattice, grid, g.expression)
    return CoefficientG(field, expression=g.expression, label=g.label)


def tail_energy(g: CoefficientG) -> float:
    """Relative energy of g outside the inner half of the mode box"""
    modes = np.abs(g.field.integer_modes)
    outer = np.any(modes > np.asarray(g.field.grid_shape) / 4, axis=-1)
    fluctuation = np.abs(g.field.coeffs) ** 2
    fluctuation[(0,) * g.field.d] = 0.0
    total = fluctuation.sum()
    if total == 0.0:
        return 0.0
    return float(fluctuation[outer].sum() / total)


class CellOperator:
    """Discrete normal operator B* G B acting on coefficient vectors of n-column fields"""

    def __init__(self, g: CoefficientG, b: Symbol):
        if g.m != b.m:
            raise ShapeError(f"coefficient is {g.m}x{g.m} but the symbol has m={b.m}")
        self.g = g
        self.b = b
        self.grid = g.field.grid_shape
        self.axes = tuple(range(g.field.d))
        self.total = g.field.total_modes
        self.symbol = symbol_on_grid(b, g.field)
        self.symbol_adjoint = np.conj(np.swapaxes(self.symbol, -1, -2))
        self.size = self.total * b.n
        self.preconditioner = self._build_preconditioner()

    def _build_preconditioner(self) -> np.ndarray:
        mean_g = self.g.field.mean()
        block = self.symbol_adjoint @ mean_g @ self.symbol
        active = np.any(np.abs(self.symbol) > 0, axis=(-2, -1))
        block[~active] = np.eye(self.b.n)
        inverse = np.linalg.inv(block)
        inverse[~active] = 0.0
        return inverse

    def _columns(self, x: np.ndarray) -> np.ndarray:
        return x.reshape(self.grid + (self.b.n, 1))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        coeffs = self.symbol @ self._columns(x)
        values = np.fft.ifftn(coeffs * self.total, axes=self.axes)
        flux = np.fft.fftn(self.g.field.values @ values, axes=self.axes) / self.total
        return (self.symbol_adjoint @ flux).ravel()

    def precondition(self, x: np.ndarray) -> np.ndarray:
        return (self.preconditioner @ self._columns(x)).ravel()

    def rhs(self, k: int) -> np.ndarray:
        """-B* (g e_k) in coefficient space"""
        column = self.g.field.column(k).coeffs
        return -(self.symbol_adjoint @ column).ravel()

    def as_linear_operators(self) -> Tuple[LinearOperator, LinearOperator]:
        shape = (self.size, self.size)
        return (
            LinearOperator(shape, matvec=self.matvec, dtype=complex),
            LinearOperator(shape, matvec=self.precondition, dtype=complex),
        )


def _solve_column(operator: CellOperator, k: int, tol: float, cap: int):
    rhs = operator.rhs(k)
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        logger.debug(f"Column {k}: zero right-hand side, corrector column vanishes")
        return np.zeros(operator.size, dtype=complex), 0, 0.0, [0.0]

    A, M = operator.as_linear_operators()
    energies = []

    def record(xk):
        energies.append(float(0.5 * np.real(np.vdot(xk, A.matvec(xk))) - np.real(np.vdot(rhs, xk))))

    solution, info = cg(A, rhs, rtol=tol, atol=0.0, maxiter=cap, M=M, callback=record)
    if info > 0:
        raise ConvergenceError(f"cell problem column {k} did not converge in {cap} iterations")
    if info < 0:
        raise ConvergenceError(f"cell problem column {k}: illegal input or breakdown (info={info})")
    residual = float(np.linalg.norm(rhs - A.matvec(solution)) / rhs_norm)
    logger.debug(f"Column {k}: {len(energies)} iterations, relative residual {residual:.3e}")
    return solution, len(energies), residual, energies


def solve_cell_problem(g: CoefficientG, b: Symbol, cutoff=None, tol: Optional[float] = None,
                       threads: int = 1) -> EffectiveData:
    """
    Solve the periodic cell problem column by column

    Args:
        g: Coefficient (resampled to `cutoff` when a closed form is known)
        b: Symbol
        cutoff: Grid points per dimension (None keeps g's grid)
        tol: Relative residual tolerance
        threads: Worker threads over the m columns

    Returns:
        EffectiveData with Lambda (n x m, zero mean) populated
    """
    if g.field.d != b.d:
        raise ShapeError(f"coefficient lives in dimension {g.field.d}, symbol in {b.d}")
    if not g.lattice.is_rectangular:
        raise DomainError("cell problems are solved on rectangular cells only")
    tol = tol or config.SOLVER_SETTINGS["cg_tol"]
    g = resample_coefficient(g, cutoff)
    if any(size % 2 for size in g.field.grid_shape):
        raise ShapeError(f"grid sizes must be even, got {g.field.grid_shape}")
    tail = tail_energy(g)
    if tail > tol:
        logger.debug(f"Coefficient tail energy {tail:.2e} exceeds tol; accuracy is algebraic in the cutoff")

    operator = CellOperator(g, b)
    cap = max(int(config.SOLVER_SETTINGS["cg_cap_factor"] * np.sqrt(operator.size)),
              config.SOLVER_SETTINGS["cg_min_iterations"])
    logger.info(f"Solving cell problem: d={b.d}, p={b.p}, m={b.m}, n={b.n}, grid={g.field.grid_shape}")

    if threads > 1 and b.m > 1:
        with ThreadPoolExecutor(max_workers=min(threads, b.m)) as pool:
            results = list(pool.map(lambda k: _solve_column(operator, k, tol, cap), range(b.m)))
    else:
        results = [_solve_column(operator, k, tol, cap) for k in range(b.m)]

    coeffs = np.concatenate([operator._columns(solution) for solution, _, _, _ in results], axis=-1)
    coeffs[(0,) * b.d] = 0.0
    Lambda = PeriodicField.from_coeffs(g.lattice, coeffs, zero_mean=True)
    return EffectiveData(
        Lambda=Lambda,
        residual=max(residual for _, _, residual, _ in results),
        iterations=[count for _, count, _, _ in results],
        energy_history=[energies for _, _, _, energies in results],
    )


def homogenize(g: CoefficientG, b: Symbol, cutoff=None, tol: Optional[float] = None,
               threads: int = 1, case_tol: float = 1e-8) -> Tuple[EffectiveData, CoefficientG]:
    """
    Cell solve followed by the effective matrix and case detection

    Returns:
        Tuple of (EffectiveData, coefficient on the grid that was solved)
    """
    g = resample_coefficient(g, cutoff)
    data = solve_cell_problem(g, b, tol=tol, threads=threads)
    data = with_case(effective_matrix(data, g, b), b, g, case_tol)
    logger.info(f"Effective matrix computed ({data.case}), residual {data.residual:.2e}")
    return data, g
