"""
Bounded-Domain Corrector Module
Smoothed corrector eps^p Lambda^eps S_eps b(D) P u0 and the standard corrector
eps^p Lambda^eps b(D) u0 at quadrature points, with all derivatives up to order p
"""
import logging
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from cell.effective import CASE_BAR, EffectiveData, flux_at_points, multiplier_condition
from core.multiindex import MultiIndex, multi_indices_up_to, sub_indices
from core.symbol import Symbol
from errors import GateError
from torus.coefficient import CoefficientG
from torus.operators import apply_derivative, evaluate
from .assembly import BasisTables
from .extension import ExtensionOperator

logger = logging.getLogger(__name__)

DerivativeTable = Dict[Tuple[int, ...], np.ndarray]
FluxDerivative = Callable[[Tuple[int, ...]], np.ndarray]

CHUNK = 2048


def _chunked(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> sp.csr_matrix:
    return sp.vstack([sp.csr_matrix(fn(x[start:start + CHUNK])) for start in range(0, len(x), CHUNK)], format="csr")


def tensor_apply(tables: BasisTables, matrices: Sequence[sp.csr_matrix], coeffs: np.ndarray) -> np.ndarray:
    """Apply per-axis matrices to a coefficient vector, values (Q, n) on the tensor points"""
    tensor = tables.space.coefficient_tensor(coeffs)
    if len(matrices) == 1:
        return np.asarray(matrices[0] @ tensor)
    first, second = matrices
    n = tensor.shape[-1]
    out = np.stack([first @ (second @ tensor[:, :, r].T).T for r in range(n)], axis=-1)
    return out.reshape(tables.rule.size, n)


class SmoothedFlux:
    """d^delta S_eps b(D) P u at the quadrature points, with per-axis Steklov tables cached"""

    def __init__(self, tables: BasisTables, P: ExtensionOperator, b: Symbol, eps: float,
                 cell_lengths: Sequence[float], coeffs: np.ndarray):
        self.tables = tables
        self.P = P
        self.b = b
        self.widths = [eps * length for length in cell_lengths]
        self.coeffs = coeffs
        self._axis: Dict[Tuple[int, int], sp.csr_matrix] = {}

    def _axis_matrix(self, j: int, order: int) -> sp.csr_matrix:
        if (j, order) not in self._axis:
            axis = self.tables.space.axes[j]
            x = self.tables.rule.axis_points[j]
            self._axis[(j, order)] = _chunked(
                lambda chunk: self.P.steklov_basis(axis, chunk, order, self.widths[j]), x)
        return self._axis[(j, order)]

    def __call__(self, delta: Tuple[int, ...]) -> np.ndarray:
        total = np.zeros((self.tables.rule.size, self.b.m), dtype=complex)
        factor = (-1j) ** self.b.p
        for alpha, matrix in self.b.terms:
            orders = [a + dl for a, dl in zip(alpha.entries, delta)]
            values = tensor_apply(self.tables, [self._axis_matrix(j, r) for j, r in enumerate(orders)], self.coeffs)
            total += factor * values @ matrix.T
        return total


class PlainFlux:
    """d^delta b(D) u at the quadrature points"""

    def __init__(self, tables: BasisTables, b: Symbol, coeffs: np.ndarray):
        self.tables = tables
        self.b = b
        self.coeffs = coeffs

    def __call__(self, delta: Tuple[int, ...]) -> np.ndarray:
        total = np.zeros((self.tables.rule.size, self.b.m), dtype=complex)
        factor = (-1j) ** self.b.p
        for alpha, matrix in self.b.terms:
            beta = tuple(a + dl for a, dl in zip(alpha.entries, delta))
            total += factor * self.tables.values(self.coeffs, beta) @ matrix.T
        return total


def lambda_derivative(data: EffectiveData, g: CoefficientG, b: Symbol, cell_points: np.ndarray,
                      gamma: MultiIndex) -> np.ndarray:
    """
    d^gamma Lambda at cell points, (npts, n, m)

    In one dimension the top derivative comes from the closed form
    b(D) Lambda = g^{-1} g~ - 1 with g evaluated exactly; everything else is
    interpolated from the cell grid.
    """
    if b.d == 1 and gamma.order == b.p:
        (_, b_top), = b.terms
        top = np.linalg.pinv(b_top) @ flux_at_points(data, g, cell_points)
        return (1j ** b.p) * top
    return evaluate(apply_derivative(data.Lambda, gamma.entries), cell_points)


def corrector_derivatives(data: EffectiveData, g: CoefficientG, b: Symbol, eps: float,
                          tables: BasisTables, flux: FluxDerivative) -> DerivativeTable:
    """
    d^beta (eps^p Lambda(x/eps) v(x)) for |beta| <= p by the Leibniz rule

    Returns:
        Dictionary beta -> values (Q, n)
    """
    d, p = tables.space.d, b.p
    Q = tables.rule.size
    result: DerivativeTable = {}
    if data.case == CASE_BAR:
        return {beta.entries: np.zeros((Q, b.n), dtype=complex) for beta in multi_indices_up_to(d, p)}
    cell_points = tables.points / eps
    lambdas: Dict[Tuple[int, ...], np.ndarray] = {}
    fluxes: Dict[Tuple[int, ...], np.ndarray] = {}
    for beta in multi_indices_up_to(d, p):
        total = np.zeros((Q, b.n), dtype=complex)
        for gamma in sub_indices(beta):
            if gamma.entries not in lambdas:
                lambdas[gamma.entries] = lambda_derivative(data, g, b, cell_points, gamma)
            rest = (beta - gamma).entries
            if rest not in fluxes:
                fluxes[rest] = flux(rest)
            weight = beta.binomial(gamma) * eps ** (p - gamma.order)
            total += weight * np.einsum("qnm,qm->qn", lambdas[gamma.entries], fluxes[rest])
        result[beta.entries] = total
    return result


def corrector_KN(data: EffectiveData, g: CoefficientG, b: Symbol, eps: float, u0: np.ndarray,
                 P: ExtensionOperator, tables: BasisTables,
                 cell_lengths: Optional[Sequence[float]] = None) -> DerivativeTable:
    """
    Smoothed corrector on the domain: eps^p Lambda^eps S_eps b(D) (P u0), restricted

    Args:
        data: Cell solution
        g: Cell coefficient
        b: Symbol
        eps: Period scale
        u0: Effective solution coefficients
        P: Extension operator of the domain
        tables: Basis tables of the reference space
        cell_lengths: Coefficient cell lengths (from g when omitted)

    Returns:
        Dictionary beta -> d^beta K at the quadrature points
    """
    cell_lengths = g.lattice.lengths if cell_lengths is None else cell_lengths
    flux = SmoothedFlux(tables, P, b, eps, cell_lengths, u0)
    return corrector_derivatives(data, g, b, eps, tables, flux)


def corrector_KN0(data: EffectiveData, g: CoefficientG, b: Symbol, eps: float, u0: np.ndarray,
                  tables: BasisTables) -> DerivativeTable:
    """
    Standard corrector eps^p Lambda^eps b(D) u0 without smoothing or extension

    Raises:
        GateError: The multiplier condition (2p > d or the under case) fails
    """
    if not multiplier_condition(b.p, b.d, data.case):
        raise GateError(f"standard corrector refused: p={b.p}, d={b.d}, case={data.case}")
    return corrector_derivatives(data, g, b, eps, tables, PlainFlux(tables, b, u0))


def solution_derivatives(tables: BasisTables, coeffs: np.ndarray) -> DerivativeTable:
    return {beta.entries: tables.values(coeffs, beta.entries)
            for beta in multi_indices_up_to(tables.space.d, tables.space.p)}


def hp_norm(tables: BasisTables, derivatives: DerivativeTable) -> float:
    """(sum_{|beta| <= p} ||d^beta w||^2_{L2})^{1/2} from a derivative table"""
    total = sum(tables.l2_norm(values) ** 2 for values in derivatives.values())
    return float(np.sqrt(total))


def table_difference(first: DerivativeTable, *others: DerivativeTable) -> DerivativeTable:
    result = {key: np.array(values, dtype=complex) for key, values in first.items()}
    for other in others:
        for key in result:
            result[key] = result[key] - other[key]
    return result
