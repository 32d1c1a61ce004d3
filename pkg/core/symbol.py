"""
Differential Symbol Module
Homogeneous symbols b(xi) = sum_{|alpha|=p} b_alpha xi^alpha of the operator b(D), D = -i grad
"""
import logging
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

import config
from errors import ShapeError
from .multiindex import MultiIndex, as_multiindex, multi_indices

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Symbol:
    """Symbol of order p mapping C^n to C^m on R^d"""

    p: int
    d: int
    m: int
    n: int
    terms: Tuple[Tuple[MultiIndex, np.ndarray], ...]
    alpha0: Optional[float] = None
    alpha1: Optional[float] = None

    def __post_init__(self):
        if self.p < 1:
            raise ShapeError(f"symbol order must be positive, got {self.p}")
        if self.m < self.n:
            raise ShapeError(f"symbol needs m >= n, got m={self.m}, n={self.n}")
        normalized = []
        for alpha, matrix in self.terms:
            alpha = as_multiindex(alpha)
            matrix = np.asarray(matrix, dtype=complex)
            if alpha.dim != self.d:
                raise ShapeError(f"multi-index {alpha.entries} does not live in dimension {self.d}")
            if alpha.order != self.p:
                raise ShapeError(f"multi-index {alpha.entries} has order {alpha.order}, expected {self.p}")
            if matrix.shape != (self.m, self.n):
                raise ShapeError(f"coefficient for {alpha.entries} has shape {matrix.shape}, expected {(self.m, self.n)}")
            matrix.setflags(write=False)
            normalized.append((alpha, matrix))
        object.__setattr__(self, "terms", tuple(normalized))
        if self.alpha0 is not None and self.alpha1 is not None and self.alpha0 > self.alpha1:
            raise ValueError("alpha0 must not exceed alpha1")

    def coefficient(self, alpha: Sequence[int]) -> np.ndarray:
        """b_alpha for the given multi-index (zero matrix when absent)"""
        alpha = as_multiindex(alpha)
        for beta, matrix in self.terms:
            if beta == alpha:
                return matrix
        return np.zeros((self.m, self.n), dtype=complex)

    def scaled(self, factor: complex) -> "Symbol":
        return Symbol(self.p, self.d, self.m, self.n,
                      tuple((alpha, factor * matrix) for alpha, matrix in self.terms))

    def with_ellipticity(self, sphere_samples: Optional[int] = None) -> "Symbol":
        alpha0, alpha1, _ = symbol_ellipticity(self, sphere_samples)
        return replace(self, alpha0=alpha0, alpha1=alpha1)

    def to_dict(self) -> dict:
        return {
            "type": "terms",
            "order": self.p,
            "dimension": self.d,
            "rows": self.m,
            "cols": self.n,
            "terms": [
                {
                    "alpha": list(alpha.entries),
                    "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in matrix],
                }
                for alpha, matrix in self.terms
            ],
        }


def symbol_from_terms(p: int, d: int, terms: Iterable[Tuple[Sequence[int], Sequence]]) -> Symbol:
    """Build a symbol from (alpha, matrix) pairs; m, n are read off the first matrix"""
    terms = [(as_multiindex(alpha), np.atleast_2d(np.asarray(matrix, dtype=complex))) for alpha, matrix in terms]
    if not terms:
        raise ShapeError("a symbol needs at least one term")
    m, n = terms[0][1].shape
    return Symbol(p, d, m, n, tuple(terms))


def gradient_symbol(d: int) -> Symbol:
    """b(D) = D, the gradient up to the factor -i (m = d, n = 1)"""
    terms = []
    for j in range(d):
        column = np.zeros((d, 1), dtype=complex)
        column[j, 0] = 1.0
        terms.append((MultiIndex.unit(d, j), column))
    return Symbol(1, d, d, 1, tuple(terms))


def power_symbol(p: int) -> Symbol:
    """One-dimensional b(D) = D^p"""
    return Symbol(p, 1, 1, 1, ((MultiIndex((p,)), np.ones((1, 1), dtype=complex)),))


def hessian_symbol() -> Symbol:
    """Rows (D1^2, sqrt(2) D1 D2, D2^2) in two dimensions"""
    weights = {(2, 0): 1.0, (1, 1): np.sqrt(2.0), (0, 2): 1.0}
    terms = []
    for row, alpha in enumerate(multi_indices(2, 2)):
        matrix = np.zeros((3, 1), dtype=complex)
        matrix[row, 0] = weights[alpha.entries]
        terms.append((alpha, matrix))
    return Symbol(2, 2, 3, 1, tuple(terms))


def symbol_eval(b: Symbol, xi) -> np.ndarray:
    """
    Evaluate b(xi) = sum b_alpha xi^alpha

    Args:
        b: Symbol
        xi: Array with last axis of length d (real or complex)

    Returns:
        Array of shape xi.shape[:-1] + (m, n)
    """
    xi = np.asarray(xi)
    if xi.ndim == 0 or xi.shape[-1] != b.d:
        raise ShapeError(f"xi must have last axis of length {b.d}, got shape {xi.shape}")
    result = np.zeros(xi.shape[:-1] + (b.m, b.n), dtype=complex)
    for alpha, matrix in b.terms:
        result += alpha.monomial(xi)[..., None, None] * matrix
    return result


def sphere_points(d: int, samples: int) -> np.ndarray:
    """Deterministic quasi-uniform points on the real unit sphere S^{d-1}"""
    if samples < 1:
        raise ValueError("sphere_samples must be at least 1")
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        angles = 2.0 * np.pi * np.arange(samples) / samples
        return np.column_stack([np.cos(angles), np.sin(angles)])
    if d == 3:
        # Fibonacci lattice
        k = np.arange(samples) + 0.5
        z = 1.0 - 2.0 * k / samples
        radius = np.sqrt(1.0 - z ** 2)
        golden = np.pi * (3.0 - np.sqrt(5.0))
        angle = golden * k
        return np.column_stack([radius * np.cos(angle), radius * np.sin(angle), z])
    # Halton points pushed through the normal quantile
    from scipy.stats import norm
    halton = qmc.Halton(d, scramble=False).random(samples + 1)[1:]
    gaussian = norm.ppf(np.clip(halton, 1e-12, 1 - 1e-12))
    return gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)


def symbol_ellipticity(b: Symbol, sphere_samples: Optional[int] = None) -> Tuple[float, float, bool]:
    """
    Measure alpha0, alpha1 with alpha0 <= b(theta)* b(theta) <= alpha1 on the unit sphere

    Args:
        b: Symbol
        sphere_samples: Number of quasi-uniform sphere points (d >= 2)

    Returns:
        Tuple of (alpha0, alpha1, rank_ok)
    """
    samples = sphere_samples or config.SOLVER_SETTINGS["sphere_samples"]
    theta = sphere_points(b.d, samples)
    values = symbol_eval(b, theta)
    gram = np.conj(np.swapaxes(values, -1, -2)) @ values
    eigenvalues = np.linalg.eigvalsh(gram)
    alpha0 = float(max(eigenvalues.min(), 0.0))
    alpha1 = float(eigenvalues.max())
    rank_ok = np.sqrt(alpha0) > config.SOLVER_SETTINGS["rank_tol"] * np.sqrt(alpha1)
    logger.debug(f"Ellipticity over {len(theta)} sphere points: alpha0={alpha0:.6g}, alpha1={alpha1:.6g}")
    return alpha0, alpha1, bool(rank_ok)


def _complex_sigma_ratio(b: Symbol, params: np.ndarray) -> float:
    """sigma_min(b(xi))^2 / |xi|^{2p} for xi = params[:d] + i params[d:]"""
    xi = params[: b.d] + 1j * params[b.d:]
    norm = np.linalg.norm(xi)
    if norm == 0.0:
        return 1.0
    xi = xi / norm
    value = symbol_eval(b, xi)
    gram = np.conj(value.T) @ value
    return float(np.linalg.eigvalsh(gram)[0])


def complex_rank_check(b: Symbol, trials: Optional[int] = None, seed: int = 0) -> bool:
    """
    Randomized search for complex zeros of the symbol (maximal rank over C^d)

    Each trial starts at a pseudo-random complex xi and locally minimizes the
    normalized smallest singular value. Passing is evidence, not a certificate.

    Args:
        b: Symbol
        trials: Number of random starts
        seed: Seed of the start generator

    Returns:
        True if no start descended to a rank-deficient point
    """
    trials = trials or config.SOLVER_SETTINGS["complex_rank_trials"]
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    tolerance = config.SOLVER_SETTINGS["complex_rank_tol"]
    best = np.inf
    for _ in range(trials):
        start = rng.standard_normal(2 * b.d)
        result = minimize(lambda x: _complex_sigma_ratio(b, x), start, method="BFGS",
                          options={"gtol": 1e-14, "maxiter": 200})
        value = min(result.fun, _complex_sigma_ratio(b, start))
        best = min(best, np.sqrt(max(value, 0.0)))
        if best <= tolerance:
            break
    logger.debug(f"Complex rank search: smallest normalized sigma {best:.3e} over {trials} starts")
    return bool(best > tolerance)
