"""
Galerkin Space Module
Tensor-product B-spline spaces on intervals and axis-aligned rectangles with
natural (Neumann) boundary conditions
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import BSpline

from errors import DomainError, ShapeError

logger = logging.getLogger(__name__)

FAMILY_BSPLINE_1D = "bspline_1d"
FAMILY_Q1_2D = "q1_2d"

EVALUATION_CHUNK = 2048


def default_degree(p: int) -> int:
    """Degree with room for derivatives up to 2p - 1 of the reflected basis"""
    return max(p + 1, 2 * p - 1)


def open_knot_vector(a: float, b: float, elements: int, degree: int, multiplicity: int) -> np.ndarray:
    """Open knot vector with interior knots repeated `multiplicity` times"""
    breaks = np.linspace(a, b, elements + 1)
    interior = np.repeat(breaks[1:-1], multiplicity)
    return np.concatenate([np.full(degree + 1, a), interior, np.full(degree + 1, b)])


@dataclass(frozen=True, eq=False)
class AxisBasis:
    """One-dimensional spline basis on [a, b]"""

    a: float
    b: float
    elements: int
    degree: int
    continuity: int

    def __post_init__(self):
        if self.b <= self.a:
            raise DomainError(f"empty interval [{self.a}, {self.b}]")
        if self.elements < 1:
            raise DomainError("an axis needs at least one element")
        if not -1 <= self.continuity < self.degree:
            raise DomainError(f"continuity C^{self.continuity} impossible for degree {self.degree}")

    @cached_property
    def knots(self) -> np.ndarray:
        return open_knot_vector(self.a, self.b, self.elements, self.degree, self.degree - self.continuity)

    @property
    def size(self) -> int:
        return len(self.knots) - self.degree - 1

    @cached_property
    def breakpoints(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.elements + 1)

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.elements

    @cached_property
    def spline(self) -> BSpline:
        return BSpline(self.knots, np.eye(self.size), self.degree, extrapolate=True)

    @lru_cache(maxsize=None)
    def _spline_for(self, nu: int) -> BSpline:
        if nu > 0:
            return self.spline.derivative(nu)
        if nu == 0:
            return self.spline
        return self.spline.antiderivative(-nu)

    def values(self, x: np.ndarray, nu: int = 0) -> np.ndarray:
        """
        Basis derivatives of order nu (nu = -1 gives antiderivatives from a)

        Args:
            x: Points in [a, b]
            nu: Derivative order

        Returns:
            Dense array (npoints, size)
        """
        x = np.asarray(x, dtype=float)
        if nu > self.degree:
            return np.zeros((len(x), self.size))
        spline = self._spline_for(nu)
        result = np.empty((len(x), self.size))
        for start in range(0, len(x), EVALUATION_CHUNK):
            result[start:start + EVALUATION_CHUNK] = spline(x[start:start + EVALUATION_CHUNK])
        if nu < 0:
            result -= spline(np.array([self.a]))[0]
        return result

    def matrix(self, x: np.ndarray, nu: int = 0) -> sp.csr_matrix:
        x = np.asarray(x, dtype=float)
        blocks = [sp.csr_matrix(self.values(x[start:start + EVALUATION_CHUNK], nu))
                  for start in range(0, len(x), EVALUATION_CHUNK)]
        return sp.vstack(blocks, format="csr")

    def gauss_rule(self, points: int, panels: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """Composite Gauss-Legendre rule with `panels` panels per element"""
        nodes, weights = np.polynomial.legendre.leggauss(points)
        edges = np.linspace(self.a, self.b, self.elements * panels + 1)
        left, width = edges[:-1], np.diff(edges)
        x = (left[:, None] + 0.5 * width[:, None] * (nodes[None, :] + 1.0)).ravel()
        w = (0.5 * width[:, None] * weights[None, :]).ravel()
        return x, w


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Tensor Gauss rule: per-axis nodes and weights plus the flattened product"""

    axis_points: Tuple[np.ndarray, ...]
    axis_weights: Tuple[np.ndarray, ...]
    panels: int

    @cached_property
    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axis_points, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @cached_property
    def weights(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axis_weights, indexing="ij")
        return np.prod(np.stack([m.ravel() for m in mesh], axis=1), axis=1)

    @property
    def size(self) -> int:
        return int(np.prod([len(x) for x in self.axis_points]))


@dataclass(frozen=True, eq=False)
class GalerkinSpace:
    """H^p-conforming spline space for n-vector fields on a box"""

    axes: Tuple[AxisBasis, ...]
    p: int
    n: int = 1
    family: str = FAMILY_BSPLINE_1D

    def __post_init__(self):
        if self.family == FAMILY_BSPLINE_1D and len(self.axes) != 1:
            raise ShapeError("bspline_1d spaces are one-dimensional")
        if self.family == FAMILY_Q1_2D and (len(self.axes) != 2 or self.p != 1):
            raise ShapeError("q1_2d spaces are two-dimensional and limited to p = 1")
        for axis in self.axes:
            if axis.continuity < self.p - 1:
                raise DomainError(f"C^{axis.continuity} splines are not in H^{self.p}")

    @classmethod
    def interval(cls, a: float, b: float, elements: int, p: int, n: int = 1,
                 degree: Optional[int] = None) -> "GalerkinSpace":
        degree = degree or default_degree(p)
        return cls((AxisBasis(a, b, elements, degree, p - 1),), p, n, FAMILY_BSPLINE_1D)

    @classmethod
    def rectangle(cls, bounds: Sequence[Tuple[float, float]], elements: Sequence[int], n: int = 1) -> "GalerkinSpace":
        axes = tuple(AxisBasis(a, b, e, 1, 0) for (a, b), e in zip(bounds, elements))
        return cls(axes, 1, n, FAMILY_Q1_2D)

    @classmethod
    def build(cls, bounds: Sequence[Tuple[float, float]], elements: Sequence[int], p: int, n: int = 1):
        if len(bounds) == 1:
            return cls.interval(bounds[0][0], bounds[0][1], int(elements[0]), p, n)
        if len(bounds) == 2:
            return cls.rectangle(bounds, elements, n)
        raise ShapeError(f"bounded-domain spaces exist for d = 1, 2 only, got d = {len(bounds)}")

    def with_elements(self, elements: Sequence[int]) -> "GalerkinSpace":
        axes = tuple(AxisBasis(ax.a, ax.b, int(e), ax.degree, ax.continuity) for ax, e in zip(self.axes, elements))
        return GalerkinSpace(axes, self.p, self.n, self.family)

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def bounds(self) -> List[Tuple[float, float]]:
        return [(axis.a, axis.b) for axis in self.axes]

    @property
    def scalar_size(self) -> int:
        return int(np.prod([axis.size for axis in self.axes]))

    @property
    def dof_count(self) -> int:
        return self.n * self.scalar_size

    @property
    def volume(self) -> float:
        return float(np.prod([axis.b - axis.a for axis in self.axes]))

    @property
    def diameter(self) -> float:
        return float(np.sqrt(sum((axis.b - axis.a) ** 2 for axis in self.axes)))

    def quadrature(self, panels: int = 1) -> QuadratureRule:
        rules = [axis.gauss_rule(axis.degree + 2, panels) for axis in self.axes]
        return QuadratureRule(tuple(r[0] for r in rules), tuple(r[1] for r in rules), panels)

    def basis_matrix(self, rule: QuadratureRule, beta: Sequence[int]) -> sp.csr_matrix:
        """Scalar basis derivatives d^beta at the rule's tensor points, (Q, scalar_size)"""
        matrices = [axis.matrix(x, int(order)) for axis, x, order in zip(self.axes, rule.axis_points, beta)]
        result = matrices[0]
        for matrix in matrices[1:]:
            result = sp.kron(result, matrix, format="csr")
        return result

    def evaluate(self, coeffs: np.ndarray, points: np.ndarray, beta: Optional[Sequence[int]] = None) -> np.ndarray:
        """
        d^beta u at scattered points

        Args:
            coeffs: Coefficient vector of length dof_count
            points: Array (npoints, d) inside the box
            beta: Derivative multi-index (zero when omitted)

        Returns:
            Array (npoints, n)
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        beta = tuple(beta) if beta is not None else (0,) * self.d
        tensor = self.coefficient_tensor(coeffs)
        if self.d == 1:
            return self.axes[0].values(points[:, 0], beta[0]) @ tensor
        first = self.axes[0].values(points[:, 0], beta[0])
        second = self.axes[1].values(points[:, 1], beta[1])
        return np.einsum("pi,ijr,pj->pr", first, tensor, second)

    def coefficient_tensor(self, coeffs: np.ndarray) -> np.ndarray:
        """Coefficients reshaped to (size_1, ..., size_d, n)"""
        coeffs = np.asarray(coeffs)
        if coeffs.shape != (self.dof_count,):
            raise ShapeError(f"expected {self.dof_count} coefficients, got {coeffs.shape}")
        shape = tuple(axis.size for axis in self.axes)
        return coeffs.reshape((self.n,) + shape).transpose(tuple(range(1, self.d + 1)) + (0,))

    def partition_of_unity_defect(self, rule: Optional[QuadratureRule] = None) -> float:
        rule = rule or self.quadrature()
        total = np.asarray(self.basis_matrix(rule, (0,) * self.d).sum(axis=1)).ravel()
        return float(np.abs(total - 1.0).max())
