"""
Extension Module
Weighted-reflection extension from a box to an enclosing torus, with the exact
Steklov averages of extended spline bases
"""
import logging
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb

import config
from core.multiindex import multi_indices_up_to
from errors import ExtensionError
from torus.field import PeriodicField
from torus.lattice import Lattice
from torus.operators import multiindex_norm
from .space import AxisBasis, GalerkinSpace

logger = logging.getLogger(__name__)

Function = Callable[[np.ndarray], np.ndarray]


def reflection_weights(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Scales lambda_l = 1/(l+1) and weights with sum_l w_l (-lambda_l)^j = 1 for j < order

    Returns:
        Tuple of (lambdas, weights)
    """
    lambdas = 1.0 / np.arange(1, order + 1)
    vandermonde = np.vander(-lambdas, order, increasing=True).T
    weights = np.linalg.solve(vandermonde, np.ones(order))
    return lambdas, weights


def smoothstep(x: np.ndarray, order: int) -> np.ndarray:
    """Generalized smoothstep with `order` vanishing derivatives at 0 and 1"""
    x = np.clip(x, 0.0, 1.0)
    total = np.zeros_like(x)
    for k in range(order + 1):
        total += comb(order + k, k) * comb(2 * order + 1, order - k) * (-x) ** k
    return x ** (order + 1) * total


class ExtensionOperator:
    """
    Extension by weighted reflection across each face of a box

    Matches derivatives 0..2p-1 at every face, then multiplies by a cutoff that
    equals one up to half the collar and vanishes at the torus seam.
    """

    def __init__(self, bounds: Sequence[Tuple[float, float]], p: int, collar: Optional[float] = None):
        self.bounds = [(float(a), float(b)) for a, b in bounds]
        self.p = p
        self.order = 2 * p
        diameter = float(np.sqrt(sum((b - a) ** 2 for a, b in self.bounds)))
        fraction = config.STUDY_DEFAULTS["collar"]
        self.collar = float(collar) if collar is not None else fraction * diameter
        if not 0.25 * diameter <= self.collar <= diameter:
            raise ExtensionError(f"collar {self.collar:.4g} outside [0.25, 1] x diameter {diameter:.4g}")
        shortest = min(b - a for a, b in self.bounds)
        if self.collar > shortest:
            raise ExtensionError(f"collar {self.collar:.4g} longer than the shortest side {shortest:.4g}")
        self.lambdas, self.weights = reflection_weights(self.order)
        self.measured_norms: Dict[int, float] = {}

    @classmethod
    def for_space(cls, space: GalerkinSpace, collar: Optional[float] = None) -> "ExtensionOperator":
        return cls(space.bounds, space.p, collar)

    @property
    def d(self) -> int:
        return len(self.bounds)

    @property
    def origin(self) -> np.ndarray:
        return np.array([a - self.collar for a, _ in self.bounds])

    @property
    def torus_lattice(self) -> Lattice:
        return Lattice.rectangular([b - a + 2.0 * self.collar for a, b in self.bounds])

    def reflection(self, x: np.ndarray, axis: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Reflected abscissae and weights along one axis

        Returns:
            Tuple of (points (order, npts), weights (order, npts)); inside the
            box only the first row is used, with weight one
        """
        a, b = self.bounds[axis]
        x = np.asarray(x, dtype=float)
        points = np.repeat(x[None, :], self.order, axis=0)
        weights = np.zeros((self.order, len(x)))
        weights[0] = 1.0
        left, right = x < a, x > b
        for l, (lam, w) in enumerate(zip(self.lambdas, self.weights)):
            points[l, left] = a + lam * (a - x[left])
            points[l, right] = b - lam * (x[right] - b)
            weights[l, left | right] = w
        return np.clip(points, a, b), weights

    def cutoff(self, x: np.ndarray, axis: int) -> np.ndarray:
        a, b = self.bounds[axis]
        half = 0.5 * self.collar
        x = np.asarray(x, dtype=float)
        left = smoothstep((x - (a - self.collar)) / half, self.order)
        right = smoothstep(((b + self.collar) - x) / half, self.order)
        return np.minimum(left, right)

    def extended_values(self, func: Function, axis_points: Sequence[np.ndarray], n: int = 1,
                        with_cutoff: bool = True) -> np.ndarray:
        """
        Extension of func on the tensor grid spanned by axis_points

        Args:
            func: Domain function, points (npts, d) -> (npts, n)
            axis_points: One array of abscissae per axis
            n: Number of components of func
            with_cutoff: Multiply by the collar cutoff

        Returns:
            Array of shape (len(x_1), ..., len(x_d), n)
        """
        reflections = [self.reflection(x, j) for j, x in enumerate(axis_points)]
        shape = tuple(len(x) for x in axis_points)
        total = np.zeros(shape + (n,), dtype=complex)
        for combo in product(range(self.order), repeat=self.d):
            mesh = np.meshgrid(*[reflections[j][0][l] for j, l in enumerate(combo)], indexing="ij")
            weight_mesh = np.meshgrid(*[reflections[j][1][l] for j, l in enumerate(combo)], indexing="ij")
            weight = np.prod(np.stack(weight_mesh), axis=0)
            if not np.any(weight):
                continue
            points = np.stack([m.ravel() for m in mesh], axis=1)
            values = np.asarray(func(points), dtype=complex).reshape(shape + (n,))
            total += weight[..., None] * values
        if with_cutoff:
            cut = np.ones(shape)
            for j, x in enumerate(axis_points):
                cut = cut * self.cutoff(x, j).reshape([-1 if i == j else 1 for i in range(self.d)])
            total *= cut[..., None]
        return total

    def torus_axes(self, grid: Sequence[int]) -> List[np.ndarray]:
        lengths = self.torus_lattice.lengths
        return [self.origin[j] + lengths[j] * np.arange(size) / size for j, size in enumerate(grid)]

    def extend(self, func: Function, grid: Sequence[int], n: int = 1) -> PeriodicField:
        """
        Extended and cut-off function sampled on the enclosing torus

        Torus coordinate y corresponds to the physical point origin + y.

        Returns:
            n x 1 PeriodicField on torus_lattice
        """
        if any(size % 2 for size in grid):
            raise ExtensionError(f"torus grid sizes must be even, got {tuple(grid)}")
        values = self.extended_values(func, self.torus_axes(grid), n)
        return PeriodicField(self.torus_lattice, values[..., None])

    def reflected_basis(self, axis_basis: AxisBasis, x: np.ndarray, r: int) -> np.ndarray:
        """
        d^r of the extended basis along one axis (r = -1: antiderivative from a)

        Returns:
            Array (npts, size)
        """
        a, b = axis_basis.a, axis_basis.b
        x = np.asarray(x, dtype=float)
        result = np.zeros((len(x), axis_basis.size))
        inside = (x >= a) & (x <= b)
        if np.any(inside):
            result[inside] = axis_basis.values(x[inside], r)
        for mask, face in ((x < a, a), (x > b, b)):
            if not np.any(mask):
                continue
            distance = np.abs(x[mask] - face)
            inward = 1.0 if face == a else -1.0
            if r < 0:
                at_face = axis_basis.values(np.array([face]), -1)[0]
                block = np.zeros((int(mask.sum()), axis_basis.size)) + (at_face if face == b else 0.0)
            else:
                block = np.zeros((int(mask.sum()), axis_basis.size))
            for lam, w in zip(self.lambdas, self.weights):
                y = np.clip(face + inward * lam * distance, a, b)
                if r < 0:
                    block += w / (-lam) * (axis_basis.values(y, -1) - at_face)
                else:
                    block += w * (-lam) ** r * axis_basis.values(y, r)
            result[mask] = block
        return result

    def steklov_basis(self, axis_basis: AxisBasis, x: np.ndarray, r: int, width: float) -> np.ndarray:
        """
        Backward average over [x - width, x] of d^r of the extended basis

        Evaluated exactly as a difference of d^(r-1) values.
        """
        if width > 0.5 * self.collar:
            raise ExtensionError(f"averaging width {width:.4g} exceeds half the collar {0.5 * self.collar:.4g}")
        x = np.asarray(x, dtype=float)
        upper = self.reflected_basis(axis_basis, x, r - 1)
        lower = self.reflected_basis(axis_basis, x - width, r - 1)
        return (upper - lower) / width

    def measure_norms(self, grid: Sequence[int], probes: Optional[Sequence["TrigProbe"]] = None,
                      max_order: Optional[int] = None) -> Dict[int, float]:
        """
        Ratios ||P u||_{H^s(torus)} / ||u||_{H^s(box)} maximized over probes, s = 0..2p

        Returns:
            Dictionary s -> measured norm, also stored on the operator
        """
        probes = probes or default_probes(self.bounds)
        max_order = self.order if max_order is None else max_order
        rule = box_rule(self.bounds)
        measured = {s: 0.0 for s in range(max_order + 1)}
        for probe in probes:
            extended = self.extend(probe, grid)
            for s in measured:
                inside = probe.box_norm(s, rule)
                if inside > 0.0:
                    measured[s] = max(measured[s], multiindex_norm(extended, s) / inside)
        self.measured_norms = measured
        logger.info(f"Extension norms: {({s: round(v, 4) for s, v in measured.items()})}")
        return measured


class TrigProbe:
    """u(x) = prod_j cos(omega_j (x_j - a_j) + phase_j) with closed-form derivatives"""

    def __init__(self, bounds: Sequence[Tuple[float, float]], omegas: Sequence[float], phases: Sequence[float]):
        self.bounds = [(float(a), float(b)) for a, b in bounds]
        self.omegas = np.asarray(omegas, dtype=float)
        self.phases = np.asarray(phases, dtype=float)

    def derivative(self, points: np.ndarray, beta: Sequence[int]) -> np.ndarray:
        points = np.atleast_2d(points)
        value = np.ones(len(points))
        for j, order in enumerate(beta):
            shift = self.omegas[j] * (points[:, j] - self.bounds[j][0]) + self.phases[j] + order * np.pi / 2
            value = value * self.omegas[j] ** order * np.cos(shift)
        return value

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.derivative(points, (0,) * len(self.bounds))[:, None]

    def box_norm(self, s: int, rule: Tuple[np.ndarray, np.ndarray]) -> float:
        points, weights = rule
        total = 0.0
        for beta in multi_indices_up_to(len(self.bounds), s):
            total += float(np.dot(weights, self.derivative(points, beta.entries) ** 2))
        return float(np.sqrt(total))


def box_rule(bounds: Sequence[Tuple[float, float]], panels: int = 32, points: int = 6):
    """Tensor composite Gauss rule on the box, (points (Q, d), weights (Q,))"""
    axes = []
    nodes, weights = np.polynomial.legendre.leggauss(points)
    for a, b in bounds:
        edges = np.linspace(a, b, panels + 1)
        left, width = edges[:-1], np.diff(edges)
        x = (left[:, None] + 0.5 * width[:, None] * (nodes + 1.0)).ravel()
        w = (0.5 * width[:, None] * weights).ravel()
        axes.append((x, w))
    mesh = np.meshgrid(*[x for x, _ in axes], indexing="ij")
    weight_mesh = np.meshgrid(*[w for _, w in axes], indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1), np.prod(np.stack([w.ravel() for w in weight_mesh]), axis=0)


def default_probes(bounds: Sequence[Tuple[float, float]]) -> List[TrigProbe]:
    probes = []
    d = len(bounds)
    for k in range(4):
        omegas = [k * np.pi / (b - a) for a, b in bounds]
        probes.append(TrigProbe(bounds, omegas, [0.0] * d))
        probes.append(TrigProbe(bounds, [w + 0.5 for w in omegas], [0.3] * d))
    return probes
