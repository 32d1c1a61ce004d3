"""
Periodic Field Module
Gamma-periodic matrix-valued fields stored as collocation samples with their
trigonometric coefficients, u(x) = sum_xi u_hat(xi) exp(i <xi, x>)
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence, Tuple

import numpy as np

from errors import ShapeError
from .lattice import Lattice


@dataclass(frozen=True, eq=False)
class PeriodicField:
    """Samples on the uniform cell grid, shape grid_shape + (rows, cols)"""

    lattice: Lattice
    values: np.ndarray
    hermitian: bool = False
    zero_mean: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        d = self.lattice.d
        if values.ndim != d + 2:
            raise ShapeError(f"field values need {d} grid axes plus (rows, cols), got shape {values.shape}")
        if any(size < 2 for size in values.shape[:d]):
            raise ShapeError(f"grid sizes must be at least 2, got {values.shape[:d]}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.hermitian:
            if values.shape[-1] != values.shape[-2]:
                raise ShapeError("a Hermitian field must be square-valued")
            adjoint = np.conj(np.swapaxes(values, -1, -2))
            scale = max(np.abs(values).max(), 1.0)
            if np.abs(values - adjoint).max() > 1e-12 * scale:
                raise ShapeError("field flagged Hermitian is not Hermitian at every node")
        if self.zero_mean:
            scale = max(np.abs(values).max(), 1.0)
            if np.abs(self.mean()).max() > 1e-12 * scale:
                raise ShapeError("field flagged zero-mean has a nonzero mean coefficient")

    # construction

    @classmethod
    def from_coeffs(cls, lattice: Lattice, coeffs: np.ndarray, **flags) -> "PeriodicField":
        coeffs = np.asarray(coeffs, dtype=complex)
        axes = tuple(range(lattice.d))
        total = int(np.prod(coeffs.shape[: lattice.d]))
        values = np.fft.ifftn(coeffs * total, axes=axes)
        return cls(lattice, values, **flags)

    @classmethod
    def from_function(cls, lattice: Lattice, grid: Sequence[int],
                      func: Callable[[np.ndarray], np.ndarray], **flags) -> "PeriodicField":
        """Sample func(points) -> (npoints, rows, cols) at the grid nodes"""
        points = grid_nodes(lattice, grid)
        flat = np.asarray(func(points.reshape(-1, lattice.d)), dtype=complex)
        if flat.ndim == 1:
            flat = flat[:, None, None]
        return cls(lattice, flat.reshape(tuple(grid) + flat.shape[1:]), **flags)

    @classmethod
    def constant(cls, lattice: Lattice, grid: Sequence[int], matrix) -> "PeriodicField":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
        values = np.broadcast_to(matrix, tuple(grid) + matrix.shape)
        return cls(lattice, values)

    @classmethod
    def zeros(cls, lattice: Lattice, grid: Sequence[int], shape: Tuple[int, int]) -> "PeriodicField":
        return cls(lattice, np.zeros(tuple(grid) + tuple(shape), dtype=complex))

    # geometry of the grid

    @property
    def d(self) -> int:
        return self.lattice.d

    @property
    def grid_shape(self) -> Tuple[int, ...]:
        return self.values.shape[: self.d]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape[-2:]

    @property
    def cutoff(self) -> Tuple[int, ...]:
        """Per-dimension mode counts N_j"""
        return self.grid_shape

    @property
    def total_modes(self) -> int:
        return int(np.prod(self.grid_shape))

    @cached_property
    def coeffs(self) -> np.ndarray:
        axes = tuple(range(self.d))
        return np.fft.fftn(self.values, axes=axes) / self.total_modes

    @cached_property
    def integer_modes(self) -> np.ndarray:
        return integer_mode_grid(self.grid_shape)

    @cached_property
    def wavevectors(self) -> np.ndarray:
        """xi at every mode, shape grid_shape + (d,)"""
        return self.integer_modes @ self.lattice.dual_basis

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True at modes outside the Nyquist layer"""
        return nyquist_free_mask(self.grid_shape)

    def mean(self) -> np.ndarray:
        return self.coeffs[(0,) * self.d]

    # algebra

    def with_values(self, values: np.ndarray, **flags) -> "PeriodicField":
        return PeriodicField(self.lattice, values, **flags)

    def with_coeffs(self, coeffs: np.ndarray, **flags) -> "PeriodicField":
        return PeriodicField.from_coeffs(self.lattice, coeffs, **flags)

    def adjoint(self) -> "PeriodicField":
        return self.with_values(np.conj(np.swapaxes(self.values, -1, -2)))

    def column(self, k: int) -> "PeriodicField":
        return self.with_values(self.values[..., :, k:k + 1])

    def _check_compatible(self, other: "PeriodicField"):
        if self.grid_shape != other.grid_shape:
            raise ShapeError(f"grid mismatch: {self.grid_shape} vs {other.grid_shape}")

    def __add__(self, other):
        if isinstance(other, PeriodicField):
            self._check_compatible(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + np.asarray(other))

    def __sub__(self, other):
        if isinstance(other, PeriodicField):
            self._check_compatible(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - np.asarray(other))

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def left_multiply(self, matrix: np.ndarray) -> "PeriodicField":
        """Pointwise M @ u(x) for a constant matrix M"""
        return self.with_values(np.asarray(matrix) @ self.values)

    def right_multiply(self, matrix: np.ndarray) -> "PeriodicField":
        return self.with_values(self.values @ np.asarray(matrix))

    def nodes(self) -> np.ndarray:
        return grid_nodes(self.lattice, self.grid_shape)

    def is_real(self, tol: float = 1e-10) -> bool:
        scale = max(np.abs(self.values).max(), 1e-300)
        return bool(np.abs(self.values.imag).max() <= tol * scale)


def integer_mode_grid(grid: Sequence[int]) -> np.ndarray:
    """Integer dual coordinates k in numpy FFT order, shape grid + (d,)"""
    axes = [np.fft.fftfreq(size, 1.0 / size) for size in grid]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)


def nyquist_free_mask(grid: Sequence[int]) -> np.ndarray:
    mesh = np.meshgrid(*[np.fft.fftfreq(size, 1.0 / size) for size in grid], indexing="ij")
    mask = np.ones(tuple(grid), dtype=bool)
    for size, modes in zip(grid, mesh):
        if size % 2 == 0:
            mask &= modes != -(size // 2)
    return mask


def grid_nodes(lattice: Lattice, grid: Sequence[int]) -> np.ndarray:
    """Collocation nodes x = sum_j (i_j / N_j) n_j, shape grid + (d,)"""
    fractions = np.meshgrid(*[np.arange(size) / size for size in grid], indexing="ij")
    return np.stack(fractions, axis=-1) @ lattice.basis
