"""
Lattice Module
Periodicity lattice Gamma, its dual lattice and the cell constants r0, r1
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from errors import DomainError, ShapeError


@dataclass(frozen=True, eq=False)
class Lattice:
    """Lattice spanned by the rows of `basis`; the cell is the parallelepiped they span"""

    basis: np.ndarray

    def __post_init__(self):
        basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if basis.shape[0] != basis.shape[1]:
            raise ShapeError(f"lattice basis must be square, got {basis.shape}")
        if abs(np.linalg.det(basis)) <= 0.0:
            raise ShapeError("lattice basis is degenerate")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def rectangular(cls, lengths: Sequence[float]) -> "Lattice":
        lengths = [float(length) for length in lengths]
        if any(length <= 0 for length in lengths):
            raise ShapeError(f"cell side lengths must be positive, got {lengths}")
        return cls(np.diag(lengths))

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def dual_basis(self) -> np.ndarray:
        """Rows s_i with <s_i, n_j> = 2 pi delta_ij"""
        return 2.0 * np.pi * np.linalg.inv(self.basis).T

    @cached_property
    def cell_volume(self) -> float:
        return float(abs(np.linalg.det(self.basis)))

    @property
    def is_rectangular(self) -> bool:
        off_diagonal = self.basis - np.diag(np.diag(self.basis))
        return bool(np.all(off_diagonal == 0.0))

    @property
    def lengths(self) -> np.ndarray:
        """Side lengths L_j of a rectangular cell"""
        if not self.is_rectangular:
            raise DomainError("side lengths are defined for rectangular lattices only")
        return np.abs(np.diag(self.basis))

    @cached_property
    def r0(self) -> float:
        """Half the shortest nonzero dual-lattice vector"""
        # coefficients in {-2..2} reach the shortest vector of a reduced basis
        grids = np.meshgrid(*[np.arange(-2, 3)] * self.d, indexing="ij")
        coefficients = np.stack([g.ravel() for g in grids], axis=1)
        coefficients = coefficients[np.any(coefficients != 0, axis=1)]
        lengths = np.linalg.norm(coefficients @ self.dual_basis, axis=1)
        return 0.5 * float(lengths.min())

    @cached_property
    def r1(self) -> float:
        """Half the diameter of the cell"""
        grids = np.meshgrid(*[np.array([0.0, 1.0])] * self.d, indexing="ij")
        corners = np.stack([g.ravel() for g in grids], axis=1) @ self.basis
        differences = corners[:, None, :] - corners[None, :, :]
        return 0.5 * float(np.linalg.norm(differences, axis=2).max())

    def scaled(self, factor: float) -> "Lattice":
        return Lattice(factor * self.basis)

    def to_dict(self) -> dict:
        return {"basis": self.basis.tolist()}
