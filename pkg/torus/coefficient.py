"""
Coefficient Module
Hermitian positive definite periodic coefficient g(x) with its L-infinity constants
"""
import logging
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Optional

import numpy as np

from errors import DomainError
from .field import PeriodicField
from .operators import evaluate

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CoefficientG:
    """Coefficient field with measured sup |g| and sup |g^{-1}|"""

    field: PeriodicField
    expression: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "g"
    g_inf: float = dataclass_field(init=False)
    ginv_inf: float = dataclass_field(init=False)
    min_eigenvalue: float = dataclass_field(init=False)

    def __post_init__(self):
        values = self.field.values
        if values.shape[-1] != values.shape[-2]:
            raise DomainError(f"coefficient must be square-valued, got {values.shape[-2:]}")
        if not self.field.hermitian:
            object.__setattr__(self, "field", self.field.with_values(values, hermitian=True))
        eigenvalues = np.linalg.eigvalsh(self.field.values)
        smallest = float(eigenvalues.min())
        if smallest <= 0.0:
            node = np.unravel_index(np.argmin(eigenvalues.min(axis=-1)), self.field.grid_shape)
            raise DomainError(f"coefficient {self.label} is not positive definite at node {node}")
        object.__setattr__(self, "min_eigenvalue", smallest)
        object.__setattr__(self, "g_inf", float(eigenvalues.max()))
        object.__setattr__(self, "ginv_inf", float((1.0 / eigenvalues).max()))
        logger.debug(f"Coefficient {self.label}: |g|={self.g_inf:.6g}, |g^-1|={self.ginv_inf:.6g}")

    @property
    def m(self) -> int:
        return self.field.shape[0]

    @property
    def lattice(self):
        return self.field.lattice

    @property
    def contrast(self) -> float:
        return self.g_inf * self.ginv_inf

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """g at arbitrary points (npoints, d) -> (npoints, m, m)"""
        points = np.atleast_2d(points)
        if self.expression is not None:
            return np.asarray(self.expression(points), dtype=complex).reshape(len(points), self.m, self.m)
        return evaluate(self.field, points)

    def scaled(self, factor: float) -> "CoefficientG":
        expression = None
        if self.expression is not None:
            base = self.expression
            expression = lambda points: factor * np.asarray(base(points))
        return CoefficientG(self.field * factor, expression=expression, label=f"{factor}*{self.label}")

    def inverse_field(self) -> PeriodicField:
        return self.field.with_values(np.linalg.inv(self.field.values))
