"""
Multi-index Module
Multi-indices alpha in Z_+^d with the componentwise partial order
"""
from dataclasses import dataclass
from itertools import product
from math import comb, prod
from typing import Iterator, List, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class MultiIndex:
    """Nonnegative integer vector alpha with order |alpha| = sum(alpha)"""

    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(e < 0 for e in entries):
            raise ValueError(f"multi-index entries must be nonnegative, got {entries}")
        object.__setattr__(self, "entries", entries)

    @property
    def order(self) -> int:
        return sum(self.entries)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __le__(self, other: "MultiIndex") -> bool:
        if self.dim != other.dim:
            raise ValueError("multi-indices of different dimension are not comparable")
        return all(a <= b for a, b in zip(self.entries, other.entries))

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __iter__(self):
        return iter(self.entries)

    def binomial(self, beta: "MultiIndex") -> int:
        """Product of binomial coefficients C(alpha_j, beta_j)"""
        return prod(comb(a, b) for a, b in zip(self.entries, beta.entries))

    def monomial(self, xi: np.ndarray) -> np.ndarray:
        """
        Evaluate xi^alpha = prod_j xi_j^alpha_j

        Args:
            xi: Array whose last axis has length d

        Returns:
            Array of monomial values over the leading axes
        """
        xi = np.asarray(xi)
        if xi.shape[-1] != self.dim:
            raise ValueError(f"expected last axis of length {self.dim}, got {xi.shape[-1]}")
        result = np.ones(xi.shape[:-1], dtype=np.result_type(xi.dtype, float))
        for j, power in enumerate(self.entries):
            if power:
                result = result * xi[..., j] ** power
        return result

    @classmethod
    def unit(cls, d: int, j: int) -> "MultiIndex":
        entries = [0] * d
        entries[j] = 1
        return cls(tuple(entries))

    @classmethod
    def zero(cls, d: int) -> "MultiIndex":
        return cls((0,) * d)


def multi_indices(d: int, order: int) -> List[MultiIndex]:
    """All multi-indices in Z_+^d of exactly the given order, lexicographically descending"""
    found = [
        MultiIndex(entries)
        for entries in product(range(order, -1, -1), repeat=d)
        if sum(entries) == order
    ]
    return found


def multi_indices_up_to(d: int, order: int) -> List[MultiIndex]:
    """All multi-indices with |beta| <= order, grouped by increasing order"""
    result: List[MultiIndex] = []
    for k in range(order + 1):
        result.extend(multi_indices(d, k))
    return result


def sub_indices(alpha: MultiIndex) -> Iterator[MultiIndex]:
    """All beta <= alpha (Leibniz-rule splits)"""
    for entries in product(*(range(a + 1) for a in alpha.entries)):
        yield MultiIndex(entries)


def as_multiindex(value: Sequence[int]) -> MultiIndex:
    if isinstance(value, MultiIndex):
        return value
    return MultiIndex(tuple(value))
