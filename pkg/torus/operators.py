"""
Torus Operators Module
Fourier-multiplier actions on periodic fields: b(D), derivatives, Steklov
smoothing, eps-rescaling, Sobolev norms and pointwise products
"""
import logging
from typing import Optional, Sequence

import numpy as np

import config
from core.multiindex import MultiIndex, as_multiindex, multi_indices_up_to
from core.symbol import Symbol, symbol_eval
from errors import DomainError, ShapeError
from .field import PeriodicField
from .lattice import Lattice

logger = logging.getLogger(__name__)


def symbol_on_grid(b: Symbol, u: PeriodicField) -> np.ndarray:
    """b(xi) at every mode of u's grid, Nyquist layer zeroed"""
    if b.d != u.d:
        raise ShapeError(f"symbol dimension {b.d} does not match field dimension {u.d}")
    values = symbol_eval(b, u.wavevectors)
    return values * u.nyquist_mask[..., None, None]


def apply_multiplier(u: PeriodicField, multiplier: np.ndarray) -> PeriodicField:
    """Multiply coefficients by a scalar (grid) or matrix (grid + (r, s)) multiplier"""
    multiplier = np.asarray(multiplier)
    if multiplier.shape == u.grid_shape:
        return u.with_coeffs(u.coeffs * multiplier[..., None, None])
    return u.with_coeffs(multiplier @ u.coeffs)


def apply_bD(b: Symbol, u: PeriodicField) -> PeriodicField:
    """
    Apply b(D) coefficient-wise

    Args:
        b: Symbol with m x n coefficients
        u: Field with n rows

    Returns:
        Field with m rows
    """
    if u.shape[0] != b.n:
        raise ShapeError(f"b(D) expects {b.n} rows, field has {u.shape[0]}")
    return apply_multiplier(u, symbol_on_grid(b, u))


def apply_bD_adjoint(b: Symbol, v: PeriodicField) -> PeriodicField:
    """Apply b(D)* (multiplier b(xi)*)"""
    if v.shape[0] != b.m:
        raise ShapeError(f"b(D)* expects {b.m} rows, field has {v.shape[0]}")
    values = symbol_on_grid(b, v)
    return apply_multiplier(v, np.conj(np.swapaxes(values, -1, -2)))


def derivative_multiplier(u: PeriodicField, beta: Sequence[int]) -> np.ndarray:
    beta = as_multiindex(beta)
    return (1j ** beta.order) * beta.monomial(u.wavevectors) * u.nyquist_mask


def apply_derivative(u: PeriodicField, beta: Sequence[int]) -> PeriodicField:
    """partial^beta u, multiplier (i xi)^beta"""
    return apply_multiplier(u, derivative_multiplier(u, beta))


def apply_D(u: PeriodicField, beta: Sequence[int]) -> PeriodicField:
    """D^beta u, multiplier xi^beta"""
    beta = as_multiindex(beta)
    return apply_multiplier(u, beta.monomial(u.wavevectors) * u.nyquist_mask)


def steklov_multiplier(xi, eps: float, lattice: Lattice):
    """
    Fourier multiplier of the Steklov average over eps * cell

    Args:
        xi: Wave vector(s), last axis of length d
        eps: Scale parameter
        lattice: Rectangular periodicity lattice

    Returns:
        prod_j sinc(eps xi_j L_j / 2)
    """
    if not lattice.is_rectangular:
        raise DomainError("Steklov multiplier is implemented for rectangular lattices only")
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != lattice.d:
        raise ShapeError(f"xi must have last axis of length {lattice.d}")
    t = eps * xi * lattice.lengths / 2.0
    value = np.prod(np.sinc(t / np.pi), axis=-1)
    return value.astype(complex) if isinstance(value, np.ndarray) else complex(value)


def apply_steklov(u: PeriodicField, eps: float, cell: Optional[Lattice] = None) -> PeriodicField:
    """S_eps u with averaging cell `cell` (defaults to u's own lattice)"""
    cell = cell or u.lattice
    return apply_multiplier(u, steklov_multiplier(u.wavevectors, eps, cell))


def eps_to_k(eps: float) -> int:
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    k = int(round(1.0 / eps))
    if k < 1 or abs(1.0 / eps - k) > 1e-9 * max(k, 1):
        raise DomainError(f"eps must be the reciprocal of a positive integer, got {eps}")
    return k


def rescale_to_eps(f: PeriodicField, eps: float) -> PeriodicField:
    """f(x / eps) for eps = 1/k: grid values tiled k times per axis"""
    k = eps_to_k(eps)
    if k == 1:
        return f
    reps = (k,) * f.d + (1, 1)
    return PeriodicField(f.lattice, np.tile(f.values, reps), hermitian=f.hermitian)


def norms(u: PeriodicField, s: int = 0) -> float:
    """(sum_xi (1 + |xi|^2)^s |u_hat(xi)|^2 |Omega|)^{1/2}; s = 0 is the L2 norm"""
    if s < 0:
        raise ValueError("Sobolev index must be nonnegative")
    weight = (1.0 + np.sum(u.wavevectors ** 2, axis=-1)) ** s
    energy = np.sum(weight[..., None, None] * np.abs(u.coeffs) ** 2)
    return float(np.sqrt(u.lattice.cell_volume * energy))


def multiindex_norm(u: PeriodicField, p: int) -> float:
    """(sum_{|beta| <= p} ||D^beta u||^2)^{1/2}"""
    weight = np.zeros(u.grid_shape)
    for beta in multi_indices_up_to(u.d, p):
        weight += np.abs(beta.monomial(u.wavevectors)) ** 2
    energy = np.sum(weight[..., None, None] * np.abs(u.coeffs) ** 2)
    return float(np.sqrt(u.lattice.cell_volume * energy))


def _padded_indices(grid: Sequence[int], padded: Sequence[int]):
    return np.ix_(*[np.mod(np.fft.fftfreq(n, 1.0 / n).astype(int), m) for n, m in zip(grid, padded)])


def multiply(f: PeriodicField, h: PeriodicField, dealias: bool = False) -> PeriodicField:
    """
    Pointwise matrix product f(x) @ h(x)

    Args:
        f: Left factor
        h: Right factor on the same grid
        dealias: Evaluate on a zero-padded grid and truncate back

    Returns:
        Product field on the common grid
    """
    f._check_compatible(h)
    if f.shape[1] != h.shape[0]:
        raise ShapeError(f"cannot multiply fields of shapes {f.shape} and {h.shape}")
    if not dealias:
        return f.with_values(f.values @ h.values)
    factor = config.SOLVER_SETTINGS["dealias"]
    padded = tuple(int(2 * np.ceil(factor * n / 2)) for n in f.grid_shape)
    index = _padded_indices(f.grid_shape, padded)
    axes = tuple(range(f.d))
    total = int(np.prod(padded))

    def upsample(u: PeriodicField) -> np.ndarray:
        coeffs = np.zeros(padded + u.shape, dtype=complex)
        coeffs[index] = u.coeffs
        return np.fft.ifftn(coeffs * total, axes=axes)

    product = upsample(f) @ upsample(h)
    coeffs = np.fft.fftn(product, axes=axes) / total
    return f.with_coeffs(coeffs[index])


def evaluate(u: PeriodicField, points: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """
    Trigonometric interpolant of u at arbitrary points

    The Nyquist mode enters as a cosine so that real samples interpolate to real values.

    Args:
        u: Periodic field
        points: Array (npoints, d)

    Returns:
        Array (npoints, rows, cols)
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != u.d:
        raise ShapeError(f"points must have {u.d} columns")
    # phase along each lattice direction: <s_j, x>
    phases = points @ u.lattice.dual_basis.T
    result = np.empty((len(points),) + u.shape, dtype=complex)
    modes = [np.fft.fftfreq(n, 1.0 / n) for n in u.grid_shape]
    for start in range(0, len(points), chunk):
        block = phases[start:start + chunk]
        tensor = None
        for j, (n, k) in enumerate(zip(u.grid_shape, modes)):
            basis = np.exp(1j * np.outer(block[:, j], k))
            if n % 2 == 0:
                basis[:, n // 2] = np.cos(block[:, j] * (n // 2))
            if tensor is None:
                tensor = np.tensordot(basis, u.coeffs, axes=([1], [0]))
            else:
                tensor = np.einsum("pk,pk...->p...", basis, tensor)
        result[start:start + chunk] = tensor
    return result


def trigonometric_field(lattice: Lattice, grid: Sequence[int], modes: Sequence[dict]) -> PeriodicField:
    """Scalar field sum a cos/sin(<xi_k, x>) from mode dictionaries {wave, amplitude, kind}"""
    def func(points: np.ndarray) -> np.ndarray:
        total = np.zeros(len(points))
        for mode in modes:
            xi = np.asarray(mode["wave"], dtype=float) @ lattice.dual_basis
            phase = points @ xi
            kind = mode.get("kind", "cos")
            total += mode.get("amplitude", 1.0) * (np.cos(phase) if kind == "cos" else np.sin(phase))
        return total
    return PeriodicField.from_function(lattice, grid, func)


def zero_mode_projection(u: PeriodicField) -> PeriodicField:
    coeffs = u.coeffs.copy()
    coeffs[(0,) * u.d] = 0.0
    return u.with_coeffs(coeffs, zero_mean=True)


def unit_derivatives(d: int):
    return [MultiIndex.unit(d, j) for j in range(d)]


def steklov_product_bound_check(f: PeriodicField, u: PeriodicField, eps: float):
    """
    Measure both sides of ||[f^eps] S_eps u|| <= |Omega|^{-1/2} ||f||_{L2(Omega)} ||u||

    Args:
        f: Cell-periodic multiplier on its own grid
        u: Field on the data torus; its grid must equal k times f's grid
        eps: 1/k

    Returns:
        Tuple of (measured, bound)
    """
    f_eps = rescale_to_eps(f, eps)
    if f_eps.grid_shape != u.grid_shape:
        raise ShapeError(f"rescaled multiplier grid {f_eps.grid_shape} does not match {u.grid_shape}")
    smoothed = apply_steklov(u, eps, f.lattice)
    measured = norms(multiply(f_eps, smoothed), 0)
    bound = norms(f, 0) * norms(u, 0) / np.sqrt(f.lattice.cell_volume)
    return measured, bound


def resample_field(u: PeriodicField, grid: Sequence[int]) -> PeriodicField:
    """
    Spectral interpolation onto another grid of the same lattice

    Modes below both Nyquist limits are kept; the rest are dropped.
    """
    grid = tuple(int(size) for size in grid)
    if len(grid) != u.d:
        raise ShapeError(f"grid {grid} does not match dimension {u.d}")
    if grid == u.grid_shape:
        return u
    modes = u.integer_modes
    limits = np.minimum(np.asarray(u.grid_shape), np.asarray(grid)) / 2.0
    keep = np.all(np.abs(modes) < limits, axis=-1)
    coeffs = np.zeros(grid + u.shape, dtype=complex)
    kept = modes[keep].astype(int)
    index = tuple(np.mod(kept[:, j], grid[j]) for j in range(u.d))
    coeffs[index] = u.coeffs[keep]
    return PeriodicField.from_coeffs(u.lattice, coeffs)
