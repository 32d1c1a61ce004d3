"""
Expression Vocabulary Module
Closed-form coefficients, symbols and right-hand sides named in study configurations
"""
import itertools
import logging
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.symbol import Symbol, gradient_symbol, hessian_symbol, power_symbol, symbol_from_terms
from errors import ConfigError
from storage.field_dump import read_field
from torus.coefficient import CoefficientG
from torus.field import PeriodicField
from torus.lattice import Lattice

logger = logging.getLogger(__name__)

Expression = Callable[[np.ndarray], np.ndarray]


def complex_entry(value: Any) -> complex:
    """A number or an [re, im] pair"""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex entry {value!r} is not an [re, im] pair")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def complex_matrix(value: Any, size: Optional[int] = None) -> np.ndarray:
    """Scalar (times the identity of `size`) or nested rows of complex entries"""
    if isinstance(value, (int, float)):
        return complex(value) * np.eye(size or 1, dtype=complex)
    rows = [[complex_entry(entry) for entry in row] for row in value]
    return np.asarray(rows, dtype=complex)


# symbols

def build_symbol(spec: Dict[str, Any], dimension: int, order: int) -> Symbol:
    """Symbol from its configuration entry, scaled and with measured ellipticity constants"""
    kind = spec["type"]
    if kind == "gradient":
        b = gradient_symbol(dimension)
    elif kind == "power":
        b = power_symbol(order)
    elif kind == "hessian":
        b = hessian_symbol()
    elif kind == "terms":
        b = symbol_from_terms(order, dimension,
                              [(term["alpha"], complex_matrix(term["matrix"])) for term in spec["terms"]])
    else:
        raise ConfigError(f"unknown symbol type {kind!r}")
    scale = spec.get("scale", 1.0)
    if scale != 1.0:
        b = b.scaled(scale)
    return b.with_ellipticity()


# scalar trigonometric profiles

def trig_profile(lattice: Lattice, mean: float, modes: Sequence[Dict[str, Any]],
                 axes: Optional[Sequence[int]] = None) -> Expression:
    """
    Scalar mean + sum a cos/sin(<xi_k, x>) on the lattice

    When `axes` is given, waves list integer frequencies along those
    coordinates only.
    """
    lengths = lattice.lengths

    def profile(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        total = np.full(len(points), float(mean))
        for mode in modes:
            wave = np.asarray(mode["wave"], dtype=float)
            if axes is None:
                phase = points @ (wave @ lattice.dual_basis)
            else:
                phase = sum(2.0 * np.pi * k * points[:, axis] / lengths[axis] for k, axis in zip(wave, axes))
            kind = mode.get("kind", "cos")
            amplitude = float(mode.get("amplitude", 1.0))
            total = total + amplitude * (np.sin(phase) if kind == "sin" else np.cos(phase))
        return total

    return profile


# coefficient vocabulary

def _constant(spec, lattice, m) -> Expression:
    value = complex_matrix(spec["value"], m)

    def expression(points):
        return np.broadcast_to(value, (len(points),) + value.shape).copy()
    return expression


def _two_phase(spec, lattice, m) -> Expression:
    first, second = (complex_matrix(value, m) for value in spec["values"])
    fraction = float(spec.get("fraction", 0.5))
    axis = int(spec.get("axis", 0))
    length = lattice.lengths[axis]

    def expression(points):
        local = np.mod(points[:, axis], length)
        inside = (local < fraction * length - 1e-12 * length)[:, None, None]
        return np.where(inside, first, second)
    return expression


def _trig_polynomial(spec, lattice, m) -> Expression:
    profile = trig_profile(lattice, spec["mean"], spec.get("modes", []))
    identity = np.eye(m)

    def expression(points):
        return profile(points)[:, None, None] * identity
    return expression


def _reciprocal_trig_polynomial(spec, lattice, m) -> Expression:
    profile = trig_profile(lattice, spec["mean"], spec.get("modes", []))
    identity = np.eye(m)

    def expression(points):
        values = profile(points)
        if np.any(values <= 0):
            raise ConfigError("reciprocal trigonometric polynomial has a nonpositive denominator")
        return (1.0 / values)[:, None, None] * identity
    return expression


def _laminate(spec, lattice, m) -> Expression:
    """diag(a(x2), b(x1)): the columns are divergence-free for the gradient"""
    if lattice.d != 2 or m != 2:
        raise ConfigError("laminate coefficient needs d = 2 and m = 2")
    a = trig_profile(lattice, spec["a"]["mean"], spec["a"].get("modes", []), axes=(1,))
    b = trig_profile(lattice, spec["b"]["mean"], spec["b"].get("modes", []), axes=(0,))

    def expression(points):
        values = np.zeros((len(points), 2, 2), dtype=complex)
        values[:, 0, 0] = a(points)
        values[:, 1, 1] = b(points)
        return values
    return expression


def random_trig_terms(lattice: Lattice, m: int, band: int, contrast: float,
                      rng: np.random.Generator) -> Tuple[np.ndarray, List[Tuple[np.ndarray, np.ndarray]]]:
    """
    Seeded Hermitian positive definite trigonometric polynomial

    g(x) = G0 + sum_k (A_k e^{i<xi_k,x>} + A_k^* e^{-i<xi_k,x>}) over half of the
    band; G0 >= 1 and sum_k 2|A_k| = contrast < 1, so g >= (1 - contrast).

    Returns:
        Tuple of (G0, [(xi_k, A_k)])
    """
    root = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    mean = np.eye(m) + 0.5 * root @ root.conj().T / np.linalg.norm(root, 2) ** 2
    waves = [np.asarray(k) for k in itertools.product(range(-band, band + 1), repeat=lattice.d)]
    half = [k for k in waves if next((v for v in k if v != 0), 0) > 0]
    amplitudes = [rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)) for _ in half]
    total = sum(2.0 * np.linalg.norm(A, 2) for A in amplitudes)
    terms = [(k @ lattice.dual_basis, A * contrast / total) for k, A in zip(half, amplitudes)]
    return mean, terms


def _random_trig(spec, lattice, m, seed) -> Expression:
    rng = np.random.default_rng(seed)
    mean, terms = random_trig_terms(lattice, m, int(spec.get("band", 1)), float(spec.get("contrast", 0.9)), rng)

    def expression(points):
        values = np.broadcast_to(mean, (len(points), m, m)).astype(complex)
        for xi, A in terms:
            phase = np.exp(1j * (points @ xi))[:, None, None]
            values = values + phase * A + np.conj(phase) * A.conj().T
        return values
    return expression


COEFFICIENT_BUILDERS = {
    "constant": _constant,
    "two_phase": _two_phase,
    "trig_polynomial": _trig_polynomial,
    "reciprocal_trig_polynomial": _reciprocal_trig_polynomial,
    "laminate": _laminate,
}


def coefficient_expression(spec: Dict[str, Any], lattice: Lattice, m: int, seed: int = 0) -> Expression:
    kind = spec["type"]
    if kind == "random_trig":
        return _random_trig(spec, lattice, m, seed)
    if kind not in COEFFICIENT_BUILDERS:
        raise ConfigError(f"coefficient type {kind!r} has no closed form")
    return COEFFICIENT_BUILDERS[kind](spec, lattice, m)


def build_coefficient(spec: Dict[str, Any], cell_lengths: Sequence[float], cutoff: int, m: int,
                      seed: int = 0) -> CoefficientG:
    """
    Coefficient on the cell grid, keeping its closed form for off-grid evaluation

    Args:
        spec: Coefficient entry of the study configuration
        cell_lengths: Side lengths of the periodicity cell
        cutoff: Grid points per dimension
        m: Size of the coefficient matrices
        seed: Seed of random coefficients

    Returns:
        CoefficientG
    """
    kind = spec["type"]
    if kind == "dump":
        field = read_field(spec["path"])
        if field.shape != (m, m):
            raise ConfigError(f"dumped coefficient is {field.shape}, the symbol needs {(m, m)}")
        return CoefficientG(field, label=spec.get("label", "dump"))

    lattice = Lattice.rectangular(cell_lengths)
    expression = coefficient_expression(spec, lattice, m, seed)
    grid = (cutoff,) * lattice.d
    field = PeriodicField.from_function(lattice, grid, expression)
    label = spec.get("label", kind)
    logger.debug(f"Built {kind} coefficient on grid {grid}")
    return CoefficientG(field, expression=expression, label=label)


# right-hand sides

def _rhs_terms(spec: Optional[Dict[str, Any]], d: int) -> List[Dict[str, Any]]:
    terms = (spec or {}).get("terms")
    if not terms:
        return [{"wave": [1] + [0] * (d - 1), "amplitude": 1.0, "kind": "cos", "component": 0}]
    return terms


def build_torus_rhs(spec: Optional[Dict[str, Any]], cell_lengths: Sequence[float], cutoff: int,
                    n: int) -> PeriodicField:
    """Trigonometric right-hand side (n x 1) on the cell lattice"""
    lattice = Lattice.rectangular(cell_lengths)
    terms = _rhs_terms(spec, lattice.d)

    def func(points):
        values = np.zeros((len(points), n, 1), dtype=complex)
        for term in terms:
            phase = points @ (np.asarray(term["wave"], dtype=float) @ lattice.dual_basis)
            kind = term.get("kind", "cos")
            wave = np.cos(phase) if kind == "cos" else np.sin(phase) if kind == "sin" else np.ones_like(phase)
            values[:, int(term.get("component", 0)), 0] += float(term.get("amplitude", 1.0)) * wave
        return values

    return PeriodicField.from_function(lattice, (cutoff,) * lattice.d, func)


def build_domain_rhs(spec: Optional[Dict[str, Any]], bounds: Sequence[Tuple[float, float]],
                     n: int) -> Expression:
    """sum amplitude cos/sin(pi <k, (x - a) / (b - a)>) on the box, (Q, d) -> (Q, n)"""
    lower = np.array([a for a, _ in bounds], dtype=float)
    lengths = np.array([b - a for a, b in bounds], dtype=float)
    terms = _rhs_terms(spec, len(bounds))

    def func(points):
        points = np.atleast_2d(points)
        values = np.zeros((len(points), n), dtype=complex)
        scaled = (points - lower) / lengths
        for term in terms:
            phase = np.pi * scaled @ np.asarray(term["wave"], dtype=float)
            kind = term.get("kind", "cos")
            wave = np.cos(phase) if kind == "cos" else np.sin(phase) if kind == "sin" else np.ones_like(phase)
            values[:, int(term.get("component", 0))] += float(term.get("amplitude", 1.0)) * wave
        return values

    return func
