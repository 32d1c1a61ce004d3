"""
Field Dump Module
Reads and writes periodic fields as JSON documents of trigonometric coefficients
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

import config
from errors import ConfigError
from torus.field import PeriodicField
from torus.lattice import Lattice

logger = logging.getLogger(__name__)


def field_to_document(u: PeriodicField) -> Dict[str, Any]:
    """Coefficients in numpy.fft order as interleaved [re, im] pairs"""
    if not u.lattice.is_rectangular:
        raise ConfigError("field dumps support rectangular lattices only")
    coeffs = u.coeffs.reshape(-1)
    return {
        "format": config.FIELD_DUMP["format"],
        "version": config.FIELD_DUMP["version"],
        "lengths": [float(v) for v in u.lattice.lengths],
        "grid": list(u.grid_shape),
        "shape": list(u.shape),
        "hermitian": bool(u.hermitian),
        "zero_mean": bool(u.zero_mean),
        "coeffs": [[float(z.real), float(z.imag)] for z in coeffs],
    }


def field_from_document(document: Dict[str, Any]) -> PeriodicField:
    """
    Rebuild a PeriodicField from its dump

    Raises:
        ConfigError: Wrong format tag, version or coefficient count
    """
    errors = []
    if document.get("format") != config.FIELD_DUMP["format"]:
        errors.append(f"format {document.get('format')!r} is not {config.FIELD_DUMP['format']!r}")
    if document.get("version") != config.FIELD_DUMP["version"]:
        errors.append(f"unsupported dump version {document.get('version')!r}")
    for key in ("lengths", "grid", "shape", "coeffs"):
        if key not in document:
            errors.append(f"missing key '{key}'")
    if errors:
        raise ConfigError("invalid field dump", errors)

    grid = tuple(int(v) for v in document["grid"])
    shape = tuple(int(v) for v in document["shape"])
    pairs = np.asarray(document["coeffs"], dtype=float)
    expected = int(np.prod(grid + shape))
    if pairs.shape != (expected, 2):
        raise ConfigError("invalid field dump", [f"expected {expected} [re, im] pairs, got {pairs.shape}"])
    coeffs = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(grid + shape)
    lattice = Lattice.rectangular(document["lengths"])
    return PeriodicField.from_coeffs(lattice, coeffs, hermitian=bool(document.get("hermitian", False)),
                                     zero_mean=bool(document.get("zero_mean", False)))


def write_field(u: PeriodicField, path: Union[str, Path]) -> Path:
    path = Path(path)
    if path.suffix != ".json":
        path = path.with_suffix(".json")
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(field_to_document(u), f, indent=2)
        logger.info(f"Wrote field dump: {path}")
        return path
    except Exception as e:
        logger.error(f"Error writing field dump {path}: {str(e)}")
        raise


def read_field(path: Union[str, Path]) -> PeriodicField:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"field dump not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"field dump is not valid JSON: {path}", [str(exc)]) from exc
    field = field_from_document(document)
    logger.debug(f"Read field dump {path}: grid {field.grid_shape}, shape {field.shape}")
    return field
