"""
Study Configuration Module
Parsing, validation, serialization and fingerprinting of JSON study configurations
"""
import json
import logging
from dataclasses import asdict, dataclass, field
from hashlib import md5
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

import config
from errors import ConfigError

logger = logging.getLogger(__name__)

SYMBOL_TYPES = ("gradient", "power", "hessian", "terms")
COEFFICIENT_TYPES = (
    "constant",
    "two_phase",
    "trig_polynomial",
    "reciprocal_trig_polynomial",
    "laminate",
    "random_trig",
    "dump",
)
REQUIRED_KEYS = ("problem_id", "dimension", "order", "symbol", "coefficient", "eps_list")
VARIANTS = ("A", "B")


@dataclass
class StudyConfig:
    """One validated study problem"""

    problem_id: str
    dimension: int
    order: int
    symbol: Dict[str, Any]
    coefficient: Dict[str, Any]
    eps_list: List[float]
    cell_lengths: List[float] = field(default_factory=list)
    cutoff: int = config.STUDY_DEFAULTS["cutoff"]
    zeta_list: List[List[float]] = field(default_factory=lambda: [[config.STUDY_DEFAULTS["zeta"], 0.0]])
    rhs: Dict[str, Any] = field(default_factory=dict)
    domain: Optional[Dict[str, Any]] = None
    shift_study: Optional[Dict[str, Any]] = None
    seeds: Dict[str, int] = field(default_factory=lambda: {"probe": 0, "coefficient": 0})
    tolerances: Dict[str, float] = field(default_factory=dict)
    thresholds: Dict[str, float] = field(default_factory=dict)
    operator_norm: bool = False
    threads: Optional[int] = None
    output_dir: Optional[str] = None

    @property
    def zetas(self) -> List[complex]:
        return [complex(re, im) for re, im in self.zeta_list]

    @property
    def acceptance(self) -> Dict[str, float]:
        merged = dict(config.ACCEPTANCE_THRESHOLDS)
        merged.update(self.thresholds)
        return merged

    def tolerance(self, name: str) -> float:
        return float(self.tolerances.get(name, config.SOLVER_SETTINGS.get(name)))

    @property
    def bounds(self) -> Optional[List[Tuple[float, float]]]:
        if not self.domain:
            return None
        return [tuple(float(v) for v in pair) for pair in self.domain["bounds"]]


def _is_reciprocal_integer(eps: float) -> bool:
    if eps <= 0 or eps > 1:
        return False
    k = 1.0 / eps
    return abs(k - round(k)) <= 1e-9 * k


def validate_eps_list(eps_list: Any) -> List[str]:
    errors = []
    if not isinstance(eps_list, list) or not eps_list:
        return ["eps_list must be a non-empty list"]
    if len(eps_list) < 3:
        errors.append(f"eps_list needs at least 3 values for rate fits, got {len(eps_list)}")
    for eps in eps_list:
        if not isinstance(eps, (int, float)) or not _is_reciprocal_integer(float(eps)):
            errors.append(f"eps {eps!r} is not 1/k for an integer k >= 1")
    values = [float(e) for e in eps_list if isinstance(e, (int, float))]
    if any(b >= a for a, b in zip(values, values[1:])):
        errors.append("eps_list must be strictly decreasing")
    return errors


def validate_zeta_list(zeta_list: Any) -> List[str]:
    if not isinstance(zeta_list, list) or not zeta_list:
        return ["zeta_list must be a non-empty list of [re, im] pairs"]
    errors = []
    for item in zeta_list:
        if not (isinstance(item, list) and len(item) == 2 and all(isinstance(v, (int, float)) for v in item)):
            errors.append(f"zeta {item!r} is not an [re, im] pair")
            continue
        if item[1] == 0 and item[0] >= 0:
            errors.append(f"zeta {item!r} lies on [0, inf)")
    return errors


def validate_symbol(spec: Any, dimension: int, order: int) -> List[str]:
    if not isinstance(spec, dict):
        return ["symbol must be an object"]
    kind = spec.get("type")
    if kind not in SYMBOL_TYPES:
        return [f"symbol type {kind!r} not in {list(SYMBOL_TYPES)}"]
    errors = []
    if kind == "gradient" and order != 1:
        errors.append("gradient symbol has order 1")
    if kind == "power" and dimension != 1:
        errors.append("power symbol is one-dimensional")
    if kind == "hessian" and (dimension != 2 or order != 2):
        errors.append("hessian symbol needs dimension 2 and order 2")
    if kind == "terms":
        terms = spec.get("terms")
        if not isinstance(terms, list) or not terms:
            errors.append("terms symbol needs a non-empty 'terms' list")
        else:
            for term in terms:
                alpha = term.get("alpha") if isinstance(term, dict) else None
                if not isinstance(alpha, list) or len(alpha) != dimension or sum(alpha) != order:
                    errors.append(f"term multi-index {alpha!r} must have length {dimension} and order {order}")
                if not isinstance(term, dict) or "matrix" not in term:
                    errors.append("every term needs a 'matrix'")
    scale = spec.get("scale", 1.0)
    if not isinstance(scale, (int, float)) or scale == 0:
        errors.append(f"symbol scale must be a nonzero number, got {scale!r}")
    return errors


def validate_coefficient(spec: Any, dimension: int) -> List[str]:
    if not isinstance(spec, dict):
        return ["coefficient must be an object"]
    kind = spec.get("type")
    if kind not in COEFFICIENT_TYPES:
        return [f"coefficient type {kind!r} not in {list(COEFFICIENT_TYPES)}"]
    errors = []
    if kind == "constant" and "value" not in spec:
        errors.append("constant coefficient needs 'value'")
    if kind == "two_phase":
        values = spec.get("values")
        if not isinstance(values, list) or len(values) != 2:
            errors.append("two_phase coefficient needs 'values' with two phases")
        fraction = spec.get("fraction", 0.5)
        if not isinstance(fraction, (int, float)) or not 0 < fraction < 1:
            errors.append(f"two_phase fraction must lie in (0, 1), got {fraction!r}")
        if not 0 <= spec.get("axis", 0) < dimension:
            errors.append("two_phase axis out of range")
    if kind in ("trig_polynomial", "reciprocal_trig_polynomial"):
        if not isinstance(spec.get("mean"), (int, float)):
            errors.append(f"{kind} needs a numeric 'mean'")
        if not isinstance(spec.get("modes", []), list):
            errors.append(f"{kind} 'modes' must be a list")
    if kind == "laminate":
        if dimension != 2:
            errors.append("laminate coefficient is two-dimensional")
        for key in ("a", "b"):
            if not isinstance(spec.get(key), dict):
                errors.append(f"laminate needs a trigonometric profile '{key}'")
    if kind == "random_trig":
        if not isinstance(spec.get("size", 1), int) or spec.get("size", 1) < 1:
            errors.append("random_trig 'size' must be a positive integer")
        if not isinstance(spec.get("band", 1), int) or spec.get("band", 1) < 1:
            errors.append("random_trig 'band' must be a positive integer")
    if kind == "dump" and not spec.get("path"):
        errors.append("dump coefficient needs 'path'")
    return errors


def validate_domain(spec: Any, dimension: int) -> List[str]:
    if spec is None:
        return []
    if not isinstance(spec, dict) or not isinstance(spec.get("bounds"), list):
        return ["domain needs 'bounds' as a list of [a, b] pairs"]
    errors = []
    if len(spec["bounds"]) != dimension:
        errors.append(f"domain has {len(spec['bounds'])} sides, dimension is {dimension}")
    if dimension > 2:
        errors.append("bounded domains exist for dimension 1 and 2 only")
    for pair in spec["bounds"]:
        if not (isinstance(pair, list) and len(pair) == 2 and pair[0] < pair[1]):
            errors.append(f"bad interval {pair!r}")
    resolution = spec.get("resolution", config.STUDY_DEFAULTS["resolution"])
    if not isinstance(resolution, int) or resolution < 1:
        errors.append("domain resolution must be a positive integer")
    return errors


def validate_shift_study(spec: Any) -> List[str]:
    if spec is None:
        return []
    if not isinstance(spec, dict):
        return ["shift_study must be an object"]
    errors = []
    for fraction in spec.get("fractions", []):
        if not isinstance(fraction, (int, float)) or not 0 < fraction < 1:
            errors.append(f"shift fraction {fraction!r} must lie in (0, 1)")
    if spec.get("variant", "B") not in VARIANTS:
        errors.append(f"variant must be one of {list(VARIANTS)}")
    for delta in spec.get("rho_deltas", []):
        if not isinstance(delta, (int, float)) or not 0 < delta < 1:
            errors.append(f"rho delta {delta!r} must lie in (0, 1)")
    return errors


def validate_config(raw: Dict[str, Any]) -> Tuple[bool, List[str]]:
    """
    Validate a raw configuration dictionary

    Args:
        raw: Parsed JSON object

    Returns:
        Tuple of (is_valid, list_of_errors)
    """
    if not isinstance(raw, dict):
        return (False, ["configuration must be a JSON object"])
    errors = [f"missing required key '{key}'" for key in REQUIRED_KEYS if key not in raw]
    known = set(StudyConfig.__dataclass_fields__)
    errors.extend(f"unknown key '{key}'" for key in raw if key not in known)
    dimension, order = raw.get("dimension"), raw.get("order")
    if not isinstance(dimension, int) or dimension < 1:
        errors.append(f"dimension must be a positive integer, got {dimension!r}")
        dimension = 1
    if not isinstance(order, int) or order < 1:
        errors.append(f"order must be a positive integer, got {order!r}")
        order = 1
    if "symbol" in raw:
        errors.extend(validate_symbol(raw["symbol"], dimension, order))
    if "coefficient" in raw:
        errors.extend(validate_coefficient(raw["coefficient"], dimension))
    if "eps_list" in raw:
        errors.extend(validate_eps_list(raw["eps_list"]))
    if "zeta_list" in raw:
        errors.extend(validate_zeta_list(raw["zeta_list"]))
    cell_lengths = raw.get("cell_lengths")
    if cell_lengths is not None:
        if not isinstance(cell_lengths, list) or len(cell_lengths) != dimension or any(
                not isinstance(v, (int, float)) or v <= 0 for v in cell_lengths):
            errors.append(f"cell_lengths must be {dimension} positive numbers")
    cutoff = raw.get("cutoff", config.STUDY_DEFAULTS["cutoff"])
    if not isinstance(cutoff, int) or cutoff < 4 or cutoff % 2:
        errors.append(f"cutoff must be an even integer >= 4, got {cutoff!r}")
    errors.extend(validate_domain(raw.get("domain"), dimension))
    errors.extend(validate_shift_study(raw.get("shift_study")))
    for name in raw.get("thresholds", {}) or {}:
        if name not in config.ACCEPTANCE_THRESHOLDS:
            errors.append(f"unknown threshold '{name}'")
    for name in raw.get("tolerances", {}) or {}:
        if name not in config.SOLVER_SETTINGS:
            errors.append(f"unknown tolerance '{name}'")

    is_valid = len(errors) == 0
    if not is_valid:
        logger.warning(f"Configuration has {len(errors)} error(s)")
    return (is_valid, errors)


def load_config(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if path.is_dir() or not path.suffix:
        candidate = config.CONFIGS_DIR / f"{path.name}.json"
        path = candidate if candidate.exists() else path.with_suffix(".json")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"configuration file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {path}", [str(exc)]) from exc


def parse_config(source: Union[str, Path, Dict[str, Any]]) -> StudyConfig:
    """
    Build a StudyConfig from a JSON path or dictionary

    Raises:
        ConfigError: Every schema violation, itemized
    """
    raw = load_config(source) if isinstance(source, (str, Path)) else source
    is_valid, errors = validate_config(raw)
    if not is_valid:
        raise ConfigError(f"invalid study configuration '{raw.get('problem_id', '?') if isinstance(raw, dict) else '?'}'",
                          errors)
    values = {key: value for key, value in raw.items()}
    values["eps_list"] = [float(eps) for eps in values["eps_list"]]
    if not values.get("cell_lengths"):
        values["cell_lengths"] = [1.0] * values["dimension"]
    values["cell_lengths"] = [float(v) for v in values["cell_lengths"]]
    if "zeta_list" in values:
        values["zeta_list"] = [[float(re), float(im)] for re, im in values["zeta_list"]]
    seeds = {"probe": 0, "coefficient": 0}
    seeds.update(values.get("seeds") or {})
    values["seeds"] = seeds
    cfg = StudyConfig(**values)
    logger.debug(f"Parsed configuration {cfg.problem_id} ({config_fingerprint(cfg)})")
    return cfg


def serialize_config(cfg: StudyConfig) -> Dict[str, Any]:
    return asdict(cfg)


def config_fingerprint(cfg: StudyConfig) -> str:
    """MD5 of the canonical JSON form"""
    canonical = json.dumps(serialize_config(cfg), sort_keys=True, separators=(",", ":"), default=str)
    return md5(canonical.encode("utf-8")).hexdigest()


def eps_reciprocals(cfg: StudyConfig) -> List[int]:
    return [int(round(1.0 / eps)) for eps in cfg.eps_list]


def finest_eps(cfg: StudyConfig) -> float:
    return float(np.min(cfg.eps_list))
