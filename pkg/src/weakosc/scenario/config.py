"""Scenario configuration: JSON schema per kind, validation that reports every error, canonical hashing."""

from __future__ import annotations

import copy
import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from ..errors import ValidationFailure
from .presets import PRESETS

MAX_SEED = 2 ** 64 - 1


class Kind(str, enum.Enum):
    TWO_STATE = "TwoState"
    COUNTABLE = "Countable"
    CONTINUUM = "Continuum"
    POINTER_MC = "PointerMC"
    STRONG_EQUIVALENCE = "StrongEquivalence"


class ParseError(ValidationFailure):
    pass


class ValidationError(ValidationFailure):
    """All problems found in a config; ``problems`` holds (key path, message) pairs."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{p}: {m}" for p, m in self.problems))


@dataclass(frozen=True)
class Field:
    type: str  # float, int, str, list, dict
    default: Any = None
    required: bool = False
    check: Callable[[Any], bool] | None = None
    rule: str = ""
    sweepable: bool = False


def _positive(v):
    return v > 0


def _nonzero(v):
    return v != 0


def _even_at_least(n):
    return lambda v: v >= n and v % 2 == 0


NATURE = Field("str", "oscillating", check=lambda v: v in ("oscillating", "mixed"),
               rule="one of oscillating, mixed")

SCHEMAS: dict[Kind, dict[str, Field]] = {
    Kind.TWO_STATE: {
        "A": Field("float", required=True, check=_positive, rule="strictly positive", sweepable=True),
        "B": Field("float", required=True, check=_positive, rule="strictly positive", sweepable=True),
        "omega": Field("float", 1e6, check=_nonzero, rule="non-zero", sweepable=True),
        "phi0": Field("float", 0.0, sweepable=True),
        "nodes": Field("int", 2 ** 16, check=_even_at_least(2), rule="even and >= 2"),
        "nature": NATURE,
    },
    Kind.COUNTABLE: {
        "source": Field("str", "blackbody", check=lambda v: v in PRESETS, rule=f"one of {', '.join(PRESETS)}"),
        "source_params": Field("dict", {}),
        "dim": Field("int", 5, check=lambda v: v >= 3, rule=">= 3"),
        "a_index": Field("int", 0, check=lambda v: v >= 0, rule=">= 0"),
        "b_index": Field("int", 1, check=lambda v: v >= 0, rule=">= 0"),
        "B": Field("float", required=True, check=_positive, rule="strictly positive", sweepable=True),
        "chi": Field("float", 0.0, sweepable=True),
        "omega0": Field("float", 1.0, check=_positive, rule="strictly positive", sweepable=True),
        "nodes": Field("int", 2 ** 14, check=_even_at_least(2), rule="even and >= 2"),
        "nature": NATURE,
    },
    Kind.CONTINUUM: {
        "shape": Field("str", "gaussian", check=lambda v: v in ("gaussian", "two_peak"),
                       rule="one of gaussian, two_peak"),
        "shape_params": Field("dict", {}),
        "lo": Field("float", -6.4),
        "hi": Field("float", 6.4),
        "bins": Field("int", 512, check=lambda v: v >= 4, rule=">= 4"),
        "Omega": Field("float", 1e6, check=_nonzero, rule="non-zero", sweepable=True),
        "Phi": Field("float", 0.0, sweepable=True),
        "delta_x": Field("float", 0.025, check=_positive, rule="strictly positive", sweepable=True),
        "delta_t": Field("float", 0.1, check=_positive, rule="strictly positive", sweepable=True),
        "a": Field("float", 0.3),
        "delta_a": Field("float", 1.0, check=_positive, rule="strictly positive"),
        "C1": Field("float", required=True, check=_positive, rule="strictly positive", sweepable=True),
        "C2": Field("float", required=True, check=_positive, rule="strictly positive", sweepable=True),
        "shots": Field("int", 10 ** 7, check=lambda v: v >= 100, rule=">= 100"),
        "nodes": Field("int", 4096, check=lambda v: v >= 16, rule=">= 16"),
        "nature": NATURE,
    },
    Kind.POINTER_MC: {
        "A": Field("float", required=True, check=_positive, rule="strictly positive", sweepable=True),
        "B": Field("float", required=True, check=_positive, rule="strictly positive", sweepable=True),
        "omega": Field("float", 1.0, check=_nonzero, rule="non-zero", sweepable=True),
        "phi0": Field("float", 0.0, sweepable=True),
        "g": Field("float", 0.1, check=_nonzero, rule="non-zero", sweepable=True),
        "sigma": Field("float", 1.0, check=_positive, rule="strictly positive"),
        "M": Field("int", 256, check=lambda v: v >= 128, rule=">= 128"),
        "L": Field("float", 16.0, check=_positive, rule="strictly positive"),
        "trials": Field("int", 10 ** 6, check=lambda v: v >= 1, rule=">= 1", sweepable=True),
        "n_bins": Field("int", 64, check=lambda v: v >= 1, rule=">= 1"),
    },
    Kind.STRONG_EQUIVALENCE: {
        "dim": Field("int", 4, check=lambda v: v >= 2, rule=">= 2"),
        "states": Field("int", 100, check=lambda v: v >= 1, rule=">= 1"),
        "cycles": Field("float", 1e4, check=_positive, rule="strictly positive", sweepable=True),
        "base_gap": Field("float", 1e3, check=_positive, rule="strictly positive"),
        "resolution": Field("float", 1e-3, check=_positive, rule="strictly positive", sweepable=True),
    },
}

AVERAGING: dict[str, Field] = {
    "start": Field("float", 0.0),
    "duration": Field("float", None, check=_positive, rule="strictly positive"),
    "nodes": Field("int", 256, check=lambda v: v >= 2, rule=">= 2"),
}

TOP_LEVEL = ("kind", "parameters", "averaging", "seed", "output_path")

# sweeping AB sets the free factor of the product; see runner.apply_axis
AB_AXIS = "AB"
AB_KINDS = (Kind.TWO_STATE, Kind.COUNTABLE, Kind.CONTINUUM, Kind.POINTER_MC)


@dataclass(frozen=True)
class ScenarioConfig:
    kind: Kind
    parameters: dict
    averaging: dict
    seed: int
    output_path: str
    source_file: str | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "parameters": copy.deepcopy(self.parameters),
            "averaging": dict(self.averaging),
            "seed": self.seed,
            "output_path": self.output_path,
        }

    def replace(self, **changes) -> "ScenarioConfig":
        d = self.to_dict()
        d.update(changes)
        return from_dict(d, source_file=self.source_file)


def _coerce(value, spec: Field, path: str, problems: list):
    if spec.type == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append((path, f"expected a number, got {type(value).__name__}"))
            return None
        value = float(value)
        if not math.isfinite(value):
            problems.append((path, "must be finite"))
            return None
    elif spec.type == "int":
        if isinstance(value, bool) or not (isinstance(value, int) or (isinstance(value, float) and value.is_integer())):
            problems.append((path, f"expected an integer, got {value!r}"))
            return None
        value = int(value)
    elif spec.type == "str" and not isinstance(value, str):
        problems.append((path, f"expected a string, got {type(value).__name__}"))
        return None
    elif spec.type == "dict" and not isinstance(value, dict):
        problems.append((path, "expected an object"))
        return None
    if spec.check is not None and not spec.check(value):
        problems.append((path, f"{value!r} is invalid: must be {spec.rule}"))
        return None
    return value


def _section(raw, schema: dict[str, Field], prefix: str, problems: list) -> dict:
    if not isinstance(raw, dict):
        problems.append((prefix, "expected an object"))
        return {}
    out = {}
    for key in raw:
        if key not in schema:
            problems.append((f"{prefix}.{key}", "unknown key"))
    for key, spec in schema.items():
        path = f"{prefix}.{key}"
        if key in raw:
            v = _coerce(raw[key], spec, path, problems)
            if v is not None:
                out[key] = v
        elif spec.required:
            problems.append((path, "required key missing"))
        elif spec.default is not None:
            out[key] = copy.deepcopy(spec.default)
    return out


def _cross_checks(kind: Kind, p: dict, problems: list) -> None:
    if kind is Kind.COUNTABLE and {"dim", "a_index", "b_index"} <= p.keys():
        for k in ("a_index", "b_index"):
            if p[k] >= p["dim"]:
                problems.append((f"parameters.{k}", f"{p[k]} is out of range for dim {p['dim']}"))
        if p["a_index"] == p["b_index"]:
            problems.append(("parameters.b_index", "must differ from a_index"))
    if kind is Kind.CONTINUUM and {"lo", "hi"} <= p.keys() and not p["hi"] > p["lo"]:
        problems.append(("parameters.hi", "must exceed lo"))


def from_dict(raw: Any, source_file: str | None = None) -> ScenarioConfig:
    """Validate a parsed config, filling defaults; raises ValidationError listing every problem."""
    problems: list = []
    if not isinstance(raw, dict):
        raise ValidationError([("", "config must be a JSON object")])
    for key in raw:
        if key not in TOP_LEVEL:
            problems.append((key, "unknown key"))

    kind = None
    try:
        kind = Kind(raw.get("kind"))
    except ValueError:
        kinds = ", ".join(k.value for k in Kind)
        problems.append(("kind", f"unknown kind {raw.get('kind')!r}; expected one of {kinds}"))

    params = _section(raw.get("parameters", {}), SCHEMAS[kind], "parameters", problems) if kind else {}
    if kind:
        _cross_checks(kind, params, problems)
    averaging = _section(raw.get("averaging", {}), AVERAGING, "averaging", problems)

    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MAX_SEED:
        problems.append(("seed", "must be an integer in [0, 2^64)"))

    out = raw.get("output_path", "results/scenario")
    if not isinstance(out, str) or not out:
        problems.append(("output_path", "must be a non-empty string"))

    if problems:
        raise ValidationError(problems)
    return ScenarioConfig(kind, params, averaging, seed, out, source_file)


def load(path) -> ScenarioConfig:
    """Read and validate a config file. OSError propagates; bad JSON raises ParseError."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return from_dict(raw, source_file=str(path))


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True, allow_nan=False)


def config_hash(cfg: ScenarioConfig) -> str:
    """sha256 of the canonical serialization of the validated config (key order irrelevant)."""
    return hashlib.sha256(canonical_json(cfg.to_dict()).encode("ascii")).hexdigest()


def sweepable_axes(kind: Kind) -> list[str]:
    axes = [k for k, f in SCHEMAS[kind].items() if f.sweepable]
    if kind in AB_KINDS:
        axes.append(AB_AXIS)
    return axes
