"""JSON configuration: schema, defaults, and construction of the pipeline objects."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

from . import expr
from .errors import ConfigError, ExprError
from .measure import ProbabilityVector
from .partition import Partition
from .rb import FractalSystem
from .setfunc import SetFunction, base_function

_NUM = {"type": "number"}
_EXPR = {"type": "string", "minLength": 1}

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "svfractal configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "interval": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "partition": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "family": {"enum": ["dyadic", "geometric", "explicit"]},
                "ratio": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "prefix": {"type": "array", "items": _NUM, "minItems": 2},
                "N": {"type": "integer", "minimum": 1, "maximum": 50},
                "orientation": {"enum": ["increasing", "decreasing"]},
                "overrides": {"type": "array", "items": {"enum": ["increasing", "decreasing"]}},
            },
        },
        "alpha": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1},
        "phi": {
            "type": "object",
            "additionalProperties": False,
            "required": ["lower", "upper"],
            "properties": {"lower": _EXPR, "upper": _EXPR},
        },
        "h": _EXPR,
        "base": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {"kind": {"enum": ["example", "explicit"]}, "lower": _EXPR, "upper": _EXPR},
            "if": {"properties": {"kind": {"const": "explicit"}}},
            "then": {"required": ["kind", "lower", "upper"]},
        },
        "interpolating": {"type": "boolean"},
        "grid_size": {"type": "integer", "minimum": 3, "maximum": 1_000_001},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "measure": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "p": {
                    "oneOf": [
                        {"const": "proportional"},
                        {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                    ]
                },
                "n": {"type": "integer", "minimum": 2},
                "burn_in": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0},
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "mk_n": {"type": "integer", "minimum": 2, "maximum": 1024},
            },
        },
        "dimension": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k_max": {"type": "integer", "minimum": 2, "maximum": 1000},
                "stall_tol": {"type": "number", "exclusiveMinimum": 0},
                "scales": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 3},
                "cloud_size": {"type": "integer", "minimum": 2},
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "cloud_size": {"type": "integer", "minimum": 2},
                "contraction_pairs": {"type": "integer", "minimum": 1},
                "rb_pairs": {"type": "integer", "minimum": 1},
                "order_depth": {"type": "integer", "minimum": 0},
                "order_index_cap": {"type": "integer", "minimum": 1},
                "attractor_tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}

DEFAULTS: dict[str, Any] = {
    "interval": [0.0, 1.0],
    "partition": {"family": "dyadic", "N": 24, "orientation": "increasing", "overrides": []},
    "alpha": 0.5,
    "phi": {"lower": "t^2+1", "upper": "t^2+2"},
    "h": "1",
    "base": {"kind": "explicit", "lower": "t^2+1-t*(1-t)", "upper": "t^2+2+t*(1-t)"},
    "interpolating": False,
    "grid_size": 4097,
    "tolerance": 1e-10,
    "measure": {"p": "proportional", "n": 20000, "burn_in": 100, "seed": 0, "eps": 1e-3, "mk_n": 512},
    "dimension": {"k_max": 64, "stall_tol": 1e-9, "scales": [1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128, 1 / 256], "cloud_size": 4096},
    "verify": {
        "cloud_size": 4096,
        "contraction_pairs": 2000,
        "rb_pairs": 20,
        "order_depth": 3,
        "order_index_cap": 8,
        "attractor_tol": 1e-3,
    },
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            # a user base block replaces the default one wholesale
            out[k] = v if k == "base" else _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass(frozen=True)
class Config:
    data: dict

    def __getitem__(self, key: str):
        return self.data[key]

    @property
    def alpha(self) -> float:
        return float(self.data["alpha"])

    def partition(self) -> Partition:
        p = self.data["partition"]
        t1, tinf = (float(x) for x in self.data["interval"])
        kw = dict(N=int(p["N"]), orientation=p["orientation"], overrides=tuple(p.get("overrides", ())))
        family = p["family"]
        try:
            if family == "dyadic":
                return Partition.dyadic(t1, tinf, **kw)
            if family == "geometric":
                if "ratio" not in p:
                    raise ConfigError("partition.ratio is required for the geometric family")
                return Partition.geometric(float(p["ratio"]), t1, tinf, **kw)
            if "prefix" not in p:
                raise ConfigError("partition.prefix is required for the explicit family")
            return Partition.explicit([float(x) for x in p["prefix"]], tinf, **kw)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"partition: {e}") from e

    def phi(self, partition: Partition | None = None) -> SetFunction:
        partition = partition or self.partition()
        return SetFunction.from_envelopes(
            self.data["phi"]["lower"], self.data["phi"]["upper"], partition, int(self.data["grid_size"])
        )

    def base(self, phi: SetFunction, partition: Partition) -> SetFunction:
        b = self.data["base"]
        if b["kind"] == "example":
            return base_function(phi, self.data["h"], partition)
        return SetFunction.from_envelopes(b["lower"], b["upper"], partition, int(self.data["grid_size"]))

    def system(self) -> FractalSystem:
        p = self.partition()
        phi = self.phi(p)
        return FractalSystem(phi, self.base(phi, p), self.alpha, p, interpolating=bool(self.data["interpolating"]))

    def probability(self, partition: Partition) -> ProbabilityVector:
        weights = self.data["measure"]["p"]
        if weights == "proportional":
            return ProbabilityVector.proportional(partition)
        if len(weights) > partition.N:
            raise ConfigError(f"measure.p has {len(weights)} weights but N = {partition.N}")
        return ProbabilityVector.explicit(weights)


def _check_expressions(data: dict):
    fields = [("phi.lower", data["phi"]["lower"]), ("phi.upper", data["phi"]["upper"]), ("h", data["h"])]
    if data["base"]["kind"] == "explicit":
        fields += [("base.lower", data["base"]["lower"]), ("base.upper", data["base"]["upper"])]
    for name, text in fields:
        try:
            expr.parse(text)
        except ExprError as e:
            raise ConfigError(f"{name}: {e} in {text!r}") from e


def load_config(source: str | Path | dict) -> Config:
    """Validate against :data:`CONFIG_SCHEMA`, fill defaults, and parse expressions."""
    if isinstance(source, dict):
        raw = source
    else:
        try:
            raw = json.loads(Path(source).read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(x) for x in e.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {e.message}") from e
    data = _merge(DEFAULTS, raw)
    lo, hi = data["interval"]
    if not lo < hi:
        raise ConfigError("interval must satisfy t1 < t_inf")
    _check_expressions(data)
    return Config(data)
