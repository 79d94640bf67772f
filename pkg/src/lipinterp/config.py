"""JSON config schemas for the command-line studies.

All defaults live in these schemas; :func:`load_config` validates a document and fills
in every missing default. ``python -m lipinterp.config <subcommand>`` prints a schema.
"""
from __future__ import annotations

import copy
import json
import math
import sys

from jsonschema import Draft7Validator, validators

from .core import HolderMetric
from .errors import ConfigurationError
from .noise import KINDS, noise_from_config

METRIC = {
    "type": "object",
    "default": {},
    "additionalProperties": False,
    "properties": {
        "p": {"oneOf": [{"type": "integer", "minimum": 1}, {"enum": ["inf"]}], "default": 2},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1, "default": 1.0},
    },
}

NOISE_RECORD = {
    "type": "object",
    "required": ["kind", "e_bar"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(KINDS)},
        "e_bar": {"type": "number", "exclusiveMinimum": 0},
        "eta": {"type": "number", "exclusiveMinimum": 0},
        "sigma": {"type": "number", "exclusiveMinimum": 0},
        "params": {"type": "object"},
    },
}


def _noise(default):
    return {"oneOf": [{"type": "null"}, NOISE_RECORD], "default": default}


SEED = {"type": "integer", "minimum": 0, "default": 0}
NONNEG_OR_NULL = {"type": ["number", "null"], "minimum": 0, "default": None}

_MODEL_PROPS = {
    "data": {"type": "string"},
    "metric": METRIC,
    "lipschitz": NONNEG_OR_NULL,
    "lambda": NONNEG_OR_NULL,
    "noise_bound": NONNEG_OR_NULL,
}

_STUDY_PROPS = {
    "target": {"enum": ["chirp", "sin", "sin2d"], "default": "chirp"},
    "metric": METRIC,
    "lipschitz": NONNEG_OR_NULL,
    "noise": _noise({"kind": "uniform", "e_bar": 0.5}),
    "sample_sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1,
                     "default": [2 ** k for k in range(7, 16)]},
    "repetitions": {"type": "integer", "minimum": 1, "default": 20},
    "grid_points": {"type": ["integer", "null"], "minimum": 100, "default": None},
    "seed": SEED,
}

SCHEMAS = {
    "fit": {
        "type": "object",
        "required": ["data"],
        "additionalProperties": False,
        "properties": dict(_MODEL_PROPS),
    },
    "predict": {
        "type": "object",
        "required": ["data"],
        "additionalProperties": False,
        "properties": {
            **_MODEL_PROPS,
            "queries": {"type": ["string", "null"], "default": None},
            "grid": {
                "type": ["object", "null"],
                "default": None,
                "required": ["lower", "upper"],
                "additionalProperties": False,
                "properties": {
                    "lower": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "upper": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "points": {"type": "integer", "minimum": 2, "default": 101},
                },
            },
        },
    },
    "rate-study": {
        "type": "object",
        "additionalProperties": False,
        "properties": dict(_STUDY_PROPS),
    },
    "lacki-study": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            **_STUDY_PROPS,
            "target": {"enum": ["chirp", "sin", "sin2d"], "default": "sin"},
            "noise": _noise({"kind": "uniform", "e_bar": 0.1}),
            "sample_sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1,
                             "default": [10, 100, 1000, 5000, 20000]},
            "lambda": NONNEG_OR_NULL,
        },
    },
    "pendulum": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "delta": {"type": "number", "exclusiveMinimum": 0, "default": 0.1},
            "k1": {"type": "number", "default": 1.0},
            "k2": {"type": "number", "default": 1.0},
            "lipschitz": {"type": "number", "minimum": 0, "default": 11.0},
            "metric": METRIC,
            "noise": _noise({"kind": "uniform", "e_bar": 2.0}),
            "x0": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2, "default": [-2.0, -1.0]},
            "setpoint": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2,
                         "default": [2 * math.pi, 0.0]},
            "steps": {"type": "integer", "minimum": 0, "default": 300},
            "repetitions": {"type": "integer", "minimum": 1, "default": 30},
            "oracle": {"type": "boolean", "default": False},
            "seed": SEED,
        },
    },
    "eta-check": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "noise": {**NOISE_RECORD, "default": {"kind": "power_boundary", "e_bar": 1.0, "eta": 2.0}},
            "n_draws": {"type": "integer", "minimum": 10000, "default": 1000000},
            "epsilons": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1,
                         "default": [0.05, 0.1, 0.2]},
            "eta": {"type": ["number", "null"], "exclusiveMinimum": 0, "default": None},
            "gamma": {"type": ["number", "null"], "exclusiveMinimum": 0, "default": None},
            "seed": SEED,
        },
    },
}


def _with_defaults(base):
    validate_props = base.VALIDATORS["properties"]

    def set_defaults(validator, properties, instance, schema):
        if isinstance(instance, dict):
            for name, sub in properties.items():
                if "default" in sub and name not in instance:
                    instance[name] = copy.deepcopy(sub["default"])
        yield from validate_props(validator, properties, instance, schema)

    return validators.extend(base, {"properties": set_defaults})


_Filling = _with_defaults(Draft7Validator)


class SchemaError(ConfigurationError):
    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        super().__init__("; ".join(diagnostics))


def load_config(command: str, doc: dict) -> dict:
    """Validate ``doc`` against the subcommand schema and return it with defaults filled."""
    cfg = copy.deepcopy(doc)
    schema = SCHEMAS[command]
    errors = sorted(Draft7Validator(schema).iter_errors(cfg), key=lambda e: list(e.path))
    if errors:
        raise SchemaError([f"{'/'.join(map(str, e.path)) or '<root>'}: {e.message}" for e in errors])
    # defaults are filled only on a valid document, so oneOf branches never see partial objects
    list(_Filling(schema).iter_errors(cfg))
    return cfg


def read_config(command: str, path=None) -> dict:
    doc = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError([f"cannot read config {path}: {exc}"]) from exc
    return load_config(command, doc)


def metric_from(cfg: dict) -> HolderMetric:
    return HolderMetric.from_dict(cfg["metric"])


def noise_from(cfg: dict):
    return noise_from_config(cfg.get("noise"))


if __name__ == "__main__":
    json.dump(SCHEMAS[sys.argv[1]] if len(sys.argv) > 1 else SCHEMAS, sys.stdout, indent=2)
    print()
