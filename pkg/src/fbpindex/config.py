"""Run configuration: a JSON document validated before any work starts.

Example::

    {
      "synth": {"n_identities": 1000, "seed": 2024,
                "characteristics": [{"name": "face", "dim": 512, "sigma": 0.5, "samples": 4}]},
      "scheme": {"name": "biohashing", "seed": 1, "length": 512},
      "strategy": "ranked",
      "k": 6,
      "k_range": [3, 8],
      "t_policy": "closed_set_derived",
      "mode": "both",
      "protocol": {"folds": 10, "seed": 0, "open_set_split": 0.2},
      "output_dir": "out"
    }

``dataset`` (a CSV file or binary-container manifest) replaces ``synth``.
Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from .datagen import SynthSpec
from .errors import ConfigurationError
from .evalbench import EXHAUSTIVE, Protocol, SchemeConfig

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "dataset": {"type": "string"},
        "synth": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_identities": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "characteristics": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["name"],
                        "properties": {
                            "name": {"type": "string", "minLength": 1},
                            "dim": {"type": "integer", "minimum": 2},
                            "sigma": {"type": "number", "minimum": 0},
                            "samples": {"type": "integer", "minimum": 2},
                        },
                    },
                },
            },
        },
        "scheme": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "name": {"type": "string"},
                "seed": {"type": "integer", "minimum": 0},
                "length": {"type": "integer", "minimum": 1},
                "m_ints": {"type": "integer", "minimum": 1},
                "q": {"type": "integer", "minimum": 2},
            },
        },
        "characteristics": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "strategy": {"enum": ["feature", "ranked", "xor", EXHAUSTIVE]},
        "k": {"type": "integer", "minimum": 1, "maximum": 16},
        "k_range": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 16},
                    "minItems": 2, "maxItems": 2},
        "t_policy": {"anyOf": [{"const": "closed_set_derived"},
                               {"type": "integer", "minimum": 1}]},
        "mode": {"enum": ["closed", "open", "both"]},
        "protocol": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "folds": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer", "minimum": 0},
                "open_set_split": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "calibration_identities": {"type": "integer", "minimum": 2},
                "skip_empty_bins": {"type": "boolean"},
                "fpir_targets": {"type": "array", "items": {"type": "number"}},
            },
        },
        "output_dir": {"type": "string"},
    },
}

DEFAULTS: dict[str, Any] = {
    "scheme": {},
    "strategy": "ranked",
    "k": 6,
    "k_range": [3, 8],
    "t_policy": "closed_set_derived",
    "mode": "both",
    "protocol": {},
    "output_dir": "out",
}


@dataclass(frozen=True)
class RunConfig:
    raw: Mapping[str, Any]

    @property
    def dataset(self) -> str | None:
        return self.raw.get("dataset")

    @property
    def synth(self) -> SynthSpec:
        return SynthSpec.from_dict(self.raw.get("synth", {}))

    @property
    def scheme(self) -> SchemeConfig:
        return SchemeConfig(**self.raw["scheme"])

    @property
    def characteristics(self) -> list[str] | None:
        return self.raw.get("characteristics")

    @property
    def strategy(self) -> str:
        return self.raw["strategy"]

    @property
    def k(self) -> int:
        return self.raw["k"]

    @property
    def k_range(self) -> list[int]:
        lo, hi = self.raw["k_range"]
        return list(range(lo, hi + 1))

    @property
    def mode(self) -> str:
        return self.raw["mode"]

    @property
    def output_dir(self) -> Path:
        return Path(self.raw["output_dir"])

    @property
    def protocol(self) -> Protocol:
        p = dict(self.raw["protocol"])
        if "fpir_targets" in p:
            p["fpir_targets"] = tuple(p["fpir_targets"])
        return Protocol(k_range=tuple(self.k_range), t_policy=self.raw["t_policy"], **p)


def validate(data: Mapping[str, Any]) -> RunConfig:
    """Schema-check, merge defaults, and cross-check a raw configuration."""
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigurationError(f"config {where}: {exc.message}") from None
    merged = copy.deepcopy(DEFAULTS)
    for key, value in data.items():
        merged[key] = copy.deepcopy(value)
    lo, hi = merged["k_range"]
    if lo > hi:
        raise ConfigurationError("k_range must be [low, high] with low <= high")
    cfg = RunConfig(merged)
    # construct every typed view once so bad combinations fail here
    cfg.scheme
    cfg.protocol
    if "dataset" not in merged:
        cfg.synth.validate(k_max=max(hi, merged["k"]))
    return cfg


def load(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config line {exc.lineno}: {exc.msg}") from None
