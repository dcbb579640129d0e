"""Experiment configuration: a JSON document checked against a bundled schema.

The schema lives next to this module in ``config_schema.json``. Every key is
optional; :data:`DEFAULTS` fills the gaps.
"""

from __future__ import annotations

import copy
import json
import os
from importlib import resources
from pathlib import Path

import jsonschema

OUTPUT_DIR_ENV = "CUCRL_OUTPUT_DIR"

DEFAULTS = {
    "env": {"kind": "three_state"},
    "agent": "cucrl",
    "delta": 0.1,
    "h": 60,
    "K": 30,
    "seed": 0,
    "max_fallback_blocks": 100,
}


class ConfigError(ValueError):
    """Configuration is malformed or inconsistent."""


def schema() -> dict:
    text = resources.files(__package__).joinpath("config_schema.json").read_text()
    return json.loads(text)


def validate(doc: dict) -> dict:
    """Validate ``doc`` and return a copy merged over :data:`DEFAULTS`."""
    try:
        jsonschema.validate(doc, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from exc
    merged = copy.deepcopy(DEFAULTS)
    merged.update(copy.deepcopy(doc))
    return merged


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Read a JSON config file (optional), apply ``overrides`` and validate.

    ``None`` values in ``overrides`` are ignored, so unset command-line
    flags leave the file's values alone.
    """
    doc = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    for key, value in (overrides or {}).items():
        if value is not None:
            doc[key] = value
    return validate(doc)


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "runs"))
