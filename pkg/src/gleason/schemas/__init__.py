"""JSON schema files for every JSON document the package writes."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema

NAMES = ("domain", "polynomial", "decomposition", "certificate", "summary", "path_plan")


@lru_cache(maxsize=None)
def load(name: str) -> dict:
    if name not in NAMES:
        raise KeyError(f"unknown schema {name!r}")
    return json.loads(resources.files(__package__).joinpath(f"{name}.schema.json").read_text())


def validate(payload: dict, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` if ``payload`` does not match."""
    jsonschema.validate(payload, load(name))
