"""World configuration from YAML files, env vars, and CLI overrides."""
from __future__ import annotations

import os
from pathlib import Path

import yaml

from .engine import WorldConfig
from .recording import config_from_dict, config_to_dict

DATA_DIR_ENV = "SLITFOREST_DATA_DIR"


def load_config(path=None) -> WorldConfig:
    """Build a WorldConfig from a YAML mapping, filling gaps with defaults.

    The file mirrors the session-file header layout: top-level world fields
    plus a nested geometry mapping. Any subset of keys is allowed.
    """
    merged = config_to_dict(WorldConfig())
    if path is not None:
        loaded = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ValueError(f"{path}: config must be a mapping")
        geometry = loaded.pop("geometry", {})
        if not isinstance(geometry, dict):
            raise ValueError(f"{path}: geometry must be a mapping")
        unknown = set(loaded) - set(merged) | set(geometry) - set(merged["geometry"])
        if unknown:
            raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
        merged.update(loaded)
        merged["geometry"].update(geometry)
    return config_from_dict(merged)


def dump_config(config: WorldConfig) -> str:
    return yaml.safe_dump(config_to_dict(config), sort_keys=True)


def resolve_data_dir(cli_value=None) -> Path:
    if cli_value is not None:
        return Path(cli_value)
    return Path(os.environ.get(DATA_DIR_ENV, "."))
