"""Layered configuration: CLI flag > config file section > built-in default.

Config files are JSON with one section per subcommand plus shared "model" and
"train" sections, e.g. {"model": {"d_model": 64}, "train": {"max_steps": 500},
"filter": {"max_words": 30}}.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from .errors import ConfigError


def load_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


class Resolver:
    """Tracks resolved values so the effective config can be printed."""

    def __init__(self, file_config: dict, section: str):
        self.file_config = file_config
        self.section = section
        self.effective: dict = {}

    def get(self, key: str, cli_value, default, section: str | None = None):
        section = section or self.section
        if cli_value is not None:
            value = cli_value
        else:
            value = self.file_config.get(section, {}).get(key, default)
        self.effective.setdefault(section, {})[key] = value
        return value

    def section_dict(self, section: str, overrides: dict | None = None) -> dict:
        merged = dict(self.file_config.get(section, {}))
        if overrides:
            merged.update({k: v for k, v in overrides.items() if v is not None})
        self.effective[section] = {**self.effective.get(section, {}), **merged}
        return merged

    def announce(self, command: str) -> None:
        print(
            json.dumps({"command": command, "effective_config": self.effective}),
            file=sys.stderr,
        )
