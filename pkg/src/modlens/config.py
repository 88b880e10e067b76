"""Layered run configuration with per-value provenance.

Resolution order for every option: command-line flag, then config file,
then ``MODLENS_*`` environment variable, then the built-in default. The
resolved table (value + source per option) is embedded in each artifact
a command writes, so any run can be reproduced from its outputs.

Config files are JSON objects keyed by command name:

    {"synth": {"comments": 2000, "seed": 7}, "serve": {"port": 9000}}

Keys may use dashes or underscores. Unknown sections and unknown keys in
the invoked command's section are rejected rather than ignored.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

ENV_PREFIX = "MODLENS_"


class ConfigError(Exception):
    """Bad config file, bad env value, or missing required setting."""


def parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def parse_fractions(value: Any) -> tuple[float, ...]:
    """Comma-separated floats, e.g. "0.05,0.1,0.2"; lists pass through."""
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    parts = [p.strip() for p in str(value).split(",") if p.strip()]
    if not parts:
        raise ValueError("empty fraction list")
    return tuple(float(p) for p in parts)


@dataclass(frozen=True)
class OptionSpec:
    """One resolvable setting: kebab-case name, coercion, default."""

    name: str
    cast: Callable[[Any], Any]
    default: Any = None
    required: bool = False

    @property
    def env_name(self) -> str:
        return ENV_PREFIX + self.name.upper().replace("-", "_")


@dataclass(frozen=True)
class ResolvedValue:
    value: Any
    source: str  # flag | file | env | default


@dataclass
class RunConfig:
    """Fully resolved settings for one command invocation."""

    command: str
    values: dict[str, ResolvedValue]

    def __getitem__(self, name: str) -> Any:
        return self.values[name].value

    def get(self, name: str, fallback: Any = None) -> Any:
        entry = self.values.get(name)
        return fallback if entry is None else entry.value

    def as_dict(self) -> dict[str, Any]:
        return {name: rv.value for name, rv in sorted(self.values.items())}

    def provenance(self) -> dict[str, str]:
        return {name: rv.source for name, rv in sorted(self.values.items())}

    def echo(self) -> dict:
        """JSON-safe form embedded into artifacts."""
        return {
            "command": self.command,
            "values": _jsonable(self.as_dict()),
            "provenance": self.provenance(),
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


def _normalize_key(key: str) -> str:
    return key.replace("_", "-")


def load_config_file(path: str | Path, known_commands: Sequence[str]) -> dict[str, dict]:
    """Parse and shape-check a config file; returns command -> options."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must be a JSON object of sections")
    sections: dict[str, dict] = {}
    for section, options in raw.items():
        if section not in known_commands:
            raise ConfigError(f"config file {path}: unknown section {section!r}")
        if not isinstance(options, dict):
            raise ConfigError(f"config file {path}: section {section!r} must be an object")
        sections[section] = {_normalize_key(k): v for k, v in options.items()}
    return sections


def resolve(
    command: str,
    specs: Sequence[OptionSpec],
    flag_values: Mapping[str, Any],
    flag_given: Mapping[str, bool],
    file_section: Mapping[str, Any] | None,
    env: Mapping[str, str] | None = None,
) -> RunConfig:
    """Merge the four layers into a RunConfig, coercing file/env values."""
    env = os.environ if env is None else env
    section = dict(file_section or {})
    known = {spec.name for spec in specs}
    for key in section:
        if key not in known:
            raise ConfigError(f"config section {command!r}: unknown option {key!r}")

    resolved: dict[str, ResolvedValue] = {}
    for spec in specs:
        if flag_given.get(spec.name):
            resolved[spec.name] = ResolvedValue(
                _coerce(spec, flag_values[spec.name], f"option --{spec.name}"),
                "flag")
            continue
        if spec.name in section:
            resolved[spec.name] = ResolvedValue(
                _coerce(spec, section[spec.name], f"config file option {spec.name!r}"),
                "file")
            continue
        if spec.env_name in env:
            resolved[spec.name] = ResolvedValue(
                _coerce(spec, env[spec.env_name], f"environment variable {spec.env_name}"),
                "env")
            continue
        if spec.required:
            raise ConfigError(
                f"{command}: required option {spec.name!r} not set by flag, "
                f"config file, or {spec.env_name}")
        resolved[spec.name] = ResolvedValue(
            _coerce(spec, spec.default, f"default for {spec.name!r}"), "default")
    return RunConfig(command=command, values=resolved)


def _coerce(spec: OptionSpec, value: Any, where: str) -> Any:
    # None means "unset" for optional settings; it passes through uncast.
    if value is None:
        return None
    try:
        return spec.cast(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def write_sidecar(artifact_path: str | Path, cfg: RunConfig) -> Path:
    """Deterministic `<artifact>.meta.json` with the resolved run config."""
    meta_path = Path(str(artifact_path) + ".meta.json")
    meta_path.write_text(
        json.dumps(cfg.echo(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return meta_path
