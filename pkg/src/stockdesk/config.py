"""Run configuration from a TOML file with environment overrides.

File layout::

    [store]
    dir = "data/store"

    [backend]
    endpoint = "http://localhost:8000/v1/chat/completions"
    model_id = "analyst"
    max_output_tokens = 8000
    temperature = 0.5

    [synthesizer]
    mode = "template"        # or "llm"
    plan_narrowing = false

    [output]
    dir = "out"

Any key can be overridden with ``FINSPHERE_<SECTION>_<KEY>``, e.g.
``FINSPHERE_SYNTHESIZER_MODE=llm`` or ``FINSPHERE_BACKEND_ENDPOINT=...``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .orchestrator.backend import BackendConfig, BackendConfigError
from .resources import tomllib

ENV_PREFIX = "FINSPHERE_"
SYNTHESIZERS = ("template", "llm")

_SECTION_KEYS = {
    "store": {"dir": str},
    "backend": {"endpoint": str, "model_id": str, "max_output_tokens": int, "temperature": float,
                "timeout_s": float, "max_retries": int, "retry_backoff_s": float, "api_key": str,
                "response_pointer": str},
    "synthesizer": {"mode": str, "plan_narrowing": bool},
    "output": {"dir": str},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    store_dir: Path | None = None
    backend: BackendConfig | None = None
    synthesizer: str = "template"
    plan_narrowing: bool = False
    output_dir: Path = Path("out")

    def __post_init__(self):
        if self.synthesizer not in SYNTHESIZERS:
            raise ConfigError(f"synthesizer must be one of {SYNTHESIZERS}, got {self.synthesizer!r}")
        if self.synthesizer == "llm" and self.backend is None:
            raise ConfigError("synthesizer 'llm' requires a [backend] section with endpoint and model_id")


def _coerce(value, kind, name: str):
    if kind is bool:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {value!r}")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected {kind.__name__}, got {value!r}") from None


def _merged(path: Path | str | None, env: Mapping[str, str]) -> dict[str, dict]:
    data: dict[str, dict] = {s: {} for s in _SECTION_KEYS}
    if path is not None:
        try:
            raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from None
        for section, values in raw.items():
            if section not in _SECTION_KEYS or not isinstance(values, dict):
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in values.items():
                if key not in _SECTION_KEYS[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                data[section][key] = value
    for section, keys in _SECTION_KEYS.items():
        for key in keys:
            name = f"{ENV_PREFIX}{section.upper()}_{key.upper()}"
            if name in env:
                data[section][key] = env[name]
    for section, keys in _SECTION_KEYS.items():
        for key, value in list(data[section].items()):
            data[section][key] = _coerce(value, keys[key], f"{section}.{key}")
    return data


def load_config(path: Path | str | None = None, env: Mapping[str, str] | None = None, **overrides) -> RunConfig:
    """Build a :class:`RunConfig` from file, then environment, then ``overrides``.

    ``overrides`` use RunConfig field names; ``None`` values are ignored.
    """
    env = os.environ if env is None else env
    data = _merged(path, env)
    backend = None
    if data["backend"]:
        try:
            backend = BackendConfig(**data["backend"])
        except TypeError as exc:
            raise ConfigError(f"[backend]: {exc}") from None
        except BackendConfigError as exc:
            raise ConfigError(f"[backend]: {exc}") from None
    values = {
        "store_dir": Path(data["store"]["dir"]) if "dir" in data["store"] else None,
        "backend": backend,
        "synthesizer": data["synthesizer"].get("mode", "template"),
        "plan_narrowing": data["synthesizer"].get("plan_narrowing", False),
        "output_dir": Path(data["output"].get("dir", "out")),
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = Path(value) if key in ("store_dir", "output_dir") else value
    return RunConfig(**values)
