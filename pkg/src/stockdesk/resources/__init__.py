"""Bundled text resources: prompt sections, lexicons and fixtures."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


def path(*parts: str) -> Path:
    return Path(str(resources.files(__name__).joinpath(*parts)))


def read_text(*parts: str) -> str:
    return resources.files(__name__).joinpath(*parts).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def read_list(*parts: str) -> tuple[str, ...]:
    """Non-empty, non-comment lines of a list file."""
    lines = (line.strip() for line in read_text(*parts).splitlines())
    return tuple(line for line in lines if line and not line.startswith("#"))


def read_toml(*parts: str) -> dict:
    return tomllib.loads(read_text(*parts))
