from __future__ import annotations

from pathlib import Path

import pytest

from stockdesk.config import ConfigError, RunConfig, load_config

TOML = """
[store]
dir = "data/store"

[backend]
endpoint = "http://localhost:9000/v1/chat/completions"
model_id = "analyst"

[synthesizer]
mode = "llm"
plan_narrowing = true
"""


def test_defaults():
    cfg = load_config(env={})
    assert cfg == RunConfig()
    assert cfg.store_dir is None and cfg.synthesizer == "template"


def test_file_values(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text(TOML)
    cfg = load_config(path, env={})
    assert cfg.store_dir == Path("data/store")
    assert cfg.synthesizer == "llm" and cfg.plan_narrowing is True
    assert cfg.backend.max_output_tokens == 8000 and cfg.backend.temperature == 0.5


def test_env_overrides_file(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text(TOML)
    env = {"FINSPHERE_SYNTHESIZER_MODE": "template", "FINSPHERE_BACKEND_TEMPERATURE": "0.2",
           "FINSPHERE_SYNTHESIZER_PLAN_NARROWING": "no"}
    cfg = load_config(path, env=env)
    assert cfg.synthesizer == "template" and cfg.plan_narrowing is False
    assert cfg.backend.temperature == 0.2


def test_explicit_overrides_win(tmp_path):
    cfg = load_config(env={"FINSPHERE_OUTPUT_DIR": "a"}, output_dir="b", store_dir=None)
    assert cfg.output_dir == Path("b") and cfg.store_dir is None


@pytest.mark.parametrize("text", ["[store]\npath = 'x'\n", "[extra]\nx = 1\n", "not toml ="])
def test_bad_files(tmp_path, text):
    path = tmp_path / "c.toml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path, env={})


def test_llm_requires_backend():
    with pytest.raises(ConfigError):
        load_config(env={"FINSPHERE_SYNTHESIZER_MODE": "llm"})
    with pytest.raises(ConfigError):
        load_config(env={"FINSPHERE_SYNTHESIZER_MODE": "poetry"})


def test_bad_values():
    with pytest.raises(ConfigError):
        load_config(env={"FINSPHERE_BACKEND_ENDPOINT": "http://x", "FINSPHERE_BACKEND_MODEL_ID": "m",
                         "FINSPHERE_BACKEND_TEMPERATURE": "warm"})
    with pytest.raises(ConfigError):
        load_config(env={"FINSPHERE_BACKEND_ENDPOINT": "http://x", "FINSPHERE_BACKEND_MODEL_ID": "m",
                         "FINSPHERE_BACKEND_TEMPERATURE": "5"})
    with pytest.raises(ConfigError):
        load_config(Path("/nonexistent/c.toml"), env={})
