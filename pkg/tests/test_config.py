"""Config loading: defaults, file values, env overrides, path resolution."""

from __future__ import annotations

import pytest

from claimpipe.config import PipelineConfig, load_config


def test_defaults_without_file():
    config = load_config(None)
    assert config.max_dim == 1024
    assert config.low_confidence_threshold == 0.80
    assert config.grounding_threshold == 0.75
    assert config.ocr.fixture_dir is None and config.ocr.endpoint is None


def test_file_values_and_relative_paths(tmp_path):
    (tmp_path / "fixtures").mkdir()
    (tmp_path / "config.yaml").write_text(
        "store_dir: store\n"
        "model_file: model.json\n"
        "low_confidence_threshold: 0.9\n"
        "ocr:\n  fixture_dir: fixtures\n"
        "vlm:\n  fixture_file: fixtures/responses.json\n"
    )
    config = load_config(tmp_path / "config.yaml")
    assert config.low_confidence_threshold == 0.9
    # Relative paths resolve against the config file's directory.
    assert config.store_dir == str(tmp_path / "store")
    assert config.model_file == str(tmp_path / "model.json")
    assert config.ocr.fixture_dir == str(tmp_path / "fixtures")
    assert config.vlm.fixture_file == str(tmp_path / "fixtures" / "responses.json")


def test_absolute_paths_untouched(tmp_path):
    (tmp_path / "config.yaml").write_text(f"store_dir: {tmp_path / 'elsewhere'}\n")
    config = load_config(tmp_path / "config.yaml")
    assert config.store_dir == str(tmp_path / "elsewhere")


def test_env_overrides_endpoints(tmp_path, monkeypatch):
    (tmp_path / "config.yaml").write_text("ocr:\n  fixture_dir: fixtures\n")
    monkeypatch.setenv("CLAIMPIPE_OCR_ENDPOINT", "http://ocr:9000")
    monkeypatch.setenv("CLAIMPIPE_VLM_ENDPOINT", "http://vlm:9001")
    monkeypatch.setenv("CLAIMPIPE_VLM_MODEL", "qwen2.5-vl-72b")
    config = load_config(tmp_path / "config.yaml")
    # Endpoint overrides win over fixture settings from the file.
    assert config.ocr.endpoint == "http://ocr:9000"
    assert config.ocr.fixture_dir is None
    assert config.vlm.endpoint == "http://vlm:9001"
    assert config.vlm.model == "qwen2.5-vl-72b"


def test_unknown_keys_ignored(tmp_path):
    (tmp_path / "config.yaml").write_text("unknown_future_key: 1\nmax_dim: 900\n")
    config = load_config(tmp_path / "config.yaml")
    assert config.max_dim == 900
    assert isinstance(config, PipelineConfig)
