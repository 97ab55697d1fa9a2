"""Pipeline configuration: file-based with environment overrides.

A YAML config selects backends (fixture or live), data files, thresholds
and the store location; CLAIMPIPE_* environment variables override the
backend endpoints so deployments can rewire without editing files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .extract import DEFAULT_GROUNDING_THRESHOLD, DEFAULT_MAX_SPAN
from .model import DEFAULT_LOW_CONFIDENCE_THRESHOLD
from .ocr import DEFAULT_CLASSIFIER_MIN_CONF
from .postprocess import DEFAULT_PREFILTER_TOP_K, DEFAULT_SIMILARITY_THRESHOLD
from .preprocess import DEFAULT_DPI, DEFAULT_MAX_BYTES, DEFAULT_MAX_DIM


@dataclass(frozen=True)
class OcrConfig:
    fixture_dir: str | None = None
    endpoint: str | None = None
    timeout_ms: int = 10_000
    retries: int = 2
    language_hints: tuple[str, ...] = ("en", "vi")
    max_in_flight: int = 8


@dataclass(frozen=True)
class VlmConfig:
    fixture_file: str | None = None
    endpoint: str | None = None
    model: str = "qwen2.5-vl-7b"
    timeout_ms: int = 60_000
    max_in_flight: int = 4


@dataclass(frozen=True)
class PipelineConfig:
    registry_files: tuple[str, ...] = ()  # empty -> built-in SG+VN registries
    title_rules_file: str | None = None  # None -> built-in rule table
    reference_list_file: str | None = None  # None -> built-in hospital list
    model_file: str | None = None
    store_dir: str = "claimpipe-store"
    ocr: OcrConfig = field(default_factory=OcrConfig)
    vlm: VlmConfig = field(default_factory=VlmConfig)
    rasterizer: str | None = None
    max_dim: int = DEFAULT_MAX_DIM
    dpi: int = DEFAULT_DPI
    max_bytes: int = DEFAULT_MAX_BYTES
    low_confidence_threshold: float = DEFAULT_LOW_CONFIDENCE_THRESHOLD
    grounding_threshold: float = DEFAULT_GROUNDING_THRESHOLD
    grounding_max_span: int = DEFAULT_MAX_SPAN
    classifier_min_conf: float = DEFAULT_CLASSIFIER_MIN_CONF
    entity_similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    entity_prefilter_top_k: int = DEFAULT_PREFILTER_TOP_K
    include_ocr_text: bool = True
    day_first: bool = True
    page_workers: int = 4

    def with_env_overrides(self) -> "PipelineConfig":
        cfg = self
        ocr_endpoint = os.environ.get("CLAIMPIPE_OCR_ENDPOINT")
        if ocr_endpoint:
            cfg = replace(cfg, ocr=replace(cfg.ocr, endpoint=ocr_endpoint, fixture_dir=None))
        vlm_endpoint = os.environ.get("CLAIMPIPE_VLM_ENDPOINT")
        if vlm_endpoint:
            cfg = replace(cfg, vlm=replace(cfg.vlm, endpoint=vlm_endpoint, fixture_file=None))
        vlm_model = os.environ.get("CLAIMPIPE_VLM_MODEL")
        if vlm_model:
            cfg = replace(cfg, vlm=replace(cfg.vlm, model=vlm_model))
        return cfg


def load_config(path: str | Path | None) -> PipelineConfig:
    """Read a YAML config file; a missing path yields pure defaults.

    Relative paths in the file resolve against the file's directory, and
    environment overrides are applied afterwards."""
    if path is None:
        return PipelineConfig().with_env_overrides()
    base_dir = Path(path).resolve().parent
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}

    def resolve(value: str | None) -> str | None:
        if value is None:
            return None
        return str((base_dir / value).resolve()) if not Path(value).is_absolute() else value

    ocr_data = dict(data.get("ocr", {}))
    ocr_data["fixture_dir"] = resolve(ocr_data.get("fixture_dir"))
    ocr_data["language_hints"] = tuple(ocr_data.get("language_hints", ("en", "vi")))
    ocr = OcrConfig(**ocr_data)
    vlm_data = dict(data.get("vlm", {}))
    vlm_data["fixture_file"] = resolve(vlm_data.get("fixture_file"))
    vlm = VlmConfig(**vlm_data)
    known = {
        k: v
        for k, v in data.items()
        if k not in ("ocr", "vlm") and k in PipelineConfig.__dataclass_fields__
    }
    if "registry_files" in known:
        known["registry_files"] = tuple(resolve(p) for p in known["registry_files"])
    for key in ("title_rules_file", "reference_list_file", "model_file", "store_dir"):
        if known.get(key) is not None:
            known[key] = resolve(known[key])
    return PipelineConfig(**known, ocr=ocr, vlm=vlm).with_env_overrides()
