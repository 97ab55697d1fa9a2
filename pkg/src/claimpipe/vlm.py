"""Vision-language backend contract, prompt generator, and output parsing.

The prompt generator emits a one-slot structured prompt with four fixed
sections; adapters speak an OpenAI-compatible chat-completions protocol or
replay canned fixtures keyed by (page digest, prompt hash).
"""

from __future__ import annotations

import base64
import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import httpx

from .errors import (
    BackendUnavailableError,
    FixtureMissError,
    ProtocolError,
    UnparseableOutputError,
    ValidationError,
)
from .model import FieldKind, PageImage

SECTION_HEADERS = ("ROLE", "FIELDS", "OUTPUT FORMAT", "EXAMPLE")


@dataclass(frozen=True)
class PromptSpec:
    """The four prompt components: role, fields, output format, example."""

    role_definition: str
    field_definitions: tuple[tuple[str, str, FieldKind], ...]
    output_format: str
    example_output: str

    def __post_init__(self) -> None:
        if not self.role_definition.strip():
            raise ValidationError("role_definition must be non-empty")
        if not self.field_definitions:
            raise ValidationError("field_definitions must be non-empty")
        if not self.output_format.strip():
            raise ValidationError("output_format must be non-empty")
        if not self.example_output.strip():
            raise ValidationError("example_output must be non-empty")
        names = [name for name, _, _ in self.field_definitions]
        if len(names) != len(set(names)):
            raise ValidationError("field names in prompt spec must be unique")
        if any(not name.strip() or not desc.strip() for name, desc, _ in self.field_definitions):
            raise ValidationError("field names and descriptions must be non-empty")


def build_prompt(spec: PromptSpec) -> str:
    """Deterministic four-section prompt; same spec, same bytes."""
    lines = [
        "ROLE",
        spec.role_definition.strip(),
        "",
        "FIELDS",
    ]
    lines.extend(f"- {name}: {desc.strip()}" for name, desc, _ in spec.field_definitions)
    lines.extend(
        [
            "",
            "OUTPUT FORMAT",
            spec.output_format.strip(),
            "",
            "EXAMPLE",
            spec.example_output.strip(),
        ]
    )
    return "\n".join(lines)


@dataclass(frozen=True)
class VlmResponse:
    raw_text: str
    latency_ms: float = 0.0

    def __post_init__(self) -> None:
        if self.latency_ms < 0:
            raise ValidationError("latency must be >= 0")


class VlmBackend(Protocol):
    def chat(self, page: PageImage, prompt: str) -> VlmResponse: ...


@dataclass(frozen=True)
class VlmBackendConfig:
    endpoint: str = ""
    model: str = "qwen2.5-vl-7b"
    timeout_ms: int = 60_000
    max_in_flight: int = 4


class HttpVlmBackend:
    """OpenAI-compatible chat completions with one image and one text part.

    Temperature is pinned to 0 for determinism. In-flight requests are
    capped to protect a single-GPU server.
    """

    def __init__(self, config: VlmBackendConfig, client: httpx.Client | None = None) -> None:
        if not config.endpoint:
            raise ValueError("HTTP VLM backend needs an endpoint")
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout_ms / 1000.0)
        self._slots = threading.BoundedSemaphore(config.max_in_flight)

    def chat(self, page: PageImage, prompt: str) -> VlmResponse:
        url = self.config.endpoint.rstrip("/") + "/v1/chat/completions"
        image_b64 = base64.b64encode(page.pixel_data).decode("ascii")
        payload = {
            "model": self.config.model,
            "temperature": 0,
            "messages": [
                {
                    "role": "user",
                    "content": [
                        {
                            "type": "image_url",
                            "image_url": {"url": f"data:image/png;base64,{image_b64}"},
                        },
                        {"type": "text", "text": prompt},
                    ],
                }
            ],
        }
        started = time.perf_counter()
        try:
            with self._slots:
                response = self._client.post(url, json=payload)
        except httpx.HTTPError as exc:
            raise BackendUnavailableError(f"VLM backend unreachable: {exc}") from exc
        latency_ms = (time.perf_counter() - started) * 1000.0
        if response.status_code != 200:
            raise ProtocolError(f"VLM backend returned HTTP {response.status_code}")
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(f"unexpected chat-completions body: {exc}") from exc
        if not isinstance(content, str):
            raise ProtocolError("chat-completions content is not a string")
        return VlmResponse(raw_text=content, latency_ms=latency_ms)


def prompt_key(page_digest: str, prompt: str) -> str:
    """Fixture key: page digest plus prompt hash."""
    prompt_hash = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
    return f"{page_digest}/{prompt_hash}"


class FixtureVlmBackend:
    """Replays canned completions from a JSON file keyed by prompt_key."""

    def __init__(self, fixture_file: str | Path) -> None:
        self.fixture_file = Path(fixture_file)
        self._responses: dict[str, str] = json.loads(
            self.fixture_file.read_text(encoding="utf-8")
        )

    def chat(self, page: PageImage, prompt: str) -> VlmResponse:
        key = prompt_key(page.source_digest, prompt)
        try:
            raw = self._responses[key]
        except KeyError:
            raise FixtureMissError(
                f"no VLM fixture for digest {page.source_digest} and this prompt"
            ) from None
        return VlmResponse(raw_text=raw, latency_ms=0.0)


# -- model output parsing ----------------------------------------------------

_TRAILING_COMMA_RE = re.compile(r",(\s*[}\]])")


def _balanced_object(text: str, start: int) -> str | None:
    """The balanced {...} substring starting at start, or None."""
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def _stringify(value: object) -> str | None:
    if value is None:
        return None
    if isinstance(value, str):
        return value
    # Numbers, booleans, and nested structures become their JSON text.
    return json.dumps(value, ensure_ascii=False)


def parse_model_json(raw: str) -> dict[str, str | None]:
    """First top-level JSON object in raw text, values stringified.

    Tolerates surrounding prose, markdown fences, and trailing commas.
    Anything deeper than that is an unparseable-output error: predictable
    failure beats silent guessing.
    """
    start = raw.find("{")
    while start != -1:
        candidate = _balanced_object(raw, start)
        if candidate is not None:
            for attempt in (candidate, _TRAILING_COMMA_RE.sub(r"\1", candidate)):
                try:
                    parsed = json.loads(attempt)
                except ValueError:
                    continue
                if isinstance(parsed, dict):
                    return {str(k): _stringify(v) for k, v in parsed.items()}
                break
        start = raw.find("{", start + 1)
    raise UnparseableOutputError("no parseable JSON object in model output")
