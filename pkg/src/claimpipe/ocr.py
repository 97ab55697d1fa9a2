"""OCR backend contract and adapters.

Two adapters ship: an HTTP client for a real multilingual OCR engine, and
a fixture adapter resolving page digests to stored token lists so the rest
of the pipeline can be tested without the engine.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import httpx

from .errors import BackendUnavailableError, FixtureMissError, ProtocolError
from .model import OcrToken, PageImage

# Tokens on the same visual line overlap vertically; below this fraction of
# the shorter box we treat the gap as a line break.
LINE_OVERLAP_MIN = 0.30

# Classifier text keeps low-confidence tokens for recall; grounding uses all.
DEFAULT_CLASSIFIER_MIN_CONF = 0.30


@dataclass(frozen=True)
class OcrBackendConfig:
    endpoint: str = ""
    timeout_ms: int = 10_000
    retries: int = 2
    language_hints: tuple[str, ...] = ()
    max_in_flight: int = 8

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")


class OcrBackend(Protocol):
    def recognize(self, page: PageImage, language_hints: Sequence[str]) -> list[OcrToken]: ...


def _clamp_box(
    box: Sequence[float], width: int, height: int
) -> tuple[int, int, int, int] | None:
    x0, y0, x1, y1 = (round(float(v)) for v in box)
    x0, x1 = max(0, min(x0, width)), max(0, min(x1, width))
    y0, y1 = max(0, min(y0, height)), max(0, min(y1, height))
    if x0 >= x1 or y0 >= y1:
        return None
    return x0, y0, x1, y1


def tokens_from_rows(rows: list, page: PageImage) -> list[OcrToken]:
    """Build OcrTokens from backend rows of {text, box, score}.

    Backend order is trusted as reading order. Boxes are clamped to the
    page; rows that collapse to nothing (empty text, degenerate box) are
    dropped.
    """
    tokens: list[OcrToken] = []
    for row in rows:
        try:
            text = str(row["text"])
            box = row["box"]
            score = float(row["score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed OCR row {row!r}") from exc
        if not text.strip():
            continue
        clamped = _clamp_box(box, page.width, page.height)
        if clamped is None:
            continue
        score = min(1.0, max(0.0, score))
        tokens.append(
            OcrToken(
                text=text,
                bbox=clamped,
                confidence=score,
                order=len(tokens),
                page_index=page.page_index,
            )
        )
    return tokens


def sort_reading_order(rows: list[dict]) -> list[dict]:
    """Top-to-bottom by box center y, then left-to-right; for backends
    that do not provide a reading order of their own."""

    def center(row: dict) -> tuple[float, float]:
        x0, y0, x1, y1 = row["box"]
        return ((y0 + y1) / 2.0, (x0 + x1) / 2.0)

    return sorted(rows, key=center)


class HttpOcrBackend:
    """POSTs the page PNG to {endpoint}/ocr and parses token rows."""

    def __init__(self, config: OcrBackendConfig, client: httpx.Client | None = None) -> None:
        if not config.endpoint:
            raise ValueError("HTTP OCR backend needs an endpoint")
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout_ms / 1000.0)
        self._slots = threading.BoundedSemaphore(config.max_in_flight)

    def recognize(self, page: PageImage, language_hints: Sequence[str]) -> list[OcrToken]:
        url = self.config.endpoint.rstrip("/") + "/ocr"
        hints = list(language_hints or self.config.language_hints)
        attempts = self.config.retries + 1
        last_error: Exception | None = None
        for _ in range(attempts):
            try:
                with self._slots:
                    response = self._client.post(
                        url,
                        files={"image": ("page.png", page.pixel_data, "image/png")},
                        data={"languages": json.dumps(hints)},
                    )
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code != 200:
                raise ProtocolError(f"OCR backend returned HTTP {response.status_code}")
            try:
                rows = response.json()
            except ValueError as exc:
                raise ProtocolError("OCR backend returned non-JSON body") from exc
            if not isinstance(rows, list):
                raise ProtocolError("OCR backend response is not a JSON array")
            return tokens_from_rows(rows, page)
        raise BackendUnavailableError(
            f"OCR backend unreachable after {attempts} attempts: {last_error}"
        )


class FixtureOcrBackend:
    """Resolves page digest -> stored token list from a fixture directory.

    One JSON file per page digest, same row shape as the HTTP response.
    A missing fixture is a test-setup bug and raises, unless constructed
    with strict=False.
    """

    def __init__(self, fixture_dir: str | Path, strict: bool = True) -> None:
        self.fixture_dir = Path(fixture_dir)
        self.strict = strict
        self._cache: dict[str, list] = {}

    def recognize(self, page: PageImage, language_hints: Sequence[str]) -> list[OcrToken]:
        rows = self._cache.get(page.source_digest)
        if rows is None:
            path = self.fixture_dir / f"{page.source_digest}.json"
            if not path.exists():
                if self.strict:
                    raise FixtureMissError(f"no OCR fixture for digest {page.source_digest}")
                return []
            rows = json.loads(path.read_text(encoding="utf-8"))
            self._cache[page.source_digest] = rows
        return tokens_from_rows(rows, page)


def recognize_page(
    page: PageImage, backend: OcrBackend, language_hints: Sequence[str] = ()
) -> list[OcrToken]:
    """Run the backend and enforce the token contract (strict order)."""
    tokens = backend.recognize(page, language_hints)
    for i, token in enumerate(tokens):
        if token.page_index != page.page_index:
            raise ProtocolError("token page_index disagrees with page")
        if i > 0 and tokens[i - 1].order >= token.order:
            raise ProtocolError("token reading order must be strictly increasing")
    return tokens


def _vertical_overlap(a: OcrToken, b: OcrToken) -> float:
    overlap = min(a.bbox[3], b.bbox[3]) - max(a.bbox[1], b.bbox[1])
    shorter = min(a.bbox[3] - a.bbox[1], b.bbox[3] - b.bbox[1])
    if shorter <= 0:
        return 0.0
    return max(0.0, overlap / shorter)


def tokens_to_text(tokens: Sequence[OcrToken], min_conf: float = 0.0) -> str:
    """Join confident tokens in reading order, breaking lines where the
    vertical overlap between consecutive kept tokens falls below 30%."""
    kept = [t for t in sorted(tokens, key=lambda t: t.order) if t.confidence >= min_conf]
    if not kept:
        return ""
    parts = [kept[0].text]
    for prev, cur in zip(kept, kept[1:]):
        if _vertical_overlap(prev, cur) < LINE_OVERLAP_MIN:
            parts.append("\n" + cur.text)
        else:
            parts.append(" " + cur.text)
    return "".join(parts)
