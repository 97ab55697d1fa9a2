"""Schema-conditioned field extraction and evidence grounding.

The VLM answers a four-part prompt (plus the page's OCR text); each value
is then aligned back onto OCR tokens by a sliding-window normalized edit
distance to attach evidence boxes and a confidence score.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import UnparseableOutputError, ValidationError
from .model import (
    EvidenceRef,
    FieldExtraction,
    FieldKind,
    FieldStatus,
    OcrToken,
    PageImage,
    Schema,
)
from .ocr import DEFAULT_CLASSIFIER_MIN_CONF, tokens_to_text
from .strmatch import (
    levenshtein,
    normalize_amount_for_match,
    normalize_for_match,
)
from .vlm import PromptSpec, VlmBackend, build_prompt, parse_model_json

DEFAULT_MAX_SPAN = 12
DEFAULT_GROUNDING_THRESHOLD = 0.75

_EXAMPLE_VALUES = {
    FieldKind.TEXT: "Example Clinic",
    FieldKind.DATE: "05/10/2024",
    FieldKind.AMOUNT: "1650000",
    FieldKind.IDENTIFIER: "C2024-0001",
}


@dataclass(frozen=True)
class Evidence:
    """A contiguous token span supporting a value."""

    start_order: int
    end_order: int
    bbox: tuple[int, int, int, int]
    confidence: float
    match_score: float

    def __post_init__(self) -> None:
        if self.end_order < self.start_order:
            raise ValidationError("evidence span must be non-empty")
        if not (0.0 <= self.confidence <= 1.0 and 0.0 <= self.match_score <= 1.0):
            raise ValidationError("confidence and match_score must be in [0, 1]")


def _normalizer_for(kind: FieldKind) -> Callable[[str], str]:
    if kind is FieldKind.AMOUNT:
        return normalize_amount_for_match
    return normalize_for_match


def _join_span(token_norms: Sequence[str], kind: FieldKind) -> str:
    # Equivalent to normalizing the space-joined raw texts: the text
    # normalizer collapses whitespace, the amount normalizer drops it.
    if kind is FieldKind.AMOUNT:
        return "".join(token_norms)
    return " ".join(t for t in token_norms if t)


def _span_candidates(
    value_norm: str,
    token_norms: Sequence[str],
    max_span: int,
    threshold: float,
    kind: FieldKind,
) -> tuple[tuple[int, int, float] | None, int]:
    """Best-scoring span as (start, end, score), plus count of tied spans.

    Iterates span lengths ascending then starts ascending, so the first
    strict maximum encountered is automatically the shortest, earliest
    winner. Score comparisons against the running best use exact integer
    cross-multiplication of the distance/length rationals, so pruned and
    tied spans match an exhaustive search bit-for-bit.
    """
    n = len(token_norms)
    lv = len(value_norm)
    best: tuple[int, int] | None = None
    best_d = 0
    best_l = 1
    ties = 0
    for span_len in range(1, min(max_span, n) + 1):
        for start in range(0, n - span_len + 1):
            concat = _join_span(token_norms[start : start + span_len], kind)
            lc = len(concat)
            longest = max(lv, lc)
            gap = abs(lv - lc)
            # The span's score can be at best 1 - gap/longest.
            if 1.0 - gap / longest < threshold:
                continue
            if best is not None and gap * best_l > best_d * longest:
                continue
            cutoff = int((1.0 - threshold) * longest) + 1
            if best is not None:
                cutoff = min(cutoff, best_d * longest // best_l + 1)
            d = levenshtein(value_norm, concat, cutoff=cutoff)
            if 1.0 - d / longest < threshold:
                continue
            if best is None or d * best_l < best_d * longest:
                best = (start, start + span_len - 1)
                best_d, best_l = d, longest
                ties = 0
            elif d * best_l == best_d * longest:
                ties += 1
    if best is None:
        return None, 0
    return (best[0], best[1], 1.0 - best_d / best_l), ties


def ground_value(
    value: str,
    tokens: Sequence[OcrToken],
    max_span: int = DEFAULT_MAX_SPAN,
    threshold: float = DEFAULT_GROUNDING_THRESHOLD,
    kind: FieldKind = FieldKind.TEXT,
) -> Evidence | None:
    """Locate value within the tokens; None when nothing scores >= threshold.

    Similarity is 1 - levenshtein/max over normalized strings; ties break
    by shorter span, then earlier start. Evidence confidence is the
    minimum token confidence in the span (one doubtful token taints the
    field). Amount fields compare digit skeletons so "1650000" grounds to
    a token printed as "1.650.000".
    """
    evidence, _ = ground_value_with_ties(value, tokens, max_span, threshold, kind)
    return evidence


def ground_value_with_ties(
    value: str,
    tokens: Sequence[OcrToken],
    max_span: int = DEFAULT_MAX_SPAN,
    threshold: float = DEFAULT_GROUNDING_THRESHOLD,
    kind: FieldKind = FieldKind.TEXT,
) -> tuple[Evidence | None, int]:
    normalize = _normalizer_for(kind)
    value_norm = normalize(value)
    if not value_norm or not tokens:
        return None, 0
    ordered = sorted(tokens, key=lambda t: t.order)
    token_norms = [normalize(t.text) for t in ordered]
    best, ties = _span_candidates(value_norm, token_norms, max_span, threshold, kind)
    if best is None:
        return None, 0
    start, end, score = best
    members = ordered[start : end + 1]
    bbox = (
        min(t.bbox[0] for t in members),
        min(t.bbox[1] for t in members),
        max(t.bbox[2] for t in members),
        max(t.bbox[3] for t in members),
    )
    evidence = Evidence(
        start_order=members[0].order,
        end_order=members[-1].order,
        bbox=bbox,
        confidence=min(t.confidence for t in members),
        match_score=score,
    )
    return evidence, ties


# -- extraction ---------------------------------------------------------------


def extraction_prompt_spec(schema: Schema, doc_display_name: str) -> PromptSpec:
    """Four-part extraction prompt for one document type's schema."""
    example = ", ".join(
        f'"{f.name}": "{_EXAMPLE_VALUES[f.kind]}"' for f in schema.fields
    )
    return PromptSpec(
        role_definition=(
            "You are an information extraction assistant for insurance claim "
            f"processing. Extract the following fields from this {doc_display_name} image."
        ),
        field_definitions=tuple((f.name, f.description, f.kind) for f in schema.fields),
        output_format=(
            "Return the result as JSON: a single object whose keys are exactly the "
            "field names listed above. Use null for any field not present on the page."
        ),
        example_output="{" + example + "}",
    )


def build_extraction_prompt(
    schema: Schema,
    doc_display_name: str,
    ocr_tokens: Sequence[OcrToken],
    include_ocr_text: bool = True,
    ocr_min_conf: float = DEFAULT_CLASSIFIER_MIN_CONF,
) -> str:
    """The full prompt sent for field extraction, OCR text appended.

    The corpus generator reuses this builder so fixture keys line up with
    what the pipeline sends.
    """
    prompt = build_prompt(extraction_prompt_spec(schema, doc_display_name))
    if include_ocr_text:
        prompt += "\n\nOCR TEXT\n" + tokens_to_text(ocr_tokens, min_conf=ocr_min_conf)
    return prompt


def extract_fields(
    page: PageImage,
    schema: Schema,
    ocr_tokens: Sequence[OcrToken],
    vlm: VlmBackend,
    doc_display_name: str | None = None,
    include_ocr_text: bool = True,
    max_span: int = DEFAULT_MAX_SPAN,
    grounding_threshold: float = DEFAULT_GROUNDING_THRESHOLD,
    diagnostics: list[str] | None = None,
) -> list[FieldExtraction]:
    """One FieldExtraction per schema field, in schema order.

    Values the model omits (or nulls) come back as missing; unparseable
    model output downgrades every field to missing with a diagnostic
    instead of crashing. Grounded values carry evidence and the span's
    minimum token confidence; normalization and review thresholds are
    applied downstream.
    """
    if not schema.fields:
        return []
    display = doc_display_name or schema.doc_type.replace("_", " ")
    prompt = build_extraction_prompt(
        schema, display, ocr_tokens, include_ocr_text=include_ocr_text
    )
    response = vlm.chat(page, prompt)
    try:
        values = parse_model_json(response.raw_text)
    except UnparseableOutputError:
        if diagnostics is not None:
            diagnostics.append("model output had no parseable JSON; all fields missing")
        values = {}
    extractions: list[FieldExtraction] = []
    for spec in schema.fields:
        raw = values.get(spec.name)
        if raw is None:
            extractions.append(
                FieldExtraction(
                    field=spec.name,
                    raw_value=None,
                    normalized_value=None,
                    status=FieldStatus.MISSING,
                )
            )
            continue
        evidence, ties = ground_value_with_ties(
            raw, ocr_tokens, max_span=max_span, threshold=grounding_threshold, kind=spec.kind
        )
        if ties and diagnostics is not None:
            diagnostics.append(
                f"field {spec.name}: {ties} tied grounding span(s); kept earliest"
            )
        refs: tuple[EvidenceRef, ...] = ()
        confidence = None
        if evidence is not None:
            refs = (EvidenceRef(page_index=page.page_index, bbox=evidence.bbox),)
            confidence = evidence.confidence
        extractions.append(
            FieldExtraction(
                field=spec.name,
                raw_value=raw,
                normalized_value=None,
                evidence=refs,
                confidence=confidence,
                status=FieldStatus.EXTRACTED,
            )
        )
    return extractions
