"""The persisted per-document record and its JSON form.

JSON uses snake_case keys throughout; the published schema lives in
data/claim_result.schema.json and the service contract tests validate
stored records against it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .classify import ClassificationOutcome
from .model import (
    ClassificationMethod,
    CompletenessReport,
    EvidenceRef,
    FieldExtraction,
    FieldStatus,
)


@dataclass(frozen=True)
class CorrectionEntry:
    field: str
    page_index: int
    old: str | None
    new: str
    corrected_at: str


@dataclass
class PageResult:
    page_index: int
    width: int
    height: int
    classification: ClassificationOutcome | None
    fields: list[FieldExtraction]
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class ClaimExtractionResult:
    claim_id: str
    source_digest: str
    filename: str
    created_at: str
    pages: list[PageResult]
    bundle: CompletenessReport
    timings_ms: dict[str, float]
    corrections: list[CorrectionEntry] = field(default_factory=list)


# -- JSON mapping ---------------------------------------------------------


def _field_to_dict(f: FieldExtraction) -> dict:
    return {
        "field": f.field,
        "raw_value": f.raw_value,
        "normalized_value": f.normalized_value,
        "evidence": [
            {"page_index": e.page_index, "bbox": list(e.bbox)} for e in f.evidence
        ],
        "confidence": f.confidence,
        "status": f.status.value,
    }


def _field_from_dict(data: dict) -> FieldExtraction:
    return FieldExtraction(
        field=data["field"],
        raw_value=data.get("raw_value"),
        normalized_value=data.get("normalized_value"),
        evidence=tuple(
            EvidenceRef(page_index=e["page_index"], bbox=tuple(e["bbox"]))
            for e in data.get("evidence", [])
        ),
        confidence=data.get("confidence"),
        status=FieldStatus(data["status"]),
    )


def _classification_to_dict(c: ClassificationOutcome | None) -> dict | None:
    if c is None:
        return None
    return {
        "doc_type": c.doc_type,
        "method": c.method.value,
        "title": c.title,
        "probabilities": c.probabilities,
    }


def _classification_from_dict(data: dict | None) -> ClassificationOutcome | None:
    if data is None:
        return None
    return ClassificationOutcome(
        doc_type=data["doc_type"],
        method=ClassificationMethod(data["method"]),
        title=data.get("title"),
        probabilities=data.get("probabilities"),
    )


def result_to_dict(result: ClaimExtractionResult) -> dict:
    return {
        "status": "completed",
        "claim_id": result.claim_id,
        "source_digest": result.source_digest,
        "filename": result.filename,
        "created_at": result.created_at,
        "pages": [
            {
                "page_index": p.page_index,
                "width": p.width,
                "height": p.height,
                "classification": _classification_to_dict(p.classification),
                "fields": [_field_to_dict(f) for f in p.fields],
                "diagnostics": list(p.diagnostics),
            }
            for p in result.pages
        ],
        "bundle": {
            "present_types": sorted(result.bundle.present_types),
            "missing_mandatory": list(result.bundle.missing_mandatory),
            "complete": result.bundle.complete,
        },
        "timings_ms": dict(result.timings_ms),
        "corrections": [
            {
                "field": c.field,
                "page_index": c.page_index,
                "old": c.old,
                "new": c.new,
                "corrected_at": c.corrected_at,
            }
            for c in result.corrections
        ],
    }


def result_from_dict(data: dict) -> ClaimExtractionResult:
    bundle = data["bundle"]
    return ClaimExtractionResult(
        claim_id=data["claim_id"],
        source_digest=data["source_digest"],
        filename=data.get("filename", ""),
        created_at=data["created_at"],
        pages=[
            PageResult(
                page_index=p["page_index"],
                width=p["width"],
                height=p["height"],
                classification=_classification_from_dict(p.get("classification")),
                fields=[_field_from_dict(f) for f in p["fields"]],
                diagnostics=list(p.get("diagnostics", [])),
            )
            for p in data["pages"]
        ],
        bundle=CompletenessReport(
            present_types=frozenset(bundle["present_types"]),
            missing_mandatory=tuple(bundle["missing_mandatory"]),
            complete=bundle["complete"],
        ),
        timings_ms=dict(data.get("timings_ms", {})),
        corrections=[
            CorrectionEntry(
                field=c["field"],
                page_index=c["page_index"],
                old=c.get("old"),
                new=c["new"],
                corrected_at=c["corrected_at"],
            )
            for c in data.get("corrections", [])
        ],
    )
