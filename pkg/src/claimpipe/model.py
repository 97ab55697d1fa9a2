"""Core domain objects: document types, schemas, pages, tokens, extractions.

The schema registry is built once from declarative YAML files (one per
market) and is immutable afterwards; all value objects here are frozen and
safe to share across concurrent pipeline workers.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import yaml

from .errors import RegistryMissError, ValidationError


class Market(str, Enum):
    SG = "SG"
    VN = "VN"
    BOTH = "BOTH"


class FieldKind(str, Enum):
    TEXT = "text"
    DATE = "date"
    AMOUNT = "amount"
    IDENTIFIER = "identifier"


class FieldStatus(str, Enum):
    EXTRACTED = "extracted"
    MISSING = "missing"
    LOW_CONFIDENCE = "low_confidence"
    CORRECTED = "corrected"


class ClassificationMethod(str, Enum):
    TITLE_RULE = "title_rule"
    ML_FALLBACK = "ml_fallback"


# Confidence below this marks a field for human review. The source system
# only states that confidence should guide reviewer attention; the number is
# a deployment default, overridable in PipelineConfig.
DEFAULT_LOW_CONFIDENCE_THRESHOLD = 0.80


@dataclass(frozen=True)
class DocumentType:
    """A semantic document category, e.g. claim_form or invoice."""

    id: str
    display_name: str
    market: Market = Market.BOTH

    def __post_init__(self) -> None:
        if not self.id or not self.id.replace("_", "").isalnum():
            raise ValidationError(f"bad document type id: {self.id!r}")


@dataclass(frozen=True)
class FieldSpec:
    """One item to extract: name, semantic boundary, and value kind."""

    name: str
    description: str
    kind: FieldKind = FieldKind.TEXT
    required: bool = True

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("field name must be non-empty")


@dataclass(frozen=True)
class Schema:
    """Ordered list of fields to extract for one document type."""

    doc_type: str
    fields: tuple[FieldSpec, ...] = ()

    def __post_init__(self) -> None:
        names = [f.name for f in self.fields]
        if len(names) != len(set(names)):
            raise ValidationError(f"duplicate field names in schema {self.doc_type}")

    def field_names(self) -> list[str]:
        return [f.name for f in self.fields]


@dataclass(frozen=True)
class PageImage:
    """A single rasterized page. pixel_data is an opaque encoded payload."""

    page_index: int
    width: int
    height: int
    pixel_data: bytes
    source_digest: str

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValidationError(
                f"page {self.page_index}: dimensions must be >= 1, got {self.width}x{self.height}"
            )
        if self.page_index < 0:
            raise ValidationError("page_index must be >= 0")


@dataclass(frozen=True)
class OcrToken:
    """A recognized text span with box, confidence and reading order."""

    text: str
    bbox: tuple[int, int, int, int]
    confidence: float
    order: int
    page_index: int = 0

    def __post_init__(self) -> None:
        x0, y0, x1, y1 = self.bbox
        if not (x0 < x1 and y0 < y1):
            raise ValidationError(f"degenerate bbox {self.bbox} for token {self.text!r}")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class EvidenceRef:
    """Pointer from an extracted field to a supporting region on a page."""

    page_index: int
    bbox: tuple[int, int, int, int]


@dataclass(frozen=True)
class FieldExtraction:
    """The per-field extraction tuple: value, evidence, confidence, status."""

    field: str
    raw_value: str | None
    normalized_value: str | None
    evidence: tuple[EvidenceRef, ...] = ()
    confidence: float | None = None
    status: FieldStatus = FieldStatus.EXTRACTED

    def __post_init__(self) -> None:
        if self.status is FieldStatus.MISSING and self.raw_value is not None:
            raise ValidationError(f"field {self.field}: missing status requires null raw_value")
        if self.raw_value is None and self.status not in (
            FieldStatus.MISSING,
            FieldStatus.CORRECTED,
        ):
            raise ValidationError(
                f"field {self.field}: null raw_value must be missing (or corrected by review)"
            )
        if self.evidence and self.confidence is None:
            raise ValidationError(f"field {self.field}: evidence requires a confidence")
        if self.status is FieldStatus.LOW_CONFIDENCE and self.confidence is None:
            raise ValidationError(
                f"field {self.field}: low_confidence requires a confidence"
            )

    def with_normalized(self, value: str | None) -> "FieldExtraction":
        return replace(self, normalized_value=value)

    def with_status(self, status: FieldStatus) -> "FieldExtraction":
        return replace(self, status=status)


@dataclass(frozen=True)
class BundleRule:
    """A mandatory-document constraint: at least one of any_of present."""

    any_of: tuple[str, ...]
    description: str

    def __post_init__(self) -> None:
        if not self.any_of:
            raise ValidationError("bundle rule needs at least one document type")

    def satisfied_by(self, present: frozenset[str]) -> bool:
        return any(t in present for t in self.any_of)


@dataclass(frozen=True)
class CompletenessReport:
    """Result of checking a claim bundle against the mandatory-document rules."""

    present_types: frozenset[str]
    missing_mandatory: tuple[str, ...]
    complete: bool

    def __post_init__(self) -> None:
        if self.complete != (len(self.missing_mandatory) == 0):
            raise ValidationError("complete flag inconsistent with missing_mandatory")


# A claim bundle must contain a claim form plus an invoice or receipt;
# insurers may override via the registry config file.
DEFAULT_BUNDLE_RULES: tuple[BundleRule, ...] = (
    BundleRule(any_of=("claim_form",), description="claim form"),
    BundleRule(any_of=("invoice", "receipt"), description="invoice or receipt"),
)

CORE_TYPE_IDS = ("claim_form", "invoice", "receipt", "medical_report")


class SchemaRegistry:
    """Finite set of document types, each mapped to exactly one schema.

    Read-only after construction. Every type has a schema; types without a
    configured field list get an empty (classification-only) schema.
    """

    def __init__(
        self,
        types: Sequence[DocumentType],
        schemas: Sequence[Schema] = (),
        bundle_rules: Sequence[BundleRule] = DEFAULT_BUNDLE_RULES,
    ) -> None:
        self._types: dict[str, DocumentType] = {}
        for t in types:
            if t.id in self._types:
                raise ValidationError(f"duplicate document type id: {t.id}")
            self._types[t.id] = t
        self._schemas: dict[str, Schema] = {}
        for s in schemas:
            if s.doc_type not in self._types:
                raise ValidationError(f"schema for unknown document type: {s.doc_type}")
            if s.doc_type in self._schemas:
                raise ValidationError(f"duplicate schema for {s.doc_type}")
            self._schemas[s.doc_type] = s
        for type_id in self._types:
            self._schemas.setdefault(type_id, Schema(doc_type=type_id))
        self.bundle_rules: tuple[BundleRule, ...] = tuple(bundle_rules)

    # -- lookups ---------------------------------------------------------

    def __contains__(self, type_id: str) -> bool:
        return type_id in self._types

    def type_ids(self) -> list[str]:
        return list(self._types)

    def document_type(self, type_id: str) -> DocumentType:
        try:
            return self._types[type_id]
        except KeyError:
            raise RegistryMissError(f"unknown document type: {type_id!r}") from None

    def schema_for(self, doc_type: str) -> Schema:
        if doc_type not in self._types:
            raise RegistryMissError(f"unknown document type: {doc_type!r}")
        return self._schemas[doc_type]

    def schema_types(self) -> list[str]:
        """Types that have at least one field configured."""
        return [t for t in self._types if self._schemas[t].fields]

    # -- completeness ----------------------------------------------------

    def validate_claim_bundle(self, types: Iterable[str]) -> CompletenessReport:
        """Check the mandatory-document rules; order and duplicates ignored."""
        present = frozenset(types)
        missing = tuple(
            rule.description for rule in self.bundle_rules if not rule.satisfied_by(present)
        )
        return CompletenessReport(
            present_types=present, missing_mandatory=missing, complete=not missing
        )

    # -- serialization ---------------------------------------------------

    def to_mapping(self) -> dict:
        return {
            "document_types": [
                {"id": t.id, "display_name": t.display_name, "market": t.market.value}
                for t in self._types.values()
            ],
            "schemas": {
                type_id: [
                    {
                        "name": f.name,
                        "description": f.description,
                        "kind": f.kind.value,
                        "required": f.required,
                    }
                    for f in schema.fields
                ]
                for type_id, schema in self._schemas.items()
                if schema.fields
            },
            "bundle_rules": [
                {"any_of": list(r.any_of), "description": r.description}
                for r in self.bundle_rules
            ],
        }

    @classmethod
    def from_mapping(cls, data: Mapping) -> "SchemaRegistry":
        types = [
            DocumentType(
                id=row["id"],
                display_name=row.get("display_name", row["id"]),
                market=Market(row.get("market", "BOTH")),
            )
            for row in data.get("document_types", [])
        ]
        schemas = [
            Schema(
                doc_type=type_id,
                fields=tuple(
                    FieldSpec(
                        name=f["name"],
                        description=f.get("description", f["name"]),
                        kind=FieldKind(f.get("kind", "text")),
                        required=bool(f.get("required", True)),
                    )
                    for f in fields
                ),
            )
            for type_id, fields in (data.get("schemas") or {}).items()
        ]
        rules_data = data.get("bundle_rules")
        rules = (
            tuple(
                BundleRule(any_of=tuple(r["any_of"]), description=r["description"])
                for r in rules_data
            )
            if rules_data
            else DEFAULT_BUNDLE_RULES
        )
        return cls(types=types, schemas=schemas, bundle_rules=rules)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            yaml.safe_dump(self.to_mapping(), sort_keys=False, allow_unicode=True),
            encoding="utf-8",
        )

    @classmethod
    def load(cls, *paths: str | Path) -> "SchemaRegistry":
        """Load one registry from one or more market config files.

        Types appearing in several files are merged; their markets widen to
        BOTH. Schemas and display names must agree across files.
        """
        if not paths:
            raise ValidationError("at least one registry file required")
        merged_types: dict[str, DocumentType] = {}
        merged_schemas: dict[str, Schema] = {}
        merged_rules: tuple[BundleRule, ...] | None = None
        for path in paths:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
            reg = cls.from_mapping(data)
            for type_id in reg.type_ids():
                t = reg.document_type(type_id)
                if type_id in merged_types:
                    prev = merged_types[type_id]
                    if prev.display_name != t.display_name:
                        raise ValidationError(
                            f"conflicting display names for {type_id}: "
                            f"{prev.display_name!r} vs {t.display_name!r}"
                        )
                    if prev.market is not t.market:
                        merged_types[type_id] = replace(prev, market=Market.BOTH)
                else:
                    merged_types[type_id] = t
                schema = reg.schema_for(type_id)
                if schema.fields:
                    if type_id in merged_schemas and merged_schemas[type_id] != schema:
                        raise ValidationError(f"conflicting schemas for {type_id}")
                    merged_schemas[type_id] = schema
            if reg.bundle_rules != DEFAULT_BUNDLE_RULES:
                merged_rules = reg.bundle_rules
        return cls(
            types=list(merged_types.values()),
            schemas=list(merged_schemas.values()),
            bundle_rules=merged_rules or DEFAULT_BUNDLE_RULES,
        )

    @classmethod
    def builtin(cls) -> "SchemaRegistry":
        """Registry merged from the shipped SG and VN market files."""
        base = importlib.resources.files("claimpipe") / "data"
        with importlib.resources.as_file(base / "registry_sg.yaml") as sg, \
                importlib.resources.as_file(base / "registry_vn.yaml") as vn:
            reg = cls.load(sg, vn)
        missing = [t for t in CORE_TYPE_IDS if t not in reg]
        if missing:
            raise ValidationError(f"builtin registry missing core types: {missing}")
        return reg


def schema_for(doc_type: str, registry: SchemaRegistry) -> Schema:
    """Module-level alias for registry.schema_for."""
    return registry.schema_for(doc_type)


def validate_claim_bundle(
    types: Iterable[str], registry: SchemaRegistry
) -> CompletenessReport:
    """Module-level alias for registry.validate_claim_bundle."""
    return registry.validate_claim_bundle(types)
