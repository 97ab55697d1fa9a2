"""End-to-end orchestration: split, resize, OCR, classify, extract,
normalize, persist.

A document that survives preprocessing always yields a persisted result:
backend failures degrade the affected stage (classification falls back,
extraction marks fields missing) rather than failing the request.
"""

from __future__ import annotations

import importlib.resources
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .classify import (
    TextClassifier,
    TitleRule,
    builtin_title_rules,
    classify_page,
    load_classifier,
    load_title_rules,
)
from .config import PipelineConfig
from .errors import (
    BackendUnavailableError,
    ClaimPipeError,
    ClassificationUnavailableError,
)
from .extract import extract_fields
from .metrics import MetricsRegistry
from .model import (
    FieldExtraction,
    FieldKind,
    FieldStatus,
    OcrToken,
    PageImage,
    SchemaRegistry,
)
from .ocr import (
    FixtureOcrBackend,
    HttpOcrBackend,
    OcrBackend,
    OcrBackendConfig,
    recognize_page,
    tokens_to_text,
)
from .postprocess import (
    RefIndex,
    RefIndexConfig,
    build_reference_index,
    load_reference_list,
    normalize_field_value,
)
from .preprocess import RawDocument, get_rasterizer, resize_page, split_document
from .records import ClaimExtractionResult, PageResult
from .store import ResultStore, utc_now_iso
from .vlm import FixtureVlmBackend, HttpVlmBackend, VlmBackend, VlmBackendConfig

STAGES = ("preprocess", "ocr", "classify", "extract", "postprocess")


def _build_ocr_backend(config: PipelineConfig) -> OcrBackend | None:
    if config.ocr.fixture_dir:
        return FixtureOcrBackend(config.ocr.fixture_dir)
    if config.ocr.endpoint:
        return HttpOcrBackend(
            OcrBackendConfig(
                endpoint=config.ocr.endpoint,
                timeout_ms=config.ocr.timeout_ms,
                retries=config.ocr.retries,
                language_hints=config.ocr.language_hints,
                max_in_flight=config.ocr.max_in_flight,
            )
        )
    return None


def _build_vlm_backend(config: PipelineConfig) -> VlmBackend | None:
    if config.vlm.fixture_file:
        return FixtureVlmBackend(config.vlm.fixture_file)
    if config.vlm.endpoint:
        return HttpVlmBackend(
            VlmBackendConfig(
                endpoint=config.vlm.endpoint,
                model=config.vlm.model,
                timeout_ms=config.vlm.timeout_ms,
                max_in_flight=config.vlm.max_in_flight,
            )
        )
    return None


@dataclass
class _PageOutcome:
    result: PageResult
    timings: dict[str, float]


class Pipeline:
    """Holds the immutable components and runs documents through them."""

    def __init__(self, config: PipelineConfig) -> None:
        self.config = config
        if config.registry_files:
            self.registry = SchemaRegistry.load(*config.registry_files)
        else:
            self.registry = SchemaRegistry.builtin()
        if config.title_rules_file:
            self.rules: list[TitleRule] = load_title_rules(config.title_rules_file)
        else:
            self.rules = builtin_title_rules()
        self.classifier: TextClassifier | None = None
        if config.model_file and Path(config.model_file).exists():
            self.classifier = load_classifier(config.model_file)
        if config.reference_list_file:
            names = load_reference_list(config.reference_list_file)
        else:
            base = importlib.resources.files("claimpipe") / "data"
            with importlib.resources.as_file(base / "hospitals.txt") as path:
                names = load_reference_list(path)
        self.entity_index: RefIndex = build_reference_index(
            names,
            RefIndexConfig(
                similarity_threshold=config.entity_similarity_threshold,
                prefilter_top_k=config.entity_prefilter_top_k,
            ),
        )
        self.ocr_backend = _build_ocr_backend(config)
        self.vlm_backend = _build_vlm_backend(config)
        self.rasterizer = get_rasterizer(config.rasterizer)
        self.store = ResultStore(config.store_dir)
        self.metrics = MetricsRegistry()

    # -- per-page work ----------------------------------------------------

    def _run_page(self, page: PageImage) -> _PageOutcome:
        timings: dict[str, float] = {}
        diagnostics: list[str] = []

        started = time.perf_counter()
        tokens: list[OcrToken] = []
        if self.ocr_backend is not None:
            try:
                tokens = recognize_page(page, self.ocr_backend, self.config.ocr.language_hints)
            except BackendUnavailableError as exc:
                diagnostics.append(f"ocr degraded: {exc}")
        else:
            diagnostics.append("ocr degraded: no backend configured")
        timings["ocr"] = (time.perf_counter() - started) * 1000.0

        started = time.perf_counter()
        classifier_text = tokens_to_text(tokens, min_conf=self.config.classifier_min_conf)
        classification = None
        try:
            classification = classify_page(
                page, classifier_text, self.vlm_backend, self.rules, self.classifier
            )
        except ClassificationUnavailableError as exc:
            diagnostics.append(f"classification unavailable: {exc}")
        timings["classify"] = (time.perf_counter() - started) * 1000.0

        started = time.perf_counter()
        fields: list[FieldExtraction] = []
        if classification is not None:
            schema = self.registry.schema_for(classification.doc_type)
            if schema.fields and self.vlm_backend is not None:
                display = self.registry.document_type(classification.doc_type).display_name
                try:
                    fields = extract_fields(
                        page,
                        schema,
                        tokens,
                        self.vlm_backend,
                        doc_display_name=display,
                        include_ocr_text=self.config.include_ocr_text,
                        max_span=self.config.grounding_max_span,
                        grounding_threshold=self.config.grounding_threshold,
                        diagnostics=diagnostics,
                    )
                except BackendUnavailableError as exc:
                    diagnostics.append(f"extraction degraded: {exc}")
                    fields = [
                        FieldExtraction(
                            field=f.name,
                            raw_value=None,
                            normalized_value=None,
                            status=FieldStatus.MISSING,
                        )
                        for f in schema.fields
                    ]
        timings["extract"] = (time.perf_counter() - started) * 1000.0

        started = time.perf_counter()
        if classification is not None and fields:
            schema = self.registry.schema_for(classification.doc_type)
            kinds = {f.name: f.kind for f in schema.fields}
            fields = [
                self._postprocess_field(f, kinds.get(f.field, FieldKind.TEXT), diagnostics)
                for f in fields
            ]
        timings["postprocess"] = (time.perf_counter() - started) * 1000.0

        return _PageOutcome(
            result=PageResult(
                page_index=page.page_index,
                width=page.width,
                height=page.height,
                classification=classification,
                fields=fields,
                diagnostics=diagnostics,
            ),
            timings=timings,
        )

    def _postprocess_field(
        self, extraction: FieldExtraction, kind: FieldKind, diagnostics: list[str]
    ) -> FieldExtraction:
        if extraction.raw_value is None:
            return extraction
        normalized, match = normalize_field_value(
            kind,
            extraction.raw_value,
            entity_index=self.entity_index,
            day_first=self.config.day_first,
        )
        if normalized is None:
            diagnostics.append(
                f"field {extraction.field}: {kind.value} value "
                f"{extraction.raw_value!r} failed validation"
            )
        if match is not None and match.matched and match.output != extraction.raw_value:
            diagnostics.append(
                f"field {extraction.field}: normalized to reference entry "
                f"{match.output!r} (score {match.score:.4f})"
            )
        updated = extraction.with_normalized(normalized)
        if (
            updated.confidence is not None
            and updated.confidence < self.config.low_confidence_threshold
        ):
            updated = updated.with_status(FieldStatus.LOW_CONFIDENCE)
        return updated

    # -- documents --------------------------------------------------------

    def process_document(
        self, doc: RawDocument, persist: bool = True, claim_id: str | None = None
    ) -> ClaimExtractionResult:
        """Run every stage; persist and return the extraction record.

        Decode and empty-document errors propagate (the service layer turns
        them into failed-job records); anything after preprocessing
        degrades per stage instead of failing.
        """
        total_started = time.perf_counter()
        self.metrics.inc("requests_total")

        started = time.perf_counter()
        try:
            pages = [
                resize_page(p, self.config.max_dim)
                for p in split_document(doc, rasterizer=self.rasterizer, dpi=self.config.dpi)
            ]
        except ClaimPipeError:
            self.metrics.inc("errors_total")
            raise
        preprocess_ms = (time.perf_counter() - started) * 1000.0

        if len(pages) == 1 or self.config.page_workers <= 1:
            outcomes = [self._run_page(p) for p in pages]
        else:
            with ThreadPoolExecutor(
                max_workers=min(self.config.page_workers, len(pages))
            ) as pool:
                outcomes = list(pool.map(self._run_page, pages))

        timings: dict[str, float] = {"preprocess": preprocess_ms}
        for stage in ("ocr", "classify", "extract", "postprocess"):
            timings[stage] = sum(o.timings.get(stage, 0.0) for o in outcomes)
        present = [
            o.result.classification.doc_type
            for o in outcomes
            if o.result.classification is not None
        ]
        result = ClaimExtractionResult(
            claim_id=claim_id or self.store.new_claim_id(),
            source_digest=doc.digest,
            filename=doc.filename,
            created_at=utc_now_iso(),
            pages=[o.result for o in outcomes],
            bundle=self.registry.validate_claim_bundle(present),
            timings_ms=timings,
            corrections=[],
        )
        result.timings_ms["total"] = (time.perf_counter() - total_started) * 1000.0
        if persist:
            self.store.save(result, [p.pixel_data for p in pages])
        for stage, ms in result.timings_ms.items():
            self.metrics.record_latency(stage, ms)
        return result

    def process_path(self, path: str | Path, persist: bool = True) -> ClaimExtractionResult:
        return self.process_document(
            RawDocument.from_file(path, max_bytes=self.config.max_bytes), persist=persist
        )

    def record_correction(
        self, claim_id: str, page_index: int, field: str, new_value: str
    ) -> ClaimExtractionResult:
        result = self.store.record_correction(claim_id, page_index, field, new_value)
        self.metrics.inc("corrections_total")
        return result
