"""Metric computation over a synthetic corpus.

Field-level accuracy (FLA) is micro-averaged exact match after
kind-canonicalization: dates compared as dates, amounts as decimals, text
case- and whitespace-insensitively. Classification accuracy is per page.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import PipelineConfig
from .corpus import load_gold
from .model import FieldKind
from .pipeline import Pipeline
from .postprocess import normalize_amount, normalize_date
from .preprocess import RawDocument


def canonical_equal(kind: str, extracted: str | None, gold: str) -> bool:
    """Kind-aware equality between an extracted normalized value and gold."""
    if extracted is None:
        return False
    if kind == FieldKind.DATE.value:
        return normalize_date(extracted) is not None and normalize_date(
            extracted
        ) == normalize_date(gold)
    if kind == FieldKind.AMOUNT.value:
        left, right = normalize_amount(extracted), normalize_amount(gold)
        if left is None or right is None:
            return False
        try:
            return Decimal(left) == Decimal(right)
        except InvalidOperation:
            return False
    return " ".join(extracted.split()).casefold() == " ".join(gold.split()).casefold()


@dataclass
class MetricsReport:
    acc_type: float
    fla: float
    latency_p50_ms: float
    latency_p90_ms: float
    n_docs: int
    n_pages: int
    n_gold_fields: int
    confusion: dict[str, dict[str, int]] = field(default_factory=dict)
    per_field: dict[str, dict[str, int]] = field(default_factory=dict)
    method_counts: dict[str, int] = field(default_factory=dict)
    unmappable_pages: int = 0
    unmappable_via_fallback: int = 0
    stage_latency_p50_ms: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "fla_definition": "micro-averaged exact match after kind-canonicalization",
            "acc_type": self.acc_type,
            "fla": self.fla,
            "latency_p50_ms": self.latency_p50_ms,
            "latency_p90_ms": self.latency_p90_ms,
            "n_docs": self.n_docs,
            "n_pages": self.n_pages,
            "n_gold_fields": self.n_gold_fields,
            "confusion": self.confusion,
            "per_field": self.per_field,
            "method_counts": self.method_counts,
            "unmappable_pages": self.unmappable_pages,
            "unmappable_via_fallback": self.unmappable_via_fallback,
            "stage_latency_p50_ms": self.stage_latency_p50_ms,
        }

    def format_table(self) -> str:
        lines = [
            "metric                 value",
            "---------------------  -----",
            f"type accuracy          {self.acc_type:.4f}",
            f"field-level accuracy   {self.fla:.4f}",
            f"latency p50 (ms)       {self.latency_p50_ms:.2f}",
            f"latency p90 (ms)       {self.latency_p90_ms:.2f}",
            f"documents              {self.n_docs}",
            f"pages                  {self.n_pages}",
            f"gold fields            {self.n_gold_fields}",
        ]
        if self.per_field:
            lines.append("")
            lines.append("field                  correct/total")
            for name in sorted(self.per_field):
                c = self.per_field[name]
                lines.append(f"{name:<22} {c['correct']}/{c['total']}")
        return "\n".join(lines)


def pipeline_config_for_corpus(
    corpus_dir: str | Path,
    store_dir: str | Path,
    base: PipelineConfig | None = None,
    model_file: str | None = None,
) -> PipelineConfig:
    """Derive a fixture-backed config bound to a generated corpus."""
    corpus = Path(corpus_dir)
    base = base or PipelineConfig()
    return replace(
        base,
        store_dir=str(store_dir),
        model_file=model_file if model_file is not None else base.model_file,
        ocr=replace(base.ocr, fixture_dir=str(corpus / "fixtures" / "ocr"), endpoint=None),
        vlm=replace(
            base.vlm,
            fixture_file=str(corpus / "fixtures" / "vlm" / "responses.json"),
            endpoint=None,
        ),
    )


def evaluate(
    corpus_dir: str | Path,
    pipeline: Pipeline,
    discard_warmup: bool = True,
    doc_order: Sequence[int] | None = None,
) -> MetricsReport:
    """Process every corpus document through the pipeline and score it."""
    corpus = Path(corpus_dir)
    gold = load_gold(corpus)
    documents = gold["documents"]
    order = list(doc_order) if doc_order is not None else range(len(documents))

    pages_total = 0
    pages_correct = 0
    fields_total = 0
    fields_correct = 0
    confusion: dict[str, dict[str, int]] = {}
    per_field: dict[str, dict[str, int]] = {}
    method_counts: dict[str, int] = {}
    unmappable_pages = 0
    unmappable_via_fallback = 0
    latencies: list[float] = []
    stage_latencies: dict[str, list[float]] = {}

    for position, doc_index in enumerate(order):
        gold_doc = documents[doc_index]
        raw = RawDocument.from_file(corpus / gold_doc["filename"])
        result = pipeline.process_document(raw)
        if not (discard_warmup and position == 0):
            latencies.append(result.timings_ms["total"])
            for stage, ms in result.timings_ms.items():
                stage_latencies.setdefault(stage, []).append(ms)
        by_index = {p.page_index: p for p in result.pages}
        for gold_page in gold_doc["pages"]:
            page = by_index.get(gold_page["page_index"])
            predicted = (
                page.classification.doc_type
                if page is not None and page.classification is not None
                else None
            )
            pages_total += 1
            if predicted == gold_page["doc_type"]:
                pages_correct += 1
            confusion.setdefault(gold_page["doc_type"], {})
            confusion[gold_page["doc_type"]][predicted or "unclassified"] = (
                confusion[gold_page["doc_type"]].get(predicted or "unclassified", 0) + 1
            )
            if page is not None and page.classification is not None:
                method = page.classification.method.value
                method_counts[method] = method_counts.get(method, 0) + 1
                if not gold_page["title_mappable"]:
                    unmappable_pages += 1
                    if method == "ml_fallback":
                        unmappable_via_fallback += 1
            extracted = (
                {f.field: f.normalized_value for f in page.fields} if page is not None else {}
            )
            for gold_field in gold_page["fields"]:
                fields_total += 1
                stats = per_field.setdefault(
                    gold_field["name"], {"correct": 0, "total": 0}
                )
                stats["total"] += 1
                if canonical_equal(
                    gold_field["kind"],
                    extracted.get(gold_field["name"]),
                    gold_field["value"],
                ):
                    fields_correct += 1
                    stats["correct"] += 1

    def pct(values: list[float], q: float) -> float:
        return float(np.percentile(np.asarray(values), q)) if values else 0.0

    return MetricsReport(
        acc_type=pages_correct / pages_total if pages_total else 0.0,
        fla=fields_correct / fields_total if fields_total else 0.0,
        latency_p50_ms=pct(latencies, 50),
        latency_p90_ms=pct(latencies, 90),
        n_docs=len(documents),
        n_pages=pages_total,
        n_gold_fields=fields_total,
        confusion=confusion,
        per_field=per_field,
        method_counts=method_counts,
        unmappable_pages=unmappable_pages,
        unmappable_via_fallback=unmappable_via_fallback,
        stage_latency_p50_ms={s: pct(v, 50) for s, v in stage_latencies.items()},
    )


def recount_fla_from_store(corpus_dir: str | Path, store_dir: str | Path) -> float:
    """Second-pass FLA straight from persisted result.json files.

    Matches stored records to gold documents by source digest; agreement
    with evaluate() is a required invariant.
    """
    gold = load_gold(corpus_dir)
    by_digest: dict[str, list[dict]] = {}
    claims_dir = Path(store_dir) / "claims"
    for result_file in claims_dir.glob("*/result.json"):
        record = json.loads(result_file.read_text(encoding="utf-8"))
        by_digest.setdefault(record["source_digest"], []).append(record)

    total = 0
    correct = 0
    for gold_doc in gold["documents"]:
        records = by_digest.get(gold_doc["digest"], [])
        record = records[-1] if records else None
        pages = {p["page_index"]: p for p in record["pages"]} if record else {}
        for gold_page in gold_doc["pages"]:
            page = pages.get(gold_page["page_index"])
            extracted = (
                {f["field"]: f["normalized_value"] for f in page["fields"]}
                if page
                else {}
            )
            for gold_field in gold_page["fields"]:
                total += 1
                if canonical_equal(
                    gold_field["kind"],
                    extracted.get(gold_field["name"]),
                    gold_field["value"],
                ):
                    correct += 1
    return correct / total if total else 0.0
