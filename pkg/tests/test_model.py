"""Core model: registry, schemas, completeness rule, value invariants."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from claimpipe.errors import RegistryMissError, ValidationError
from claimpipe.model import (
    CompletenessReport,
    DocumentType,
    FieldExtraction,
    FieldKind,
    FieldSpec,
    FieldStatus,
    OcrToken,
    PageImage,
    Schema,
    SchemaRegistry,
)


@pytest.fixture(scope="module")
def registry() -> SchemaRegistry:
    return SchemaRegistry.builtin()


class TestRegistry:
    def test_covers_core_types(self, registry):
        for type_id in ("claim_form", "invoice", "receipt", "medical_report"):
            assert type_id in registry

    def test_loads_full_market_lists(self, registry):
        # Both market files merged: SG-only, VN-only and shared types present.
        assert "cpf_statement" in registry
        assert "birth_certificate" in registry
        assert len(registry.type_ids()) >= 30

    def test_claim_form_schema(self, registry):
        assert registry.schema_for("claim_form").field_names() == [
            "claim_id",
            "patient_name",
            "policy_no",
            "claim_amount",
        ]

    def test_receipt_schema(self, registry):
        assert registry.schema_for("receipt").field_names() == [
            "receipt_number",
            "provider",
            "paid_amount",
            "payment_date",
        ]

    def test_unknown_type_is_registry_miss(self, registry):
        with pytest.raises(RegistryMissError):
            registry.schema_for("unknown_xyz")

    def test_every_type_has_exactly_one_schema(self, registry):
        for type_id in registry.type_ids():
            schema = registry.schema_for(type_id)
            assert schema.doc_type == type_id

    def test_every_field_kind_has_a_normalizer_route(self, registry):
        from claimpipe.postprocess import normalize_field_value

        for type_id in registry.type_ids():
            for spec in registry.schema_for(type_id).fields:
                normalized, _ = normalize_field_value(spec.kind, "05/10/2024")
                assert normalized is None or isinstance(normalized, str)

    def test_round_trip_through_config_file(self, registry, tmp_path):
        path = tmp_path / "registry.yaml"
        registry.save(path)
        reloaded = SchemaRegistry.load(path)
        assert reloaded.type_ids() == registry.type_ids()
        for type_id in registry.type_ids():
            assert reloaded.schema_for(type_id) == registry.schema_for(type_id)
            assert reloaded.document_type(type_id) == registry.document_type(type_id)
        assert reloaded.bundle_rules == registry.bundle_rules

    def test_duplicate_type_rejected(self):
        with pytest.raises(ValidationError):
            SchemaRegistry(
                types=[
                    DocumentType(id="claim_form", display_name="A"),
                    DocumentType(id="claim_form", display_name="B"),
                ]
            )


class TestCompleteness:
    def test_claim_form_plus_invoice_complete(self, registry):
        report = registry.validate_claim_bundle(["claim_form", "invoice"])
        assert report.complete
        assert report.missing_mandatory == ()

    def test_claim_form_alone_missing_invoice_or_receipt(self, registry):
        report = registry.validate_claim_bundle(["claim_form"])
        assert not report.complete
        assert report.missing_mandatory == ("invoice or receipt",)

    def test_empty_bundle_missing_both(self, registry):
        report = registry.validate_claim_bundle([])
        assert not report.complete
        assert set(report.missing_mandatory) == {"claim form", "invoice or receipt"}

    def test_receipt_satisfies_the_alternative(self, registry):
        assert registry.validate_claim_bundle(["receipt", "claim_form"]).complete

    @given(
        st.permutations(["claim_form", "invoice", "receipt", "lab_report"]),
        st.integers(min_value=1, max_value=3),
    )
    def test_order_insensitive_and_duplicates_ignored(self, order, repeats):
        registry = SchemaRegistry.builtin()
        baseline = registry.validate_claim_bundle(order)
        shuffled = registry.validate_claim_bundle(list(order) * repeats)
        assert shuffled == baseline

    def test_idempotent(self, registry):
        first = registry.validate_claim_bundle(["claim_form", "invoice"])
        second = registry.validate_claim_bundle(first.present_types)
        assert second.complete == first.complete


class TestValueObjects:
    def test_page_image_rejects_zero_dims(self):
        with pytest.raises(ValidationError):
            PageImage(page_index=0, width=0, height=10, pixel_data=b"x", source_digest="d")

    def test_ocr_token_rejects_degenerate_box(self):
        with pytest.raises(ValidationError):
            OcrToken(text="x", bbox=(10, 10, 10, 20), confidence=0.5, order=0)

    def test_ocr_token_rejects_bad_confidence(self):
        with pytest.raises(ValidationError):
            OcrToken(text="x", bbox=(0, 0, 5, 5), confidence=1.5, order=0)

    def test_missing_field_requires_null_raw(self):
        with pytest.raises(ValidationError):
            FieldExtraction(
                field="a", raw_value="v", normalized_value=None, status=FieldStatus.MISSING
            )

    def test_null_raw_requires_missing_or_corrected(self):
        with pytest.raises(ValidationError):
            FieldExtraction(
                field="a", raw_value=None, normalized_value=None, status=FieldStatus.EXTRACTED
            )
        FieldExtraction(
            field="a", raw_value=None, normalized_value="fixed", status=FieldStatus.CORRECTED
        )

    def test_evidence_requires_confidence(self):
        from claimpipe.model import EvidenceRef

        with pytest.raises(ValidationError):
            FieldExtraction(
                field="a",
                raw_value="v",
                normalized_value="v",
                evidence=(EvidenceRef(page_index=0, bbox=(0, 0, 1, 1)),),
                confidence=None,
            )

    def test_completeness_flag_consistency_enforced(self):
        with pytest.raises(ValidationError):
            CompletenessReport(
                present_types=frozenset(), missing_mandatory=("x",), complete=True
            )

    def test_schema_rejects_duplicate_field_names(self):
        with pytest.raises(ValidationError):
            Schema(
                doc_type="t",
                fields=(
                    FieldSpec(name="a", description="x", kind=FieldKind.TEXT),
                    FieldSpec(name="a", description="y", kind=FieldKind.DATE),
                ),
            )
