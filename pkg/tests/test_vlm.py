"""Prompt generation, model-output parsing, VLM adapters."""

from __future__ import annotations

import json

import httpx
import pytest
from hypothesis import given, strategies as st

from claimpipe.errors import (
    BackendUnavailableError,
    FixtureMissError,
    ProtocolError,
    UnparseableOutputError,
    ValidationError,
)
from claimpipe.extract import extraction_prompt_spec
from claimpipe.model import FieldKind, PageImage, SchemaRegistry
from claimpipe.vlm import (
    SECTION_HEADERS,
    FixtureVlmBackend,
    HttpVlmBackend,
    PromptSpec,
    VlmBackendConfig,
    VlmResponse,
    build_prompt,
    parse_model_json,
    prompt_key,
)

# The JSON body shown in the source system's output example.
SAMPLE_MODEL_OUTPUT = """{
  "claim_id": "C2024-0001",
  "patient_name": "ABC",
  "policy_no": "VN111",
  "diagnosis": "Acute bronchitis",
  "provider": "Hanoi General Hospital",
  "visit_date": "2024-10-05",
  "total_amount": 1650000,
}"""


def page(digest: str = "fx-cf-sg-01") -> PageImage:
    return PageImage(page_index=0, width=10, height=10, pixel_data=b"png", source_digest=digest)


def sample_spec() -> PromptSpec:
    return PromptSpec(
        role_definition="You are an information extraction assistant.",
        field_definitions=(
            ("provider", "Provider Name", FieldKind.TEXT),
            ("visit_date", "Date of Service", FieldKind.DATE),
            ("total_amount", "Total Amount", FieldKind.AMOUNT),
        ),
        output_format="Return the result as JSON.",
        example_output='{"provider": "X", "visit_date": "05/10/2024", "total_amount": "100"}',
    )


class TestBuildPrompt:
    def test_invoice_prompt_mentions_fields(self):
        registry = SchemaRegistry.builtin()
        spec = extraction_prompt_spec(registry.schema_for("invoice"), "invoice")
        prompt = build_prompt(spec)
        assert "Extract the following fields from this invoice image" in prompt
        for line in ("- provider: Provider name issuing the invoice",
                     "- visit_date: Date of service or visit",
                     "- total_amount: Total amount billed"):
            assert line in prompt

    def test_deterministic(self):
        assert build_prompt(sample_spec()) == build_prompt(sample_spec())

    def test_headers_once_in_order(self):
        prompt = build_prompt(sample_spec())
        positions = []
        for header in SECTION_HEADERS:
            assert prompt.count(f"\n{header}\n") + prompt.startswith(f"{header}\n") == 1
            positions.append(prompt.index(header))
        assert positions == sorted(positions)

    def test_empty_component_rejected(self):
        with pytest.raises(ValidationError):
            PromptSpec(
                role_definition="",
                field_definitions=(("a", "b", FieldKind.TEXT),),
                output_format="x",
                example_output="y",
            )

    def test_duplicate_field_names_rejected(self):
        with pytest.raises(ValidationError):
            PromptSpec(
                role_definition="r",
                field_definitions=(
                    ("a", "b", FieldKind.TEXT),
                    ("a", "c", FieldKind.TEXT),
                ),
                output_format="x",
                example_output="y",
            )


class TestParseModelJson:
    def test_sample_body(self):
        parsed = parse_model_json(SAMPLE_MODEL_OUTPUT)
        assert parsed["claim_id"] == "C2024-0001"
        assert parsed["policy_no"] == "VN111"
        assert parsed["total_amount"] == "1650000"
        assert parsed["provider"] == "Hanoi General Hospital"

    def test_fenced_json(self):
        assert parse_model_json('```json\n{"a":"b"}\n```') == {"a": "b"}

    def test_surrounding_prose(self):
        raw = 'Sure! Here you go:\n{"x": "1"}\nLet me know if you need more.'
        assert parse_model_json(raw) == {"x": "1"}

    def test_no_json_is_unparseable(self):
        with pytest.raises(UnparseableOutputError):
            parse_model_json("Sorry, I cannot.")

    def test_prose_braces_then_real_object(self):
        raw = "set {a} then {\"k\": \"v\"}"
        assert parse_model_json(raw) == {"k": "v"}

    def test_null_and_scalars(self):
        parsed = parse_model_json('{"a": null, "b": true, "c": 1.5}')
        assert parsed == {"a": None, "b": "true", "c": "1.5"}

    def test_nested_values_stringified(self):
        parsed = parse_model_json('{"a": {"x": 1}}')
        assert json.loads(parsed["a"]) == {"x": 1}

    @given(
        st.dictionaries(
            st.text(
                alphabet=st.characters(blacklist_categories=("Cs", "Cc")),
                min_size=1,
                max_size=12,
            ),
            st.text(
                alphabet=st.characters(blacklist_categories=("Cs", "Cc")),
                max_size=20,
            ),
            max_size=6,
        )
    )
    def test_roundtrip_identity_for_flat_string_maps(self, mapping):
        assert parse_model_json(json.dumps(mapping, ensure_ascii=False)) == mapping


class TestFixtureBackend:
    def test_canned_response_by_digest_and_prompt(self, tmp_path):
        prompt = build_prompt(sample_spec())
        fixture = tmp_path / "responses.json"
        fixture.write_text(json.dumps({prompt_key("fx-cf-sg-01", prompt): "CLAIM FORM"}))
        backend = FixtureVlmBackend(fixture)
        assert backend.chat(page(), prompt).raw_text == "CLAIM FORM"
        assert backend.chat(page(), prompt).raw_text == "CLAIM FORM"

    def test_miss_raises(self, tmp_path):
        fixture = tmp_path / "responses.json"
        fixture.write_text("{}")
        with pytest.raises(FixtureMissError):
            FixtureVlmBackend(fixture).chat(page(), "prompt")


class TestHttpBackend:
    def _backend(self, handler) -> HttpVlmBackend:
        return HttpVlmBackend(
            VlmBackendConfig(endpoint="http://vlm.test"),
            client=httpx.Client(transport=httpx.MockTransport(handler)),
        )

    def test_openai_shape_and_temperature_zero(self):
        seen = {}

        def handler(request):
            seen["payload"] = json.loads(request.content)
            return httpx.Response(
                200,
                json={"choices": [{"message": {"content": "CLAIM FORM"}}]},
            )

        response = self._backend(handler).chat(page(), "What is the title?")
        assert response.raw_text == "CLAIM FORM"
        assert response.latency_ms >= 0
        payload = seen["payload"]
        assert payload["temperature"] == 0
        parts = payload["messages"][0]["content"]
        assert {p["type"] for p in parts} == {"image_url", "text"}

    def test_unreachable_is_backend_unavailable(self):
        def handler(request):
            raise httpx.ConnectError("down")

        with pytest.raises(BackendUnavailableError):
            self._backend(handler).chat(page(), "p")

    def test_non_success_is_protocol_error_with_status(self):
        def handler(request):
            return httpx.Response(503, text="busy")

        with pytest.raises(ProtocolError, match="503"):
            self._backend(handler).chat(page(), "p")

    def test_negative_latency_rejected(self):
        with pytest.raises(ValidationError):
            VlmResponse(raw_text="x", latency_ms=-1)
