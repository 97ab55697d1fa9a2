"""Synthetic corpus generation.

Stands in for the private SG/VN claim dataset: each generated document is
a small PDF plus matching OCR and VLM fixtures keyed by page digest, with
gold labels for type and field values. Generation is fully seeded; the
same seed reproduces the corpus byte for byte.
"""

from __future__ import annotations

import hashlib
import importlib.resources
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .classify import title_prompt_spec
from .extract import build_extraction_prompt
from .model import FieldKind, SchemaRegistry
from .ocr import tokens_from_rows
from .pdfwrite import PdfPage, write_pdf
from .postprocess import load_reference_list, normalize_amount
from .preprocess import DEFAULT_DPI, page_digest
from .vlm import build_prompt, prompt_key

DEFAULT_CORPUS_TYPES = (
    "claim_form",
    "invoice",
    "receipt",
    "medical_report",
    "discharge_summary",
    "prescription",
    "lab_report",
    "referral_letter",
    "medical_certificate",
    "letter_of_guarantee",
)

SCHEMA_TYPES = ("claim_form", "invoice", "receipt", "medical_report")

# Page geometry: 360x480pt renders to 750x1000px at the default 150 DPI,
# inside the 1024px resize budget, so generated token boxes stay valid.
PAGE_W_PT, PAGE_H_PT = 360.0, 480.0

TITLES = {
    "en": {
        "claim_form": "CLAIM FORM",
        "invoice": "TAX INVOICE",
        "receipt": "OFFICIAL RECEIPT",
        "medical_report": "MEDICAL REPORT",
        "discharge_summary": "HOSPITAL DISCHARGE SUMMARY",
        "prescription": "PRESCRIPTION",
        "lab_report": "LABORATORY REPORT",
        "referral_letter": "REFERRAL LETTER",
        "medical_certificate": "MEDICAL CERTIFICATE",
        "letter_of_guarantee": "LETTER OF GUARANTEE",
    },
    "vi": {
        "claim_form": "GIẤY YÊU CẦU BỒI THƯỜNG",
        "invoice": "HÓA ĐƠN GIÁ TRỊ GIA TĂNG",
        "receipt": "BIÊN LAI THU TIỀN",
        "medical_report": "BÁO CÁO Y TẾ",
        "discharge_summary": "GIẤY RA VIỆN",
        "prescription": "ĐƠN THUỐC",
        "lab_report": "KẾT QUẢ XÉT NGHIỆM",
        "referral_letter": "GIẤY CHUYỂN VIỆN",
        "medical_certificate": "GIẤY CHỨNG NHẬN Y TẾ",
        "letter_of_guarantee": "THƯ BẢO LÃNH",
    },
}

# Titles that must not match any shipped rule (checked by tests); these
# pages exercise the ML fallback path.
UNMAPPABLE_TITLES = (
    "MONTHLY STATEMENT OVERVIEW",
    "CUSTOMER COPY",
    "PAYMENT ADVICE SLIP",
    "APPOINTMENT REMINDER",
    "INTERNAL ROUTING SLIP",
    "THÔNG BÁO NỘI BỘ",
    "PHIẾU HẸN TÁI KHÁM",
)

BODY_WORDS = {
    "en": {
        "claim_form": ["claim", "request", "reimbursement", "insured", "member", "benefit"],
        "invoice": ["invoice", "billing", "subtotal", "gst", "charges", "billed"],
        "receipt": ["receipt", "payment", "received", "cash", "tendered", "change"],
        "medical_report": ["clinical", "examination", "findings", "treatment", "physician", "history"],
        "discharge_summary": ["discharge", "admission", "ward", "inpatient", "condition", "stay"],
        "prescription": ["dosage", "tablets", "medication", "pharmacy", "daily", "dispense"],
        "lab_report": ["specimen", "reference", "range", "haemoglobin", "glucose", "analyte"],
        "referral_letter": ["referral", "specialist", "consultation", "refer", "outpatient", "opinion"],
        "medical_certificate": ["unfit", "duty", "rest", "certify", "excused", "leave"],
        "letter_of_guarantee": ["guarantee", "coverage", "liability", "guaranteed", "limit", "payable"],
    },
    "vi": {
        "claim_form": ["bồi", "thường", "quyền", "lợi", "người", "hưởng"],
        "invoice": ["thuế", "thành", "tiền", "đơn", "giá", "suất"],
        "receipt": ["thanh", "toán", "tiền", "mặt", "thu", "ngân"],
        "medical_report": ["chẩn", "đoán", "lâm", "sàng", "điều", "trị"],
        "discharge_summary": ["ra", "viện", "nhập", "khoa", "tình", "trạng"],
        "prescription": ["thuốc", "liều", "viên", "uống", "sáng", "tối"],
        "lab_report": ["xét", "nghiệm", "mẫu", "chỉ", "số", "bạch"],
        "referral_letter": ["chuyển", "tuyến", "chuyên", "khoa", "giới", "thiệu"],
        "medical_certificate": ["chứng", "nhận", "nghỉ", "ốm", "sức", "khỏe"],
        "letter_of_guarantee": ["bảo", "lãnh", "cam", "kết", "chi", "trả"],
    },
}

FILLER_WORDS = {
    "en": ["page", "document", "reference", "section", "authorized", "signature"],
    "vi": ["trang", "tài", "liệu", "tham", "chiếu", "chữ", "ký"],
}

FIELD_LABELS = {
    "en": {
        "claim_id": "Claim No:",
        "patient_name": "Patient Name:",
        "policy_no": "Policy No:",
        "claim_amount": "Claim Amount:",
        "provider": "Provider:",
        "visit_date": "Visit Date:",
        "total_amount": "Total Amount:",
        "diagnosis": "Diagnosis:",
        "doctor_name": "Doctor:",
        "admission_date": "Admission Date:",
        "receipt_number": "Receipt No:",
        "paid_amount": "Amount Paid:",
        "payment_date": "Payment Date:",
    },
    "vi": {
        "claim_id": "Số hồ sơ:",
        "patient_name": "Họ tên:",
        "policy_no": "Số hợp đồng:",
        "claim_amount": "Số tiền yêu cầu:",
        "provider": "Cơ sở y tế:",
        "visit_date": "Ngày khám:",
        "total_amount": "Tổng cộng:",
        "diagnosis": "Chẩn đoán:",
        "doctor_name": "Bác sĩ:",
        "admission_date": "Ngày nhập viện:",
        "receipt_number": "Số biên lai:",
        "paid_amount": "Số tiền:",
        "payment_date": "Ngày thanh toán:",
    },
}

PERSON_NAMES = {
    "en": [
        "Alice Tan Wei Ling", "Benjamin Lim Jun Hao", "Chloe Ng Shu Hui",
        "Daniel Wong Kai Feng", "Evelyn Koh Mei Xin", "Marcus Lee Zhi Wei",
        "Natalie Chua Li Ting", "Ryan Goh Wen Jie", "Samantha Teo Hui Min",
        "Zachary Ong Jia Jun",
    ],
    "vi": [
        "Nguyễn Văn Hùng", "Trần Thị Mai Anh", "Lê Quốc Bảo", "Phạm Thu Hằng",
        "Hoàng Minh Tuấn", "Vũ Ngọc Lan", "Đặng Hải Đăng", "Bùi Thanh Thảo",
        "Đỗ Gia Khánh", "Dương Mỹ Linh",
    ],
}

DIAGNOSES = {
    "en": [
        "Acute bronchitis", "Gastroenteritis", "Migraine without aura",
        "Lumbar sprain", "Allergic rhinitis", "Type 2 diabetes mellitus",
    ],
    "vi": [
        "Viêm họng cấp", "Sốt xuất huyết", "Đau nửa đầu",
        "Rối loạn tiêu hóa", "Viêm phế quản cấp", "Tăng huyết áp",
    ],
}


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 42
    n_docs: int = 100
    types: tuple[str, ...] = DEFAULT_CORPUS_TYPES
    field_error_rate: float = 0.10
    unmappable_title_rate: float = 0.05
    handwritten_rate: float = 0.30
    vietnamese_rate: float = 0.50
    bundle_types: tuple[str, ...] | None = None  # fixed page types per doc
    dpi: int = DEFAULT_DPI


@dataclass
class GoldField:
    name: str
    value: str
    kind: str
    handwritten: bool = False
    injected_error: str | None = None  # None | "missing" | "wrong"


@dataclass
class GoldPage:
    page_index: int
    doc_type: str
    language: str
    title: str
    title_mappable: bool
    fields: list[GoldField] = field(default_factory=list)
    digest: str = ""


@dataclass
class GoldDocument:
    doc_id: str
    filename: str
    digest: str = ""
    pages: list[GoldPage] = field(default_factory=list)


class _PageLayout:
    """Left-to-right, top-to-bottom word layout on a 750x1000px page."""

    CHAR_W = 8
    LINE_H = 18
    LINE_GAP = 8
    MARGIN = 30

    def __init__(self, width_px: int, height_px: int) -> None:
        self.width = width_px
        self.height = height_px
        self.rows: list[dict] = []
        self.y = self.MARGIN
        self.x = self.MARGIN

    def newline(self) -> None:
        self.y += self.LINE_H + self.LINE_GAP
        self.x = self.MARGIN

    def add_word(self, text: str, score: float) -> None:
        w = max(self.CHAR_W, self.CHAR_W * len(text))
        if self.x + w > self.width - self.MARGIN:
            self.newline()
        if self.y + self.LINE_H > self.height - self.MARGIN:
            return  # page full; drop silently
        self.rows.append(
            {
                "text": text,
                "box": [self.x, self.y, min(self.x + w, self.width), self.y + self.LINE_H],
                "score": round(score, 4),
            }
        )
        self.x += w + self.CHAR_W

    def add_words(self, text: str, score_fn) -> None:
        for word in text.split():
            self.add_word(word, score_fn())


def _amount_value(rng: random.Random, language: str) -> tuple[str, str]:
    """(surface form on page, canonical gold)."""
    if language == "vi":
        value = rng.randrange(50, 5000) * 1000
        digits = f"{value:,}".replace(",", ".")
        return f"{digits}", str(value)
    dollars = rng.randrange(20, 9000)
    cents = rng.randrange(0, 100)
    surface = f"S${dollars:,}.{cents:02d}"
    return surface, f"{dollars}.{cents:02d}"


def _date_value(rng: random.Random) -> str:
    """Canonical DD/MM/YYYY, which is also the printed surface form."""
    year = rng.randrange(2023, 2026)
    month = rng.randrange(1, 13)
    day = rng.randrange(1, 29)
    return f"{day:02d}/{month:02d}/{year:04d}"


class CorpusGenerator:
    def __init__(
        self,
        config: GeneratorConfig,
        registry: SchemaRegistry | None = None,
        hospital_names: list[str] | None = None,
    ) -> None:
        self.config = config
        self.registry = registry or SchemaRegistry.builtin()
        if hospital_names is None:
            base = importlib.resources.files("claimpipe") / "data"
            with importlib.resources.as_file(base / "hospitals.txt") as path:
                hospital_names = [name for _, name in load_reference_list(path)]
        # First half of the shipped list is VN, second half SG.
        half = len(hospital_names) // 2
        self.hospitals = {"vi": hospital_names[:half], "en": hospital_names[half:]}

    # -- values -----------------------------------------------------------

    def _field_value(self, name: str, kind: FieldKind, language: str, rng: random.Random) -> tuple[str, str]:
        """(surface form, canonical gold value) for one field."""
        if kind is FieldKind.DATE:
            v = _date_value(rng)
            return v, v
        if kind is FieldKind.AMOUNT:
            return _amount_value(rng, language)
        if kind is FieldKind.IDENTIFIER:
            if name == "claim_id":
                v = f"C2024-{rng.randrange(1, 10000):04d}"
            elif name == "policy_no":
                v = f"{'VN' if language == 'vi' else 'SG'}{rng.randrange(100, 1000)}"
            else:
                v = f"R-{rng.randrange(10000, 100000)}"
            return v, v
        if name == "provider":
            v = rng.choice(self.hospitals[language])
            return v, v
        if name == "diagnosis":
            v = rng.choice(DIAGNOSES[language])
            return v, v
        v = rng.choice(PERSON_NAMES[language])
        return v, v

    def _wrong_value(
        self, name: str, kind: FieldKind, language: str, gold: str, rng: random.Random
    ) -> str:
        for _ in range(20):
            surface, canonical = self._field_value(name, kind, language, rng)
            if canonical != gold:
                return surface
        raise RuntimeError("could not draw a distinct wrong value")

    # -- single page ------------------------------------------------------

    def _build_page(
        self, doc_type: str, page_index: int, rng: random.Random
    ) -> tuple[GoldPage, _PageLayout, dict[str, tuple[FieldKind, str | None]]]:
        """Gold record, token layout, and the VLM's raw field answers.

        The answers map field name -> (kind, raw value or None); errors are
        injected here so gold and fixtures stay consistent.
        """
        language = "vi" if rng.random() < self.config.vietnamese_rate else "en"
        mappable = rng.random() >= self.config.unmappable_title_rate
        title = (
            TITLES[language][doc_type]
            if mappable
            else UNMAPPABLE_TITLES[rng.randrange(len(UNMAPPABLE_TITLES))]
        )
        scale = self.config.dpi / 72.0
        layout = _PageLayout(round(PAGE_W_PT * scale), round(PAGE_H_PT * scale))
        printed = lambda: rng.uniform(0.90, 0.99)
        handwritten = lambda: rng.uniform(0.45, 0.78)

        layout.add_words(title, printed)
        layout.newline()

        gold = GoldPage(
            page_index=page_index,
            doc_type=doc_type,
            language=language,
            title=title,
            title_mappable=mappable,
        )
        answers: dict[str, tuple[FieldKind, str | None]] = {}
        schema = self.registry.schema_for(doc_type)
        for spec in schema.fields:
            surface, canonical = self._field_value(spec.name, spec.kind, language, rng)
            is_handwritten = rng.random() < self.config.handwritten_rate
            layout.add_word(FIELD_LABELS[language][spec.name], printed())
            layout.add_words(surface, handwritten if is_handwritten else printed)
            layout.newline()

            injected: str | None = None
            raw: str | None = surface
            if rng.random() < self.config.field_error_rate:
                if rng.random() < 0.5:
                    injected, raw = "missing", None
                else:
                    injected = "wrong"
                    raw = self._wrong_value(spec.name, spec.kind, language, canonical, rng)
            elif spec.kind is FieldKind.DATE and rng.random() < 0.3:
                # The model sometimes answers ISO or appends a time part.
                day, month, year = surface.split("/")
                raw = rng.choice(
                    [f"{year}-{month}-{day}", f"{surface} 14:30"]
                )
            answers[spec.name] = (spec.kind, raw)
            gold.fields.append(
                GoldField(
                    name=spec.name,
                    value=canonical,
                    kind=spec.kind.value,
                    handwritten=is_handwritten,
                    injected_error=injected,
                )
            )

        words = BODY_WORDS[language][doc_type]
        fillers = FILLER_WORDS[language]
        for _ in range(rng.randrange(4, 8)):
            line = rng.sample(words, k=3) + rng.sample(fillers, k=2)
            layout.add_words(" ".join(line), printed)
            layout.newline()
        return gold, layout, answers

    def _vlm_json(self, answers: dict[str, tuple[FieldKind, str | None]], rng: random.Random) -> str:
        pairs = []
        for name, (kind, raw) in answers.items():
            if raw is None:
                pairs.append(f'  "{name}": null')
            elif kind is FieldKind.AMOUNT and rng.random() < 0.5:
                digits = normalize_amount(raw)
                pairs.append(f'  "{name}": {digits}')  # bare number, like real output
            else:
                pairs.append(f'  "{name}": {json.dumps(raw, ensure_ascii=False)}')
        body = "{\n" + ",\n".join(pairs) + ",\n}"  # trailing comma on purpose
        decoration = rng.randrange(3)
        if decoration == 0:
            return body
        if decoration == 1:
            return f"```json\n{body}\n```"
        return f"Here is the extracted information:\n{body}"

    # -- whole corpus -----------------------------------------------------

    def generate(self, out_dir: str | Path) -> list[GoldDocument]:
        out = Path(out_dir)
        docs_dir = out / "docs"
        ocr_dir = out / "fixtures" / "ocr"
        vlm_dir = out / "fixtures" / "vlm"
        for d in (docs_dir, ocr_dir, vlm_dir):
            d.mkdir(parents=True, exist_ok=True)

        rng = random.Random(self.config.seed)
        title_prompt = build_prompt(title_prompt_spec())
        vlm_responses: dict[str, str] = {}
        documents: list[GoldDocument] = []

        for doc_index in range(self.config.n_docs):
            doc_id = f"doc_{doc_index:04d}"
            if self.config.bundle_types is not None:
                page_types = list(self.config.bundle_types)
            else:
                page_types = [self.config.types[rng.randrange(len(self.config.types))]]
            gold_doc = GoldDocument(doc_id=doc_id, filename=f"docs/{doc_id}.pdf")
            built = [
                self._build_page(doc_type, i, rng) for i, doc_type in enumerate(page_types)
            ]

            pdf_pages = []
            for gold_page, layout, _ in built:
                page = PdfPage(width_pt=PAGE_W_PT, height_pt=PAGE_H_PT)
                scale = 72.0 / self.config.dpi
                for row in layout.rows:
                    x0, y0, _, y1 = row["box"]
                    page.add_text(x0 * scale, PAGE_H_PT - y1 * scale, row["text"])
                pdf_pages.append(page)
            pdf_bytes = write_pdf(pdf_pages)
            (docs_dir / f"{doc_id}.pdf").write_bytes(pdf_bytes)
            gold_doc.digest = hashlib.sha256(pdf_bytes).hexdigest()

            for gold_page, layout, answers in built:
                digest = page_digest(gold_doc.digest, gold_page.page_index)
                gold_page.digest = digest
                (ocr_dir / f"{digest}.json").write_text(
                    json.dumps(layout.rows, ensure_ascii=False), encoding="utf-8"
                )
                vlm_responses[prompt_key(digest, title_prompt)] = gold_page.title
                schema = self.registry.schema_for(gold_page.doc_type)
                if schema.fields:
                    page_img = _FakePage(
                        page_index=gold_page.page_index,
                        width=layout.width,
                        height=layout.height,
                        source_digest=digest,
                    )
                    tokens = tokens_from_rows(layout.rows, page_img)
                    display = self.registry.document_type(gold_page.doc_type).display_name
                    extraction_prompt = build_extraction_prompt(
                        schema, display, tokens, include_ocr_text=True
                    )
                    vlm_responses[prompt_key(digest, extraction_prompt)] = self._vlm_json(
                        answers, rng
                    )
                gold_doc.pages.append(gold_page)
            documents.append(gold_doc)

        (vlm_dir / "responses.json").write_text(
            json.dumps(vlm_responses, ensure_ascii=False, sort_keys=True, indent=0),
            encoding="utf-8",
        )
        (out / "gold.json").write_text(
            json.dumps(_gold_to_dict(self.config, documents), ensure_ascii=False, indent=1),
            encoding="utf-8",
        )
        return documents


@dataclass(frozen=True)
class _FakePage:
    page_index: int
    width: int
    height: int
    source_digest: str


def _gold_to_dict(config: GeneratorConfig, documents: list[GoldDocument]) -> dict:
    return {
        "generator": {
            "seed": config.seed,
            "n_docs": config.n_docs,
            "types": list(config.types),
            "field_error_rate": config.field_error_rate,
            "unmappable_title_rate": config.unmappable_title_rate,
            "handwritten_rate": config.handwritten_rate,
            "vietnamese_rate": config.vietnamese_rate,
        },
        "documents": [
            {
                "doc_id": d.doc_id,
                "filename": d.filename,
                "digest": d.digest,
                "pages": [
                    {
                        "page_index": p.page_index,
                        "digest": p.digest,
                        "doc_type": p.doc_type,
                        "language": p.language,
                        "title": p.title,
                        "title_mappable": p.title_mappable,
                        "fields": [
                            {
                                "name": f.name,
                                "value": f.value,
                                "kind": f.kind,
                                "handwritten": f.handwritten,
                                "injected_error": f.injected_error,
                            }
                            for f in p.fields
                        ],
                    }
                    for p in d.pages
                ],
            }
            for d in documents
        ],
    }


def generate_synthetic_corpus(
    out_dir: str | Path,
    config: GeneratorConfig = GeneratorConfig(),
    registry: SchemaRegistry | None = None,
) -> list[GoldDocument]:
    """Generate PDFs, fixtures, and gold labels into out_dir."""
    return CorpusGenerator(config, registry=registry).generate(out_dir)


def load_gold(corpus_dir: str | Path) -> dict:
    return json.loads((Path(corpus_dir) / "gold.json").read_text(encoding="utf-8"))
