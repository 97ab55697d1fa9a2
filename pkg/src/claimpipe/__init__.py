"""Multi-stage claim document understanding pipeline."""

from .classify import (
    ClassificationOutcome,
    LrHyperparams,
    LrModel,
    TextClassifier,
    TfidfConfig,
    TfidfVectorizer,
    TitleRule,
    classify_page,
    extract_title,
    lr_predict,
    lr_train,
    map_title,
    tfidf_fit,
    tfidf_transform,
)
from .config import PipelineConfig, load_config
from .extract import Evidence, extract_fields, ground_value
from .model import (
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
from .ocr import FixtureOcrBackend, HttpOcrBackend, recognize_page, tokens_to_text
from .pipeline import Pipeline
from .postprocess import (
    NormalizationResult,
    RefIndex,
    build_reference_index,
    normalize_amount,
    normalize_date,
    normalize_entity,
)
from .preprocess import RawDocument, resize_page, split_document
from .records import ClaimExtractionResult, PageResult, result_from_dict, result_to_dict
from .vlm import (
    FixtureVlmBackend,
    HttpVlmBackend,
    PromptSpec,
    VlmResponse,
    build_prompt,
    parse_model_json,
)

__version__ = "0.1.0"
