"""Shared fixtures: seeded corpora, a trained classifier, token builders."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from claimpipe.classify import save_classifier
from claimpipe.corpus import (
    DEFAULT_CORPUS_TYPES,
    SCHEMA_TYPES,
    GeneratorConfig,
    generate_synthetic_corpus,
)
from claimpipe.model import OcrToken
from claimpipe.training import train_from_corpus

# Seeds are part of the acceptance contract: the same corpora regenerate
# byte-identically across runs.
CLS_SEED = 4242
FLA0_SEED = 777
FLA10_SEED = 778
CORPUS_DOCS = 500
SPLIT_SEED = 4242


def make_tokens(rows: list[tuple], page_index: int = 0) -> list[OcrToken]:
    """rows of (text, bbox, confidence) in reading order."""
    return [
        OcrToken(text=text, bbox=bbox, confidence=conf, order=i, page_index=page_index)
        for i, (text, bbox, conf) in enumerate(rows)
    ]


def line_tokens(words: list[str], y: int = 100, conf: float = 0.95, page_index: int = 0,
                start_order: int = 0) -> list[OcrToken]:
    """One visual line of words with sane boxes."""
    tokens = []
    x = 10
    for i, word in enumerate(words):
        w = max(8, 8 * len(word))
        tokens.append(
            OcrToken(
                text=word,
                bbox=(x, y, x + w, y + 18),
                confidence=conf,
                order=start_order + i,
                page_index=page_index,
            )
        )
        x += w + 8
    return tokens


@pytest.fixture(scope="session")
def classifier_corpus(tmp_path_factory):
    """500 docs over ten types; 5% unmappable titles, 10% field errors."""
    out = tmp_path_factory.mktemp("corpus-cls")
    generate_synthetic_corpus(
        out,
        GeneratorConfig(
            seed=CLS_SEED,
            n_docs=CORPUS_DOCS,
            types=DEFAULT_CORPUS_TYPES,
            field_error_rate=0.10,
            unmappable_title_rate=0.05,
        ),
    )
    return out


@pytest.fixture(scope="session")
def fla_clean_corpus(tmp_path_factory):
    """500 docs over the four schema types, zero injected error."""
    out = tmp_path_factory.mktemp("corpus-fla0")
    generate_synthetic_corpus(
        out,
        GeneratorConfig(
            seed=FLA0_SEED,
            n_docs=CORPUS_DOCS,
            types=SCHEMA_TYPES,
            field_error_rate=0.0,
            unmappable_title_rate=0.0,
        ),
    )
    return out


@pytest.fixture(scope="session")
def fla_noisy_corpus(tmp_path_factory):
    """500 docs over the four schema types, 10% injected field errors."""
    out = tmp_path_factory.mktemp("corpus-fla10")
    generate_synthetic_corpus(
        out,
        GeneratorConfig(
            seed=FLA10_SEED,
            n_docs=CORPUS_DOCS,
            types=SCHEMA_TYPES,
            field_error_rate=0.10,
            unmappable_title_rate=0.0,
        ),
    )
    return out


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """20 clean docs over all types, for fast pipeline tests."""
    out = tmp_path_factory.mktemp("corpus-small")
    generate_synthetic_corpus(
        out,
        GeneratorConfig(
            seed=99,
            n_docs=20,
            field_error_rate=0.0,
            unmappable_title_rate=0.0,
        ),
    )
    return out


@pytest.fixture(scope="session")
def golden_bundle_corpus(tmp_path_factory):
    """One 3-page document (claim form + invoice + medical report): its
    field names cover the full published key set."""
    out = tmp_path_factory.mktemp("corpus-golden")
    generate_synthetic_corpus(
        out,
        GeneratorConfig(
            seed=11,
            n_docs=1,
            bundle_types=("claim_form", "invoice", "medical_report"),
            field_error_rate=0.0,
            unmappable_title_rate=0.0,
        ),
    )
    return out


@pytest.fixture(scope="session")
def incomplete_bundle_corpus(tmp_path_factory):
    """One claim-form-only document: bundle must be incomplete."""
    out = tmp_path_factory.mktemp("corpus-incomplete")
    generate_synthetic_corpus(
        out,
        GeneratorConfig(
            seed=12,
            n_docs=1,
            bundle_types=("claim_form",),
            field_error_rate=0.0,
            unmappable_title_rate=0.0,
        ),
    )
    return out


@pytest.fixture(scope="session")
def trained_model(classifier_corpus, tmp_path_factory):
    """(model path, held-out accuracy, test doc indices) on the 80:20 split."""
    from claimpipe.training import split_indices
    from claimpipe.corpus import load_gold

    classifier, accuracy, n_train, n_test = train_from_corpus(
        classifier_corpus, split=0.8, seed=SPLIT_SEED
    )
    path = tmp_path_factory.mktemp("model") / "model.json"
    save_classifier(classifier, path)
    gold = load_gold(classifier_corpus)
    n_pages = sum(len(d["pages"]) for d in gold["documents"])
    assert n_pages == len(gold["documents"]), "split indices assume one page per doc"
    _, test_idx = split_indices(n_pages, 0.8, SPLIT_SEED)
    return path, accuracy, test_idx
