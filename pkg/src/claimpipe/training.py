"""Offline classifier training from a corpus directory.

Reads OCR fixtures and gold labels, splits train/test (80:20 by default),
fits TF-IDF + logistic regression, and reports held-out accuracy.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from .classify import (
    LrHyperparams,
    TextClassifier,
    TfidfConfig,
    lr_predict,
    lr_train,
    tfidf_fit,
    tfidf_transform,
    tfidf_transform_many,
)
from .corpus import load_gold
from .errors import ValidationError
from .model import OcrToken
from .ocr import DEFAULT_CLASSIFIER_MIN_CONF, tokens_to_text


def corpus_page_texts(corpus_dir: str | Path) -> tuple[list[str], list[str]]:
    """(classifier text, gold type) per page, in gold order."""
    corpus = Path(corpus_dir)
    gold = load_gold(corpus)
    texts: list[str] = []
    labels: list[str] = []
    for doc in gold["documents"]:
        for page in doc["pages"]:
            rows = json.loads(
                (corpus / "fixtures" / "ocr" / f"{page['digest']}.json").read_text(
                    encoding="utf-8"
                )
            )
            tokens = [
                OcrToken(
                    text=r["text"],
                    bbox=tuple(r["box"]),
                    confidence=r["score"],
                    order=i,
                )
                for i, r in enumerate(rows)
            ]
            texts.append(tokens_to_text(tokens, min_conf=DEFAULT_CLASSIFIER_MIN_CONF))
            labels.append(page["doc_type"])
    return texts, labels


def split_indices(n: int, split: float, seed: int) -> tuple[list[int], list[int]]:
    if not 0.0 < split < 1.0:
        raise ValidationError(f"split must be in (0, 1), got {split}")
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    cut = int(round(n * split))
    return indices[:cut], indices[cut:]


def train_from_corpus(
    corpus_dir: str | Path,
    split: float = 0.8,
    seed: int = 42,
    tfidf_config: TfidfConfig = TfidfConfig(),
    hyperparams: LrHyperparams = LrHyperparams(),
) -> tuple[TextClassifier, float, int, int]:
    """Train on the split's head, score on its tail.

    Returns (classifier, held-out accuracy, n_train, n_test).
    """
    texts, labels = corpus_page_texts(corpus_dir)
    train_idx, test_idx = split_indices(len(texts), split, seed)
    train_texts = [texts[i] for i in train_idx]
    train_labels = [labels[i] for i in train_idx]
    vectorizer = tfidf_fit(train_texts, tfidf_config)
    model = lr_train(tfidf_transform_many(vectorizer, train_texts), train_labels, hyperparams)
    classifier = TextClassifier(vectorizer=vectorizer, model=model)
    correct = 0
    for i in test_idx:
        predicted, _ = lr_predict(model, tfidf_transform(vectorizer, texts[i]))
        if predicted == labels[i]:
            correct += 1
    accuracy = correct / len(test_idx) if test_idx else 0.0
    return classifier, accuracy, len(train_idx), len(test_idx)
