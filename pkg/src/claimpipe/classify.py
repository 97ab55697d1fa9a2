"""Hybrid document-type classification.

Title path: the VLM reads the form title, a rule table maps it to a type.
Fallback path: TF-IDF features over OCR text into a multinomial logistic
regression, trained offline with deterministic full-batch gradient descent.
The fallback fires on unmapped or ambiguous titles and when the VLM is
down.
"""

from __future__ import annotations

import importlib.resources
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .errors import (
    BackendUnavailableError,
    ClassificationUnavailableError,
    FitError,
    TrainingError,
    UnparseableOutputError,
    ValidationError,
)
from .model import ClassificationMethod, FieldKind, PageImage
from .vlm import PromptSpec, VlmBackend, build_prompt

_WORD_RE = re.compile(r"\w+", re.UNICODE)

MODEL_FILE_VERSION = 1


# -- title path ---------------------------------------------------------------


@dataclass(frozen=True)
class TitleRule:
    pattern: str
    doc_type: str
    priority: int = 0

    def __post_init__(self) -> None:
        if not self.pattern.strip():
            raise ValidationError("title rule pattern must be non-empty")


def load_title_rules(path: str | Path) -> list[TitleRule]:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    return [
        TitleRule(
            pattern=row["pattern"], doc_type=row["doc_type"], priority=int(row.get("priority", 0))
        )
        for row in data.get("rules", [])
    ]


def builtin_title_rules() -> list[TitleRule]:
    base = importlib.resources.files("claimpipe") / "data"
    with importlib.resources.as_file(base / "title_rules.yaml") as path:
        return load_title_rules(path)


def title_prompt_spec() -> PromptSpec:
    return PromptSpec(
        role_definition=(
            "You are a document analysis assistant for insurance claim processing. "
            "You are shown one page of a claim document."
        ),
        field_definitions=(
            ("title", "The document's main title or heading, exactly as printed", FieldKind.TEXT),
        ),
        output_format=(
            "Return only the title text on a single line, with no other words. "
            "If no title is visible, return NONE."
        ),
        example_output="TAX INVOICE",
    )


def extract_title(page: PageImage, vlm: VlmBackend) -> str | None:
    """Ask the model for the verbatim title; trimmed and uppercased.

    Returns None when the model reports no title or the reply is unusable.
    """
    response = vlm.chat(page, build_prompt(title_prompt_spec()))
    title = response.raw_text.strip()
    if not title:
        return None
    title = title.splitlines()[0].strip()
    if not title or title.upper() == "NONE":
        return None
    return title.upper()


def map_title(title: str, rules: Sequence[TitleRule]) -> str | None:
    """First matching rule's type, scanning priority levels high to low.

    Within the deciding priority level, matches on two distinct types are
    ambiguous (e.g. a combined invoice/receipt header) and map to None so
    the ML fallback decides.
    """
    needle = title.lower()
    by_priority: dict[int, set[str]] = {}
    for rule in rules:
        if rule.pattern.lower() in needle:
            by_priority.setdefault(rule.priority, set()).add(rule.doc_type)
    for priority in sorted(by_priority, reverse=True):
        matched = by_priority[priority]
        return matched.pop() if len(matched) == 1 else None
    return None


# -- TF-IDF -------------------------------------------------------------------


@dataclass(frozen=True)
class TfidfConfig:
    lowercase: bool = True
    max_vocab: int = 20_000
    min_df: int = 2


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    if lowercase:
        text = text.lower()
    return _WORD_RE.findall(text)


@dataclass(frozen=True)
class TfidfVectorizer:
    vocabulary: dict[str, int]
    idf: np.ndarray
    config: TfidfConfig

    def __post_init__(self) -> None:
        if len(self.idf) != len(self.vocabulary):
            raise ValidationError("idf length must equal vocabulary size")
        if len(self.vocabulary) and float(np.min(self.idf)) <= 0:
            raise ValidationError("idf weights must be positive")


def tfidf_fit(corpus: Sequence[str], config: TfidfConfig = TfidfConfig()) -> TfidfVectorizer:
    """Fit vocabulary and idf weights: idf(t) = ln((1+N)/(1+df(t))) + 1.

    Vocabulary keeps tokens meeting min_df, capped by max_vocab taking the
    highest document frequencies first (lexicographic tie-break).
    """
    if not corpus:
        raise FitError("corpus must be non-empty")
    df: dict[str, int] = {}
    for doc in corpus:
        for token in set(tokenize(doc, config.lowercase)):
            df[token] = df.get(token, 0) + 1
    selected = sorted(
        (t for t, n in df.items() if n >= config.min_df),
        key=lambda t: (-df[t], t),
    )[: config.max_vocab]
    if not selected:
        raise FitError("empty vocabulary after min_df filtering")
    vocabulary = {token: i for i, token in enumerate(sorted(selected))}
    n_docs = len(corpus)
    idf = np.array(
        [np.log((1.0 + n_docs) / (1.0 + df[t])) + 1.0 for t in sorted(selected)],
        dtype=np.float64,
    )
    return TfidfVectorizer(vocabulary=vocabulary, idf=idf, config=config)


def tfidf_transform(vectorizer: TfidfVectorizer, text: str) -> np.ndarray:
    """Raw term counts times idf, then L2-normalized; OOV tokens ignored.

    All-zero vectors (no in-vocabulary tokens) stay all-zero.
    """
    vec = np.zeros(len(vectorizer.vocabulary), dtype=np.float64)
    for token in tokenize(text, vectorizer.config.lowercase):
        idx = vectorizer.vocabulary.get(token)
        if idx is not None:
            vec[idx] += 1.0
    vec *= vectorizer.idf
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def tfidf_transform_many(vectorizer: TfidfVectorizer, texts: Sequence[str]) -> np.ndarray:
    return np.stack([tfidf_transform(vectorizer, t) for t in texts])


# -- logistic regression ------------------------------------------------------


@dataclass(frozen=True)
class LrHyperparams:
    learning_rate: float = 1.0
    l2_lambda: float = 1e-3
    max_iters: int = 500
    tolerance: float = 1e-6


@dataclass(frozen=True)
class LrModel:
    weights: np.ndarray  # (n_classes, n_features)
    bias: np.ndarray  # (n_classes,)
    classes: tuple[str, ...]
    hyperparams: LrHyperparams
    loss_curve: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not self.classes or len(set(self.classes)) != len(self.classes):
            raise ValidationError("classes must be non-empty and unique")
        if self.weights.shape[0] != len(self.classes) or self.bias.shape != (
            len(self.classes),
        ):
            raise ValidationError("weight/bias dimensions inconsistent with classes")


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)


def lr_loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    features: np.ndarray,
    onehot: np.ndarray,
    l2_lambda: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy + (l2/2)*||W||^2 and its analytic gradient."""
    n = features.shape[0]
    probs = softmax(features @ weights.T + bias)
    # Clip only inside the log; the gradient uses the exact probabilities.
    log_probs = np.log(np.clip(probs, 1e-300, None))
    loss = -float(np.sum(onehot * log_probs)) / n
    loss += 0.5 * l2_lambda * float(np.sum(weights * weights))
    delta = (probs - onehot) / n
    grad_w = delta.T @ features + l2_lambda * weights
    grad_b = delta.sum(axis=0)
    return loss, grad_w, grad_b


def lr_train(
    features: np.ndarray,
    labels: Sequence[str],
    hyperparams: LrHyperparams = LrHyperparams(),
) -> LrModel:
    """Full-batch gradient descent from zero init; deterministic.

    The step is halved whenever an update would increase the loss, so the
    recorded loss curve is non-increasing. Stops at max_iters or when the
    gradient norm drops below tolerance.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != len(labels):
        raise ValidationError("features must be a matrix with one row per label")
    if not np.all(np.isfinite(features)):
        raise ValidationError("features must be finite")
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise TrainingError("need at least two classes to train")
    class_index = {c: i for i, c in enumerate(classes)}
    onehot = np.zeros((len(labels), len(classes)), dtype=np.float64)
    for row, label in enumerate(labels):
        onehot[row, class_index[label]] = 1.0

    weights = np.zeros((len(classes), features.shape[1]), dtype=np.float64)
    bias = np.zeros(len(classes), dtype=np.float64)
    step = hyperparams.learning_rate
    loss, grad_w, grad_b = lr_loss_and_grad(
        weights, bias, features, onehot, hyperparams.l2_lambda
    )
    losses = [loss]
    for _ in range(hyperparams.max_iters):
        grad_norm = float(np.sqrt(np.sum(grad_w**2) + np.sum(grad_b**2)))
        if grad_norm < hyperparams.tolerance:
            break
        while True:
            new_w = weights - step * grad_w
            new_b = bias - step * grad_b
            new_loss, new_gw, new_gb = lr_loss_and_grad(
                new_w, new_b, features, onehot, hyperparams.l2_lambda
            )
            if new_loss <= loss or step < 1e-12:
                break
            step *= 0.5
        if new_loss > loss:
            break  # step underflow: no descent direction left
        weights, bias = new_w, new_b
        loss, grad_w, grad_b = new_loss, new_gw, new_gb
        losses.append(loss)
    return LrModel(
        weights=weights,
        bias=bias,
        classes=classes,
        hyperparams=hyperparams,
        loss_curve=tuple(losses),
    )


def lr_predict(model: LrModel, features: np.ndarray) -> tuple[str, dict[str, float]]:
    """Softmax probabilities and argmax class; ties break by class order."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (model.weights.shape[1],):
        raise ValidationError(
            f"feature dimension {features.shape} does not match model "
            f"({model.weights.shape[1]},)"
        )
    probs = softmax(model.weights @ features + model.bias)
    winner = model.classes[int(np.argmax(probs))]
    return winner, {c: float(p) for c, p in zip(model.classes, probs)}


# -- persistence --------------------------------------------------------------


@dataclass(frozen=True)
class TextClassifier:
    """A fitted vectorizer plus trained model, shipped as one artifact."""

    vectorizer: TfidfVectorizer
    model: LrModel

    def predict(self, text: str) -> tuple[str, dict[str, float]]:
        return lr_predict(self.model, tfidf_transform(self.vectorizer, text))


def save_classifier(classifier: TextClassifier, path: str | Path) -> None:
    v, m = classifier.vectorizer, classifier.model
    payload = {
        "version": MODEL_FILE_VERSION,
        "tfidf": {
            "config": {
                "lowercase": v.config.lowercase,
                "max_vocab": v.config.max_vocab,
                "min_df": v.config.min_df,
            },
            "vocabulary": v.vocabulary,
            "idf": v.idf.tolist(),
        },
        "lr": {
            "classes": list(m.classes),
            "weights": m.weights.tolist(),
            "bias": m.bias.tolist(),
            "hyperparams": {
                "learning_rate": m.hyperparams.learning_rate,
                "l2_lambda": m.hyperparams.l2_lambda,
                "max_iters": m.hyperparams.max_iters,
                "tolerance": m.hyperparams.tolerance,
            },
        },
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_classifier(path: str | Path) -> TextClassifier:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != MODEL_FILE_VERSION:
        raise ValidationError(f"unsupported model file version: {payload.get('version')}")
    t = payload["tfidf"]
    vectorizer = TfidfVectorizer(
        vocabulary={str(k): int(i) for k, i in t["vocabulary"].items()},
        idf=np.array(t["idf"], dtype=np.float64),
        config=TfidfConfig(**t["config"]),
    )
    l = payload["lr"]
    model = LrModel(
        weights=np.array(l["weights"], dtype=np.float64),
        bias=np.array(l["bias"], dtype=np.float64),
        classes=tuple(l["classes"]),
        hyperparams=LrHyperparams(**l["hyperparams"]),
    )
    if model.weights.shape[1] != len(vectorizer.vocabulary):
        raise ValidationError("model feature dimension disagrees with vocabulary")
    return TextClassifier(vectorizer=vectorizer, model=model)


# -- hybrid entry point -------------------------------------------------------


@dataclass(frozen=True)
class ClassificationOutcome:
    doc_type: str
    method: ClassificationMethod
    title: str | None = None
    probabilities: dict[str, float] | None = None

    def __post_init__(self) -> None:
        if self.method is ClassificationMethod.TITLE_RULE and self.title is None:
            raise ValidationError("title_rule outcome requires a title")
        if self.method is ClassificationMethod.ML_FALLBACK:
            if self.probabilities is None:
                raise ValidationError("ml_fallback outcome requires probabilities")
            total = sum(self.probabilities.values())
            if abs(total - 1.0) > 1e-9:
                raise ValidationError(f"probabilities sum to {total}, expected 1")


def classify_page(
    page: PageImage,
    ocr_text: str,
    vlm: VlmBackend | None,
    rules: Sequence[TitleRule],
    classifier: TextClassifier | None,
) -> ClassificationOutcome:
    """Title rule when it fires, ML fallback otherwise.

    A dead VLM degrades straight to the fallback; with no usable path at
    all, classification is unavailable.
    """
    title: str | None = None
    if vlm is not None:
        try:
            title = extract_title(page, vlm)
        except (BackendUnavailableError, UnparseableOutputError):
            title = None
    if title is not None:
        mapped = map_title(title, rules)
        if mapped is not None:
            return ClassificationOutcome(
                doc_type=mapped, method=ClassificationMethod.TITLE_RULE, title=title
            )
    if classifier is None:
        raise ClassificationUnavailableError(
            "title mapping failed and no fallback model is configured"
        )
    doc_type, probabilities = classifier.predict(ocr_text)
    return ClassificationOutcome(
        doc_type=doc_type,
        method=ClassificationMethod.ML_FALLBACK,
        title=title,
        probabilities=probabilities,
    )
