#!/usr/bin/env python3
"""Spin up the API against a freshly generated fixture corpus.

Generates a small corpus, trains a model, writes a config, then serves on
the given port. Point the review console (frontend/) or curl at it:

    python scripts/demo_server.py --port 8000
    curl -s -X POST localhost:8000/v1/claims -F file=@<corpus>/docs/doc_0000.pdf
"""

from __future__ import annotations

import argparse
import tempfile
from pathlib import Path

import uvicorn

from claimpipe.classify import save_classifier
from claimpipe.corpus import GeneratorConfig, generate_synthetic_corpus
from claimpipe.evaluation import pipeline_config_for_corpus
from claimpipe.pipeline import Pipeline
from claimpipe.service import create_app
from claimpipe.training import train_from_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--n-docs", type=int, default=60)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--ui-dir", default=None, help="Static assets dir (frontend/dist)")
    args = parser.parse_args()

    work = Path(tempfile.mkdtemp(prefix="claimpipe-demo-"))
    corpus = work / "corpus"
    generate_synthetic_corpus(corpus, GeneratorConfig(seed=args.seed, n_docs=args.n_docs))
    classifier, accuracy, _, _ = train_from_corpus(corpus, seed=args.seed)
    model_path = work / "model.json"
    save_classifier(classifier, model_path)
    config = pipeline_config_for_corpus(corpus, work / "store", model_file=str(model_path))
    print(f"corpus: {corpus}")
    print(f"fallback model held-out accuracy: {accuracy:.3f}")
    ui_dir = args.ui_dir
    if ui_dir is None:
        default_ui = Path(__file__).resolve().parent.parent / "frontend" / "dist"
        ui_dir = str(default_ui) if default_ui.is_dir() else None
    if ui_dir:
        print(f"review console at http://{args.host}:{args.port}/ui/")
    uvicorn.run(create_app(Pipeline(config), ui_dir=ui_dir), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
