"""claimpipe command line: serve, process, classify, train, eval,
refindex, corpus."""

from __future__ import annotations

import dataclasses
import json
import sys
import tempfile
from pathlib import Path

import click

from .classify import save_classifier
from .config import load_config
from .corpus import DEFAULT_CORPUS_TYPES, GeneratorConfig, generate_synthetic_corpus
from .errors import ClaimPipeError
from .evaluation import evaluate, pipeline_config_for_corpus
from .pipeline import Pipeline
from .postprocess import RefIndexConfig, build_reference_index, load_reference_list
from .records import result_to_dict
from .training import train_from_corpus


@click.group()
def main() -> None:
    """Claim document understanding pipeline."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--ui-dir", type=click.Path(exists=True), default=None, help="Static review console assets.")
def serve(config_path: str | None, host: str, port: int, ui_dir: str | None) -> None:
    """Run the HTTP API."""
    import uvicorn

    from .service import create_app

    pipeline = Pipeline(load_config(config_path))
    uvicorn.run(create_app(pipeline, ui_dir=ui_dir), host=host, port=port)


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--max-dim", type=int, default=None, help="Override the 1024 px resize bound.")
def process(paths: tuple[str, ...], config_path: str | None, max_dim: int | None) -> None:
    """Process documents; one JSON result per line."""
    config = load_config(config_path)
    if max_dim is not None:
        config = dataclasses.replace(config, max_dim=max_dim)
    pipeline = Pipeline(config)
    failures = 0
    for path in paths:
        try:
            result = pipeline.process_path(path)
        except ClaimPipeError as exc:
            failures += 1
            click.echo(json.dumps({"status": "failed", "file": str(path), "error": {"code": exc.code, "message": str(exc)}}))
            continue
        click.echo(json.dumps(result_to_dict(result), ensure_ascii=False))
    if failures:
        sys.exit(1)


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--max-dim", type=int, default=None, help="Override the 1024 px resize bound.")
def classify(path: str, config_path: str | None, max_dim: int | None) -> None:
    """Classify each page of one document."""
    config = load_config(config_path)
    if max_dim is not None:
        config = dataclasses.replace(config, max_dim=max_dim)
    pipeline = Pipeline(config)
    result = pipeline.process_path(path, persist=False)
    for page in result.pages:
        c = page.classification
        click.echo(
            json.dumps(
                {
                    "page_index": page.page_index,
                    "doc_type": c.doc_type if c else None,
                    "method": c.method.value if c else None,
                    "title": c.title if c else None,
                },
                ensure_ascii=False,
            )
        )


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--split", default=0.8, show_default=True)
@click.option("--seed", default=42, show_default=True)
def train(corpus_dir: str, out_path: str, split: float, seed: int) -> None:
    """Train the TF-IDF + logistic-regression fallback classifier."""
    classifier, accuracy, n_train, n_test = train_from_corpus(corpus_dir, split=split, seed=seed)
    save_classifier(classifier, out_path)
    click.echo(f"trained on {n_train} pages, held-out accuracy {accuracy:.4f} ({n_test} pages)")
    click.echo(f"model written to {out_path}")


@main.command(name="eval")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--model", "model_file", type=click.Path(exists=True), default=None)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--store-dir", type=click.Path(), default=None, help="Defaults to a temp directory.")
def eval_command(
    corpus_dir: str,
    config_path: str | None,
    model_file: str | None,
    report_path: str | None,
    store_dir: str | None,
) -> None:
    """Run the pipeline over a corpus and report accuracy metrics."""
    base = load_config(config_path)
    store = store_dir or tempfile.mkdtemp(prefix="claimpipe-eval-")
    config = pipeline_config_for_corpus(corpus_dir, store, base=base, model_file=model_file)
    report = evaluate(corpus_dir, Pipeline(config))
    click.echo(report.format_table())
    if report_path:
        Path(report_path).write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
        click.echo(f"report written to {report_path}")


@main.group()
def refindex() -> None:
    """Reference-index utilities."""


@refindex.command(name="build")
@click.argument("path", type=click.Path(exists=True))
@click.option("--threshold", default=0.60, show_default=True)
@click.option("--top-k", default=25, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write the compiled index as JSON.")
def refindex_build(path: str, threshold: float, top_k: int, out_path: str | None) -> None:
    """Build the fuzzy-matching index from a reference list file."""
    index = build_reference_index(
        load_reference_list(path),
        RefIndexConfig(similarity_threshold=threshold, prefilter_top_k=top_k),
    )
    click.echo(f"{len(index.entries)} entries, {len(index.postings)} trigrams")
    if out_path:
        compiled = {
            "config": {"similarity_threshold": threshold, "prefilter_top_k": top_k},
            "entries": [
                {"id": e.entry_id, "canonical": e.canonical, "normalized": e.normalized}
                for e in index.entries
            ],
        }
        Path(out_path).write_text(json.dumps(compiled, ensure_ascii=False, indent=1), encoding="utf-8")
        click.echo(f"compiled index written to {out_path}")


@main.group()
def corpus() -> None:
    """Synthetic corpus utilities."""


@corpus.command(name="generate")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--n-docs", default=100, show_default=True)
@click.option("--types", default=",".join(DEFAULT_CORPUS_TYPES), show_default=True)
@click.option("--field-error-rate", default=0.10, show_default=True)
@click.option("--unmappable-title-rate", default=0.05, show_default=True)
@click.option("--bundle-types", default=None, help="Comma-separated page types for every document.")
def corpus_generate(
    out_dir: str,
    seed: int,
    n_docs: int,
    types: str,
    field_error_rate: float,
    unmappable_title_rate: float,
    bundle_types: str | None,
) -> None:
    """Generate PDFs, fixtures and gold labels for offline evaluation."""
    config = GeneratorConfig(
        seed=seed,
        n_docs=n_docs,
        types=tuple(t.strip() for t in types.split(",") if t.strip()),
        field_error_rate=field_error_rate,
        unmappable_title_rate=unmappable_title_rate,
        bundle_types=(
            tuple(t.strip() for t in bundle_types.split(",")) if bundle_types else None
        ),
    )
    documents = generate_synthetic_corpus(out_dir, config)
    pages = sum(len(d.pages) for d in documents)
    click.echo(f"wrote {len(documents)} documents ({pages} pages) to {out_dir}")


if __name__ == "__main__":
    main()
