"""HTTP API over the pipeline and result store.

JSON bodies, snake_case keys. POST /v1/claims accepts multipart uploads or
base64 JSON; synchronous by default, async with sync=false (202 plus the
claim id, poll GET /v1/claims/{id}).
"""

from __future__ import annotations

import base64
import binascii
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    ClaimPipeError,
    DecodeError,
    EmptyDocumentError,
    FileTooLargeError,
    NotFoundError,
)
from .model import FieldStatus
from .pipeline import Pipeline
from .preprocess import RawDocument
from .records import result_to_dict


class CorrectionRequest(BaseModel):
    page_index: int
    field: str
    new_value: str


def summarize_record(record: dict, low_confidence_threshold: float) -> dict:
    """Listing row: types, completeness, and review counters per claim."""
    if record.get("status") != "completed":
        return {
            "claim_id": record.get("claim_id"),
            "status": "failed",
            "created_at": record.get("created_at"),
            "filename": record.get("filename", ""),
            "error": record.get("error"),
        }
    fields = [f for page in record["pages"] for f in page["fields"]]
    return {
        "claim_id": record["claim_id"],
        "status": "completed",
        "created_at": record["created_at"],
        "filename": record.get("filename", ""),
        "page_types": [
            (page["classification"] or {}).get("doc_type") for page in record["pages"]
        ],
        "complete": record["bundle"]["complete"],
        "n_fields": len(fields),
        "n_missing": sum(1 for f in fields if f["status"] == FieldStatus.MISSING.value),
        "n_low_confidence": sum(
            1
            for f in fields
            if f["confidence"] is not None
            and f["confidence"] < low_confidence_threshold
        ),
    }


def _error_response(exc: ClaimPipeError, status: int) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": {"code": exc.code, "message": str(exc)}},
    )


async def _read_document(request: Request, max_bytes: int) -> tuple[RawDocument, bool]:
    """Parse either a multipart upload or a base64 JSON body."""
    content_type = request.headers.get("content-type", "")
    if content_type.startswith("multipart/form-data"):
        form = await request.form()
        upload = form.get("file")
        if upload is None:
            raise DecodeError("multipart body needs a 'file' part")
        data = await upload.read()
        sync = str(form.get("sync", "true")).lower() != "false"
        filename = upload.filename or "document"
    else:
        body = await request.json()
        try:
            data = base64.b64decode(body["content_base64"], validate=True)
        except (KeyError, binascii.Error, TypeError) as exc:
            raise DecodeError(f"bad JSON upload body: {exc}") from exc
        sync = bool(body.get("sync", True))
        filename = body.get("filename", "document")
    return RawDocument.from_bytes(data, filename=filename, max_bytes=max_bytes), sync


def create_app(pipeline: Pipeline, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="claimpipe", version="0.1.0")
    jobs = ThreadPoolExecutor(max_workers=pipeline.config.page_workers, thread_name_prefix="claimjob")
    app.state.pipeline = pipeline

    def run_job(doc: RawDocument, claim_id: str) -> None:
        try:
            pipeline.process_document(doc, claim_id=claim_id)
        except ClaimPipeError as exc:
            pipeline.store.save_failed(claim_id, exc.code, str(exc), filename=doc.filename)
        except Exception as exc:  # job must leave a pollable record either way
            pipeline.store.save_failed(claim_id, "internal_error", str(exc), filename=doc.filename)

    @app.post("/v1/claims")
    async def create_claim(request: Request):
        claim_id = pipeline.store.new_claim_id()
        try:
            doc, sync = await _read_document(request, pipeline.config.max_bytes)
        except (DecodeError, FileTooLargeError) as exc:
            pipeline.store.save_failed(claim_id, exc.code, str(exc))
            return _error_response(exc, 400)
        if not sync:
            jobs.submit(run_job, doc, claim_id)
            return JSONResponse(
                status_code=202, content={"claim_id": claim_id, "status": "accepted"}
            )
        try:
            result = pipeline.process_document(doc, claim_id=claim_id)
        except (DecodeError, EmptyDocumentError, FileTooLargeError) as exc:
            pipeline.store.save_failed(claim_id, exc.code, str(exc), filename=doc.filename)
            return _error_response(exc, 400)
        return result_to_dict(result)

    @app.get("/v1/claims")
    def list_claims(limit: int = 50, offset: int = 0):
        records, total = pipeline.store.list_records(limit=limit, offset=offset)
        threshold = pipeline.config.low_confidence_threshold
        return {
            "claims": [summarize_record(r, threshold) for r in records],
            "total": total,
            "limit": limit,
            "offset": offset,
        }

    @app.get("/v1/claims/{claim_id}")
    def get_claim(claim_id: str):
        try:
            return pipeline.store.load_record(claim_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/v1/claims/{claim_id}/corrections")
    def post_correction(claim_id: str, correction: CorrectionRequest):
        try:
            result = pipeline.record_correction(
                claim_id, correction.page_index, correction.field, correction.new_value
            )
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return result_to_dict(result)

    @app.get("/v1/claims/{claim_id}/pages/{page_index}/image")
    def get_page_image(claim_id: str, page_index: int):
        try:
            png = pipeline.store.page_image(claim_id, page_index)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return Response(content=png, media_type="image/png")

    @app.get("/v1/metrics")
    def get_metrics():
        return pipeline.metrics.snapshot()

    @app.get("/v1/config")
    def get_config():
        return {
            "low_confidence_threshold": pipeline.config.low_confidence_threshold,
            "grounding_threshold": pipeline.config.grounding_threshold,
            "day_first": pipeline.config.day_first,
            "version": app.version,
        }

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
