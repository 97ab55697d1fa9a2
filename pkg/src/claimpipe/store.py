"""Append-only result store: one directory per claim.

claims/<id>/result.json holds the persisted extraction record,
corrections.log its append-only audit trail, pages/<n>.png the stored
resized page images. Writes go to a temp directory renamed into place, so
a failed run never leaves a partial claim behind.
"""

from __future__ import annotations

import datetime
import json
import os
import shutil
import threading
from collections import defaultdict
from pathlib import Path

from .errors import NotFoundError, StorageError
from .model import FieldStatus
from .records import (
    ClaimExtractionResult,
    CorrectionEntry,
    result_from_dict,
    result_to_dict,
)


def utc_now_iso() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class ResultStore:
    def __init__(self, root: str | Path, id_prefix: str = "C") -> None:
        self.root = Path(root)
        self.claims_dir = self.root / "claims"
        self.claims_dir.mkdir(parents=True, exist_ok=True)
        self._counter_file = self.root / "counter.txt"
        self._id_prefix = id_prefix
        self._counter_lock = threading.Lock()
        self._claim_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._locks_guard = threading.Lock()

    def _lock_for(self, claim_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._claim_locks[claim_id]

    def new_claim_id(self) -> str:
        """Zero-padded per-store counter, e.g. C2024-0001."""
        with self._counter_lock:
            counter = 0
            if self._counter_file.exists():
                counter = int(self._counter_file.read_text().strip() or 0)
            counter += 1
            self._counter_file.write_text(str(counter))
        year = datetime.date.today().year
        return f"{self._id_prefix}{year}-{counter:04d}"

    # -- writes -----------------------------------------------------------

    def save(self, result: ClaimExtractionResult, page_images: list[bytes]) -> None:
        final_dir = self.claims_dir / result.claim_id
        if final_dir.exists():
            raise StorageError(f"claim {result.claim_id} already stored")
        tmp_dir = self.claims_dir / f".tmp-{result.claim_id}"
        if tmp_dir.exists():
            shutil.rmtree(tmp_dir)
        pages_dir = tmp_dir / "pages"
        pages_dir.mkdir(parents=True)
        (tmp_dir / "result.json").write_text(
            json.dumps(result_to_dict(result), ensure_ascii=False, indent=1),
            encoding="utf-8",
        )
        (tmp_dir / "corrections.log").touch()
        for i, png in enumerate(page_images):
            (pages_dir / f"{i}.png").write_bytes(png)
        os.rename(tmp_dir, final_dir)

    def save_failed(self, claim_id: str, code: str, message: str, filename: str = "") -> None:
        final_dir = self.claims_dir / claim_id
        final_dir.mkdir(parents=True, exist_ok=True)
        (final_dir / "failed.json").write_text(
            json.dumps(
                {
                    "status": "failed",
                    "claim_id": claim_id,
                    "filename": filename,
                    "error": {"code": code, "message": message},
                    "created_at": utc_now_iso(),
                }
            ),
            encoding="utf-8",
        )

    def record_correction(
        self, claim_id: str, page_index: int, field: str, new_value: str
    ) -> ClaimExtractionResult:
        """Apply one correction: append to the audit log, update the field.

        raw_value and evidence are never touched; only normalized_value and
        status change. The latest correction wins; every one is retained.
        """
        with self._lock_for(claim_id):
            result = self.load(claim_id)
            page = next((p for p in result.pages if p.page_index == page_index), None)
            if page is None:
                raise NotFoundError(f"claim {claim_id} has no page {page_index}")
            target = next((f for f in page.fields if f.field == field), None)
            if target is None:
                raise NotFoundError(f"page {page_index} has no field {field!r}")
            entry = CorrectionEntry(
                field=field,
                page_index=page_index,
                old=target.normalized_value,
                new=new_value,
                corrected_at=utc_now_iso(),
            )
            updated_field = target.with_normalized(new_value).with_status(
                FieldStatus.CORRECTED
            )
            page.fields[page.fields.index(target)] = updated_field
            result.corrections.append(entry)
            claim_dir = self.claims_dir / claim_id
            with open(claim_dir / "corrections.log", "a", encoding="utf-8") as log:
                log.write(
                    json.dumps(
                        {
                            "field": entry.field,
                            "page_index": entry.page_index,
                            "old": entry.old,
                            "new": entry.new,
                            "corrected_at": entry.corrected_at,
                        }
                    )
                    + "\n"
                )
            tmp = claim_dir / ".result.json.tmp"
            tmp.write_text(
                json.dumps(result_to_dict(result), ensure_ascii=False, indent=1),
                encoding="utf-8",
            )
            os.replace(tmp, claim_dir / "result.json")
            return result

    # -- reads ------------------------------------------------------------

    def exists(self, claim_id: str) -> bool:
        return (self.claims_dir / claim_id).is_dir()

    def load_record(self, claim_id: str) -> dict:
        """Raw stored record: a completed result or a failed-job marker."""
        claim_dir = self.claims_dir / claim_id
        result_file = claim_dir / "result.json"
        if result_file.exists():
            return json.loads(result_file.read_text(encoding="utf-8"))
        failed_file = claim_dir / "failed.json"
        if failed_file.exists():
            return json.loads(failed_file.read_text(encoding="utf-8"))
        raise NotFoundError(f"no stored claim {claim_id}")

    def load(self, claim_id: str) -> ClaimExtractionResult:
        record = self.load_record(claim_id)
        if record.get("status") != "completed":
            raise NotFoundError(f"claim {claim_id} did not complete")
        return result_from_dict(record)

    def page_image(self, claim_id: str, page_index: int) -> bytes:
        path = self.claims_dir / claim_id / "pages" / f"{page_index}.png"
        if not path.exists():
            raise NotFoundError(f"claim {claim_id} has no stored page {page_index}")
        return path.read_bytes()

    def claim_ids(self) -> list[str]:
        return sorted(
            p.name for p in self.claims_dir.iterdir()
            if p.is_dir() and not p.name.startswith(".")
        )

    def list_records(self, limit: int = 50, offset: int = 0) -> tuple[list[dict], int]:
        ids = self.claim_ids()
        return [self.load_record(c) for c in ids[offset : offset + limit]], len(ids)
