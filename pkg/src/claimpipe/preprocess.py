"""Input splitting and page resizing.

Multi-page inputs become one PageImage per page; oversized pages are
bounded to a maximum dimension before any OCR or model call. PDF
rasterization goes through a pluggable adapter so a real renderer can be
swapped in without touching the pipeline.
"""

from __future__ import annotations

import hashlib
import io
import os
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Protocol

from PIL import Image

from .errors import (
    BackendUnavailableError,
    DecodeError,
    EmptyDocumentError,
    FileTooLargeError,
    ValidationError,
)
from .model import PageImage

DEFAULT_MAX_DIM = 1024
DEFAULT_DPI = 150
DEFAULT_MAX_BYTES = 50 * 1024 * 1024

_LETTER_PT = (612.0, 792.0)


class DocFormat(str, Enum):
    PDF = "pdf"
    PNG = "png"
    JPEG = "jpeg"


def sniff_format(data: bytes) -> DocFormat:
    if data.startswith(b"%PDF-"):
        return DocFormat.PDF
    if data.startswith(b"\x89PNG\r\n\x1a\n"):
        return DocFormat.PNG
    if data.startswith(b"\xff\xd8\xff"):
        return DocFormat.JPEG
    raise DecodeError("unrecognized payload (expected pdf, png, or jpeg magic)")


@dataclass(frozen=True)
class RawDocument:
    """An uploaded file: bytes plus sniffed format and content digest."""

    data: bytes
    format: DocFormat
    filename: str
    digest: str

    def __post_init__(self) -> None:
        if not self.data:
            raise ValidationError("document payload is empty")
        if sniff_format(self.data) is not self.format:
            raise ValidationError("declared format disagrees with payload magic bytes")

    @classmethod
    def from_bytes(
        cls, data: bytes, filename: str = "document", max_bytes: int = DEFAULT_MAX_BYTES
    ) -> "RawDocument":
        if not data:
            raise DecodeError("empty payload")
        if len(data) > max_bytes:
            raise FileTooLargeError(
                f"{filename}: {len(data)} bytes exceeds cap of {max_bytes}"
            )
        fmt = sniff_format(data)
        digest = hashlib.sha256(data).hexdigest()
        return cls(data=data, format=fmt, filename=filename, digest=digest)

    @classmethod
    def from_file(cls, path: str | Path, max_bytes: int = DEFAULT_MAX_BYTES) -> "RawDocument":
        p = Path(path)
        return cls.from_bytes(p.read_bytes(), filename=p.name, max_bytes=max_bytes)


def page_digest(doc_digest: str, page_index: int) -> str:
    """Stable per-page digest derived from the source document digest."""
    return hashlib.sha256(f"{doc_digest}/{page_index}".encode("ascii")).hexdigest()


# -- PDF page-tree parsing -------------------------------------------------

_OBJ_RE = re.compile(rb"(\d+)\s+\d+\s+obj\b")
_KIDS_RE = re.compile(rb"/Kids\s*\[((?:\s*\d+\s+\d+\s+R)*)\s*\]")
_REF_RE = re.compile(rb"(\d+)\s+\d+\s+R")
_MEDIABOX_RE = re.compile(
    rb"/MediaBox\s*\[\s*([\d.+-]+)\s+([\d.+-]+)\s+([\d.+-]+)\s+([\d.+-]+)\s*\]"
)


def _pdf_object_dicts(data: bytes) -> dict[int, bytes]:
    """Map object number -> dict bytes (up to its stream or endobj)."""
    objects: dict[int, bytes] = {}
    for match in _OBJ_RE.finditer(data):
        start = match.end()
        end_obj = data.find(b"endobj", start)
        stream_at = data.find(b"stream", start)
        end = end_obj if end_obj != -1 else len(data)
        if stream_at != -1 and stream_at < end:
            end = stream_at
        objects[int(match.group(1))] = data[start:end]
    return objects


def _media_box(obj: bytes) -> tuple[float, float] | None:
    m = _MEDIABOX_RE.search(obj)
    if not m:
        return None
    x0, y0, x1, y1 = (float(v) for v in m.groups())
    return abs(x1 - x0), abs(y1 - y0)


def parse_pdf_page_sizes(data: bytes) -> list[tuple[float, float]]:
    """Page sizes in points, in page-tree order.

    Handles uncompressed page trees (object dicts in plain text). PDFs
    whose page objects live inside compressed object streams need a real
    rasterizer adapter instead.
    """
    objects = _pdf_object_dicts(data)
    if not objects:
        raise DecodeError("no PDF objects found (truncated or compressed payload)")
    roots = [
        num
        for num, obj in objects.items()
        if re.search(rb"/Type\s*/Pages\b", obj) and b"/Parent" not in obj
    ]
    pages: list[tuple[float, float]] = []

    def walk(num: int, inherited: tuple[float, float]) -> None:
        obj = objects.get(num)
        if obj is None:
            raise DecodeError(f"dangling page reference to object {num}")
        box = _media_box(obj) or inherited
        if re.search(rb"/Type\s*/Pages\b", obj):
            kids = _KIDS_RE.search(obj)
            if kids:
                for ref in _REF_RE.finditer(kids.group(1)):
                    walk(int(ref.group(1)), box)
        elif re.search(rb"/Type\s*/Page\b", obj):
            pages.append(box)

    for root in roots:
        walk(root, _LETTER_PT)
    if not roots:
        # No page tree at all: fall back to bare /Type /Page objects in
        # document order (some writers omit a proper tree).
        for num in sorted(objects):
            obj = objects[num]
            if re.search(rb"/Type\s*/Page\b", obj) and not re.search(
                rb"/Type\s*/Pages\b", obj
            ):
                pages.append(_media_box(obj) or _LETTER_PT)
        if not pages:
            raise DecodeError("no page objects found in PDF")
    if not pages:
        raise EmptyDocumentError("PDF contains zero pages")
    return pages


# -- rasterizer adapters -----------------------------------------------------


@dataclass(frozen=True)
class RasterPage:
    width: int
    height: int
    png_bytes: bytes


class Rasterizer(Protocol):
    """Adapter turning PDF bytes into per-page rasters.

    Implementations must be reentrant or internally serialized; both
    shipped adapters are reentrant.
    """

    def rasterize(self, data: bytes, dpi: int) -> list[RasterPage]: ...


def _blank_png(width: int, height: int) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", (width, height), "white").save(buf, "PNG")
    return buf.getvalue()


class BlankPageRasterizer:
    """Structure-only rasterizer: correct page count and size, white pixels.

    The default in test and fixture deployments, where OCR/VLM fixtures are
    keyed by source digest and never look at the raster. Production should
    select a real renderer via CLAIMPIPE_RASTERIZER.
    """

    def __init__(self) -> None:
        self._cache: dict[tuple[int, int], bytes] = {}

    def rasterize(self, data: bytes, dpi: int) -> list[RasterPage]:
        scale = dpi / 72.0
        pages = []
        for w_pt, h_pt in parse_pdf_page_sizes(data):
            w = max(1, round(w_pt * scale))
            h = max(1, round(h_pt * scale))
            png = self._cache.get((w, h))
            if png is None:
                png = _blank_png(w, h)
                self._cache[(w, h)] = png
            pages.append(RasterPage(width=w, height=h, png_bytes=png))
        return pages


class PdftoppmRasterizer:
    """Real rendering via poppler's pdftoppm, when the binary is present."""

    def __init__(self, binary: str = "pdftoppm") -> None:
        self.binary = binary

    def rasterize(self, data: bytes, dpi: int) -> list[RasterPage]:
        if shutil.which(self.binary) is None:
            raise BackendUnavailableError(f"{self.binary} not found on PATH")
        with tempfile.TemporaryDirectory(prefix="claimpipe-raster-") as tmp:
            src = Path(tmp) / "doc.pdf"
            src.write_bytes(data)
            try:
                subprocess.run(
                    [self.binary, "-png", "-r", str(dpi), str(src), str(Path(tmp) / "page")],
                    check=True,
                    capture_output=True,
                    timeout=120,
                )
            except (subprocess.CalledProcessError, subprocess.TimeoutExpired) as exc:
                raise DecodeError(f"pdftoppm failed: {exc}") from exc
            outputs = sorted(Path(tmp).glob("page-*.png"))
            if not outputs:
                raise EmptyDocumentError("pdftoppm produced no pages")
            pages = []
            for path in outputs:
                png = path.read_bytes()
                with Image.open(io.BytesIO(png)) as img:
                    w, h = img.size
                pages.append(RasterPage(width=w, height=h, png_bytes=png))
            return pages


_RASTERIZERS = {
    "blank": BlankPageRasterizer,
    "pdftoppm": PdftoppmRasterizer,
}


def get_rasterizer(name: str | None = None) -> Rasterizer:
    """Resolve a rasterizer adapter by name or CLAIMPIPE_RASTERIZER."""
    chosen = name or os.environ.get("CLAIMPIPE_RASTERIZER", "blank")
    try:
        return _RASTERIZERS[chosen]()
    except KeyError:
        raise BackendUnavailableError(
            f"unknown rasterizer {chosen!r}; known: {sorted(_RASTERIZERS)}"
        ) from None


# -- splitting and resizing --------------------------------------------------


def _decode_image(doc: RawDocument) -> tuple[int, int, bytes]:
    try:
        with Image.open(io.BytesIO(doc.data)) as img:
            img.load()
            width, height = img.size
            if doc.format is DocFormat.JPEG:
                buf = io.BytesIO()
                img.convert("RGB").save(buf, "PNG")
                return width, height, buf.getvalue()
    except FileTooLargeError:
        raise
    except Exception as exc:
        raise DecodeError(f"{doc.filename}: cannot decode image payload: {exc}") from exc
    return width, height, doc.data


def split_document(
    doc: RawDocument,
    rasterizer: Rasterizer | None = None,
    dpi: int = DEFAULT_DPI,
) -> list[PageImage]:
    """One PageImage per page, page_index contiguous from 0.

    Image inputs yield exactly one page. PDF inputs go through the
    rasterizer adapter. Page digests derive from the document digest and
    page index, so they are stable across rasterizer choices.
    """
    if doc.format in (DocFormat.PNG, DocFormat.JPEG):
        width, height, png = _decode_image(doc)
        return [
            PageImage(
                page_index=0,
                width=width,
                height=height,
                pixel_data=png,
                source_digest=page_digest(doc.digest, 0),
            )
        ]
    rasterizer = rasterizer or get_rasterizer()
    rasters = rasterizer.rasterize(doc.data, dpi=dpi)
    if not rasters:
        raise EmptyDocumentError(f"{doc.filename}: zero pages")
    return [
        PageImage(
            page_index=i,
            width=r.width,
            height=r.height,
            pixel_data=r.png_bytes,
            source_digest=page_digest(doc.digest, i),
        )
        for i, r in enumerate(rasters)
    ]


def resize_page(page: PageImage, max_dim: int = DEFAULT_MAX_DIM) -> PageImage:
    """Bound the longer side to max_dim, preserving aspect ratio.

    Never upscales; area-averaging (box) filter keeps the result identical
    across platforms. Digest lineage is preserved: the resized page keeps
    its source digest.
    """
    if max_dim < 1:
        raise ValidationError(f"max_dim must be >= 1, got {max_dim}")
    long_side = max(page.width, page.height)
    if long_side <= max_dim:
        return page
    if page.width >= page.height:
        new_w = max_dim
        new_h = max(1, round(page.height * max_dim / page.width))
    else:
        new_h = max_dim
        new_w = max(1, round(page.width * max_dim / page.height))
    try:
        with Image.open(io.BytesIO(page.pixel_data)) as img:
            resized = img.convert("RGB").resize((new_w, new_h), Image.Resampling.BOX)
    except Exception as exc:
        raise DecodeError(f"page {page.page_index}: cannot decode raster: {exc}") from exc
    buf = io.BytesIO()
    resized.save(buf, "PNG")
    return PageImage(
        page_index=page.page_index,
        width=new_w,
        height=new_h,
        pixel_data=buf.getvalue(),
        source_digest=page.source_digest,
    )
