"""Tiny deterministic PDF writer.

Emits uncompressed single-font PDFs good enough for the synthetic corpus
and for exercising the page splitter: one page object per page, explicit
MediaBox, plain text content streams, no timestamps or random IDs.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class PdfPage:
    """One page: size in points plus (x, y, text) draw commands."""

    width_pt: float = 360.0
    height_pt: float = 480.0
    texts: list[tuple[float, float, str]] = field(default_factory=list)

    def add_text(self, x: float, y: float, text: str) -> None:
        self.texts.append((x, y, text))


def _escape(text: str) -> bytes:
    out = text.replace("\\", "\\\\").replace("(", "\\(").replace(")", "\\)")
    return out.encode("latin-1", errors="replace")


def _content_stream(page: PdfPage) -> bytes:
    parts = [b"BT /F1 10 Tf"]
    for x, y, text in page.texts:
        parts.append(f"1 0 0 1 {x:.1f} {y:.1f} Tm".encode("ascii"))
        parts.append(b"(" + _escape(text) + b") Tj")
    parts.append(b"ET")
    return b"\n".join(parts)


def write_pdf(pages: list[PdfPage]) -> bytes:
    """Serialize pages to PDF bytes; same input yields identical bytes."""
    if not pages:
        raise ValueError("a PDF needs at least one page")
    objects: list[bytes] = []
    n_pages = len(pages)
    # Object numbering: 1 catalog, 2 pages node, 3 font,
    # then per page: 4+2i page dict, 5+2i content stream.
    kids = " ".join(f"{4 + 2 * i} 0 R" for i in range(n_pages))
    objects.append(b"<< /Type /Catalog /Pages 2 0 R >>")
    objects.append(
        f"<< /Type /Pages /Kids [{kids}] /Count {n_pages} >>".encode("ascii")
    )
    objects.append(b"<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>")
    for i, page in enumerate(pages):
        content = _content_stream(page)
        objects.append(
            (
                f"<< /Type /Page /Parent 2 0 R "
                f"/MediaBox [0 0 {page.width_pt:.2f} {page.height_pt:.2f}] "
                f"/Resources << /Font << /F1 3 0 R >> >> "
                f"/Contents {5 + 2 * i} 0 R >>"
            ).encode("ascii")
        )
        objects.append(
            f"<< /Length {len(content)} >>\nstream\n".encode("ascii")
            + content
            + b"\nendstream"
        )

    buf = bytearray(b"%PDF-1.4\n")
    offsets = [0]
    for num, body in enumerate(objects, start=1):
        offsets.append(len(buf))
        buf += f"{num} 0 obj\n".encode("ascii") + body + b"\nendobj\n"
    xref_at = len(buf)
    buf += f"xref\n0 {len(objects) + 1}\n".encode("ascii")
    buf += b"0000000000 65535 f \n"
    for off in offsets[1:]:
        buf += f"{off:010d} 00000 n \n".encode("ascii")
    buf += (
        f"trailer\n<< /Size {len(objects) + 1} /Root 1 0 R >>\n"
        f"startxref\n{xref_at}\n%%EOF\n"
    ).encode("ascii")
    return bytes(buf)
