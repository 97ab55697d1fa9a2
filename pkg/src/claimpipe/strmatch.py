"""String normalization and edit-distance helpers.

Used by evidence grounding (extract) and fuzzy entity normalization
(postprocess). The test suite checks these against an independent
reference implementation, so keep semantics stable.
"""

from __future__ import annotations

import string
import unicodedata

_EDGE_PUNCT = string.punctuation + "“”‘’·…"

# Currency marks commonly seen on SG/VN claim documents.
CURRENCY_MARKS = "₫đĐ$€£¥₹"
_CURRENCY_CODES = ("VND", "SGD", "USD", "EUR", "S$", "SG$", "US$")


def normalize_for_match(text: str) -> str:
    """Lowercase, strip punctuation at token edges, collapse whitespace."""
    words = []
    for word in text.split():
        stripped = word.strip(_EDGE_PUNCT).lower()
        if stripped:
            words.append(stripped)
    return " ".join(words)


def normalize_amount_for_match(text: str) -> str:
    """Keep only digits for digit-grouping-insensitive comparison.

    Allows a model value "1650000" to align with an OCR token "1.650.000".
    """
    return "".join(ch for ch in text if ch.isdigit())


def fold_diacritics(text: str) -> str:
    """Remove combining marks; maps Vietnamese đ/Đ to d/D as well."""
    text = text.replace("đ", "d").replace("Đ", "D")
    decomposed = unicodedata.normalize("NFD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def normalize_for_index(text: str) -> str:
    """Reference-index normalization: fold, lowercase, strip punctuation."""
    folded = fold_diacritics(text).lower()
    cleaned = "".join(" " if ch in string.punctuation else ch for ch in folded)
    return " ".join(cleaned.split())


def trigrams(text: str) -> set[str]:
    """Character trigrams over a two-space-padded string."""
    if not text:
        return set()
    padded = f"  {text}  "
    return {padded[i : i + 3] for i in range(len(padded) - 2)}


def levenshtein(a: str, b: str, cutoff: int | None = None) -> int:
    """Iterative edit distance; stops early once every path exceeds cutoff."""
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    if cutoff is not None and abs(la - lb) > cutoff:
        return cutoff + 1
    if la > lb:
        a, b, la, lb = b, a, lb, la
    previous = list(range(la + 1))
    current = [0] * (la + 1)
    for j in range(1, lb + 1):
        current[0] = j
        bj = b[j - 1]
        row_min = current[0]
        for i in range(1, la + 1):
            cost = 0 if a[i - 1] == bj else 1
            current[i] = min(
                previous[i] + 1,
                current[i - 1] + 1,
                previous[i - 1] + cost,
            )
            if current[i] < row_min:
                row_min = current[i]
        if cutoff is not None and row_min > cutoff:
            return cutoff + 1
        previous, current = current, previous
    return previous[la]


def similarity(a: str, b: str) -> float:
    """1 - levenshtein / max(len); 1.0 when both empty."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest
