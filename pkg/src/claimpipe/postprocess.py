"""Post-extraction normalization.

Entity values are fuzzily matched against a reference list through an
in-process trigram + edit-distance index (an adapter seam allows swapping
in an external search service); dates are canonicalized to DD/MM/YYYY;
amounts to a plain decimal string.
"""

from __future__ import annotations

import datetime
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

from .errors import ReferenceIndexError
from .model import FieldKind
from .strmatch import levenshtein, normalize_for_index, trigrams

DEFAULT_SIMILARITY_THRESHOLD = 0.60
DEFAULT_PREFILTER_TOP_K = 25


@dataclass(frozen=True)
class RefIndexConfig:
    similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    prefilter_top_k: int = DEFAULT_PREFILTER_TOP_K


@dataclass(frozen=True)
class RefEntry:
    entry_id: str
    canonical: str
    normalized: str


@dataclass(frozen=True)
class NormalizationResult:
    output: str
    matched: bool
    score: float
    canonical_id: str | None


class EntityNormalizer(Protocol):
    """Seam for delegating entity normalization to an external service."""

    def normalize(self, value: str) -> NormalizationResult: ...


@dataclass(frozen=True)
class RefIndex:
    entries: tuple[RefEntry, ...]
    postings: dict[str, tuple[int, ...]]
    config: RefIndexConfig

    def normalize(self, value: str) -> NormalizationResult:
        return normalize_entity(value, self)


def build_reference_index(
    names: Iterable[str | tuple[str, str]],
    config: RefIndexConfig = RefIndexConfig(),
) -> RefIndex:
    """Index canonical names: normalized (diacritics folded) for matching,
    originals preserved for output. Duplicates under normalization collapse
    to the first occurrence."""
    entries: list[RefEntry] = []
    seen: dict[str, int] = {}
    for item in names:
        entry_id, name = item if isinstance(item, tuple) else (None, item)
        normalized = normalize_for_index(name)
        if not normalized or normalized in seen:
            continue
        seen[normalized] = len(entries)
        entries.append(
            RefEntry(
                entry_id=entry_id if entry_id is not None else name,
                canonical=name,
                normalized=normalized,
            )
        )
    if not entries:
        raise ReferenceIndexError("no usable names to index")
    postings: dict[str, list[int]] = {}
    for i, entry in enumerate(entries):
        for gram in trigrams(entry.normalized):
            postings.setdefault(gram, []).append(i)
    return RefIndex(
        entries=tuple(entries),
        postings={g: tuple(ids) for g, ids in postings.items()},
        config=config,
    )


def load_reference_list(path: str | Path) -> list[tuple[str, str]]:
    """Newline-delimited names, optional "id<TAB>name" form, '#' comments."""
    pairs: list[tuple[str, str]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "\t" in line:
            entry_id, name = line.split("\t", 1)
            pairs.append((entry_id.strip(), name.strip()))
        else:
            pairs.append((line, line))
    return pairs


def normalize_entity(value: str, index: RefIndex) -> NormalizationResult:
    """Fuzzy match against the reference list; substitute only on a match.

    Candidates are prefiltered by trigram overlap, then scored by
    1 - levenshtein/max(len). Ties prefer higher trigram overlap, then the
    lexicographically smaller entry.
    """
    norm = normalize_for_index(value)
    if not norm:
        return NormalizationResult(output=value, matched=False, score=0.0, canonical_id=None)
    value_grams = trigrams(norm)
    overlap: dict[int, int] = {}
    for gram in value_grams:
        for idx in index.postings.get(gram, ()):
            overlap[idx] = overlap.get(idx, 0) + 1
    candidates = sorted(
        overlap,
        key=lambda i: (-overlap[i], index.entries[i].normalized),
    )[: index.config.prefilter_top_k]
    best: RefEntry | None = None
    best_key: tuple[float, int, str] | None = None
    for idx in candidates:
        entry = index.entries[idx]
        longest = max(len(norm), len(entry.normalized))
        score = 1.0 - levenshtein(norm, entry.normalized) / longest
        key = (-score, -overlap[idx], entry.normalized)
        if best_key is None or key < best_key:
            best, best_key = entry, key
    if best is not None and -best_key[0] >= index.config.similarity_threshold:
        return NormalizationResult(
            output=best.canonical,
            matched=True,
            score=-best_key[0],
            canonical_id=best.entry_id,
        )
    return NormalizationResult(output=value, matched=False, score=0.0, canonical_id=None)


# -- dates ---------------------------------------------------------------------

_TIME_SUFFIX_RE = re.compile(
    r"[T ]\d{1,2}:\d{2}(:\d{2})?(\.\d+)?(\s?(AM|PM|am|pm))?(Z|[+-]\d{2}:?\d{2})?$"
)
_ISO_RE = re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$")
_DMY_RE = re.compile(r"^(\d{1,2})([/.\-])(\d{1,2})\2(\d{4})$")


def _valid_date(day: int, month: int, year: int) -> bool:
    try:
        datetime.date(year, month, day)
    except ValueError:
        return False
    return True


def normalize_date(raw: str, day_first: bool = True) -> str | None:
    """Canonicalize to zero-padded DD/MM/YYYY; None when unusable.

    Accepts D/M/YYYY with /, - or . separators and ISO YYYY-MM-DD, each
    optionally followed by a time component, which is stripped. Calendar
    validity (leap years included) is enforced. For a/b/YYYY with both
    parts <= 12 the markets here read day-first; an unambiguous month-first
    value (a <= 12 < b) is treated as a swapped MM/DD and corrected.
    """
    text = raw.strip()
    text = _TIME_SUFFIX_RE.sub("", text).strip()
    m = _ISO_RE.match(text)
    if m:
        year, month, day = (int(g) for g in m.groups())
        if not _valid_date(day, month, year):
            return None
        return f"{day:02d}/{month:02d}/{year:04d}"
    m = _DMY_RE.match(text)
    if not m:
        return None
    a, _, b, year = m.groups()
    a, b, year = int(a), int(b), int(year)
    if a > 12 >= b:
        day, month = a, b
    elif a <= 12 < b:
        day, month = b, a  # month-first input; swap
    elif day_first:
        day, month = a, b
    else:
        day, month = b, a
    if not _valid_date(day, month, year):
        return None
    return f"{day:02d}/{month:02d}/{year:04d}"


# -- amounts -------------------------------------------------------------------


def _is_currency_or_space(ch: str) -> bool:
    return unicodedata.category(ch) == "Sc" or ch.isspace()


def normalize_amount(raw: str) -> str | None:
    """Canonical decimal string: no grouping, '.' as the decimal separator.

    Currency symbols, currency codes and spaces are stripped. When both
    '.' and ',' appear, the last one is the decimal separator. A single
    separator followed by exactly three digits after a 1-3 digit group is
    grouping ("1.650" -> 1650); anything else is a decimal point.
    """
    stripped = "".join(
        ch for ch in raw if not _is_currency_or_space(ch) and not ch.isalpha()
    )
    stripped = "".join(ch for ch in stripped if ch in "0123456789.,")
    if not any(ch in "0123456789" for ch in stripped):
        return None
    dots = stripped.count(".")
    commas = stripped.count(",")
    if dots and commas:
        decimal_at = max(stripped.rfind("."), stripped.rfind(","))
        integer = re.sub(r"[.,]", "", stripped[:decimal_at])
        fraction = re.sub(r"[.,]", "", stripped[decimal_at + 1 :])
    elif dots + commas == 0:
        integer, fraction = stripped, ""
    else:
        sep = "." if dots else ","
        if dots + commas > 1:
            integer, fraction = stripped.replace(sep, ""), ""
        else:
            head, tail = stripped.split(sep)
            if len(tail) == 3 and 1 <= len(head) <= 3:
                integer, fraction = head + tail, ""
            else:
                integer, fraction = head, tail
    integer = integer.lstrip("0") or "0"
    if fraction:
        return f"{integer}.{fraction}"
    return integer


# -- kind routing ---------------------------------------------------------------


def normalize_field_value(
    kind: FieldKind,
    raw: str,
    entity_index: RefIndex | EntityNormalizer | None = None,
    day_first: bool = True,
) -> tuple[str | None, NormalizationResult | None]:
    """Total kind -> normalizer mapping; no field kind is left unhandled.

    Returns (normalized value or None, entity match detail when relevant).
    Text fields run through entity normalization when an index is
    configured and pass through trimmed otherwise.
    """
    if kind is FieldKind.DATE:
        return normalize_date(raw, day_first=day_first), None
    if kind is FieldKind.AMOUNT:
        return normalize_amount(raw), None
    if kind is FieldKind.IDENTIFIER:
        return " ".join(raw.split()), None
    if entity_index is not None:
        result = entity_index.normalize(raw)
        return " ".join(result.output.split()), result
    return " ".join(raw.split()), None
