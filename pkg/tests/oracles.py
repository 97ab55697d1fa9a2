"""Independent reference implementations used as test oracles.

Deliberately naive and separate from the production code paths they
check: full-matrix edit distance, exhaustive span search, and
central-difference gradients.
"""

from __future__ import annotations

import string


def ref_levenshtein(a: str, b: str) -> int:
    """Textbook full DP matrix, no shortcuts."""
    rows, cols = len(a) + 1, len(b) + 1
    matrix = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        matrix[i][0] = i
    for j in range(cols):
        matrix[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            matrix[i][j] = min(
                matrix[i - 1][j] + 1,
                matrix[i][j - 1] + 1,
                matrix[i - 1][j - 1] + cost,
            )
    return matrix[rows - 1][cols - 1]


_EDGE_PUNCT = string.punctuation + "“”‘’·…"


def ref_normalize_text(text: str) -> str:
    words = []
    for word in text.split():
        word = word.strip(_EDGE_PUNCT).lower()
        if word:
            words.append(word)
    return " ".join(words)


def ref_normalize_amount(text: str) -> str:
    return "".join(ch for ch in text if ch.isdigit())


def brute_force_ground(
    value: str,
    token_texts: list[str],
    max_span: int,
    threshold: float,
    amount_kind: bool = False,
) -> tuple[int, int, float] | None:
    """Exhaustively score every contiguous span; pick by
    (score desc, span length asc, start asc); None below threshold.

    Returns (start index, end index, score) over the token list as given.
    """
    normalize = ref_normalize_amount if amount_kind else ref_normalize_text
    value_norm = normalize(value)
    if not value_norm:
        return None
    scored: list[tuple[float, int, int]] = []
    n = len(token_texts)
    for start in range(n):
        for end in range(start, min(start + max_span, n)):
            concat_norm = normalize(" ".join(token_texts[start : end + 1]))
            longest = max(len(value_norm), len(concat_norm))
            if longest == 0:
                continue
            score = 1.0 - ref_levenshtein(value_norm, concat_norm) / longest
            scored.append((score, end - start + 1, start))
    if not scored:
        return None
    best_score = max(s for s, _, _ in scored)
    if best_score < threshold:
        return None
    candidates = sorted(
        ((length, start) for score, length, start in scored if score == best_score)
    )
    length, start = candidates[0]
    return start, start + length - 1, best_score


def central_difference_gradient(func, point, step: float = 1e-5):
    """Componentwise central differences of a scalar function."""
    import numpy as np

    point = np.asarray(point, dtype=np.float64)
    grad = np.zeros_like(point)
    for i in range(point.size):
        bumped = point.copy()
        bumped.flat[i] += step
        upper = func(bumped)
        bumped.flat[i] -= 2 * step
        lower = func(bumped)
        grad.flat[i] = (upper - lower) / (2 * step)
    return grad
