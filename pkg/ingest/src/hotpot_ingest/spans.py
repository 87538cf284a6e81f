"""Approximate answer-span matching.

Candidate spans within +-2 tokens of the answer length are scored by
normalized character-level edit similarity (1 - levenshtein / max length) on
casefolded surface text; the best span wins, ties broken by earliest position,
and anything under the 0.8 threshold is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

SIMILARITY_THRESHOLD = 0.8
LENGTH_WINDOW = 2


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1,
                               previous[j - 1] + cost))
        previous = current
    return previous[-1]


def edit_similarity(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    longest = max(len(a), len(b))
    return 1.0 - levenshtein(a, b) / longest


@dataclass(frozen=True)
class SpanMatch:
    doc: int
    sentence: int
    start: int
    end: int
    similarity: float


def find_answer_span(documents: list[list[list[str]]], answer_tokens: list[str],
                     threshold: float = SIMILARITY_THRESHOLD,
                     window: int = LENGTH_WINDOW) -> SpanMatch | None:
    """Best-matching span over all sentences of all documents, or None.

    documents: per document, a list of token-list sentences. Evaluation order
    is (doc, sentence, start, length), so the earliest maximal match wins ties.
    """
    target = " ".join(answer_tokens).casefold()
    lengths = [
        n for n in range(max(1, len(answer_tokens) - window),
                         len(answer_tokens) + window + 1)
    ]
    best: SpanMatch | None = None
    for d, sentences in enumerate(documents):
        for s, tokens in enumerate(sentences):
            for start in range(len(tokens)):
                for n in lengths:
                    end = start + n
                    if end > len(tokens):
                        break
                    surface = " ".join(tokens[start:end]).casefold()
                    similarity = edit_similarity(surface, target)
                    if best is None or similarity > best.similarity:
                        best = SpanMatch(d, s, start, end, similarity)
                        if similarity == 1.0:
                            return best  # earliest exact match
    if best is not None and best.similarity >= threshold:
        return best
    return None
