"""Deterministic word tokenizer for raw sentence strings.

Words are maximal runs of word characters (with internal apostrophes and
hyphens kept, so "O'Brien" and "multi-hop" stay single tokens); every other
non-space character becomes its own token.
"""

from __future__ import annotations

import re

TOKENIZER_VERSION = "regex-word-1.0"

_PATTERN = re.compile(r"\w+(?:[-'’]\w+)*|[^\w\s]")


def word_tokenize(text: str) -> list[str]:
    return _PATTERN.findall(text)
