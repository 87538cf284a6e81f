"""Raw HotpotQA distractor JSON to canonical annotated JSONL."""

from .annotate import RuleAnnotator, get_annotator
from .ingest import ConversionError, DropReport, convert_example, ingest_file
from .spans import SpanMatch, edit_similarity, find_answer_span, levenshtein
from .tokenize import word_tokenize
from .validate import ValidationReport, validate_against_schema

__all__ = [
    "ConversionError",
    "DropReport",
    "RuleAnnotator",
    "SpanMatch",
    "ValidationReport",
    "convert_example",
    "edit_similarity",
    "find_answer_span",
    "get_annotator",
    "ingest_file",
    "levenshtein",
    "validate_against_schema",
    "word_tokenize",
]
