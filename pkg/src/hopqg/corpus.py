"""Canonical data model: annotated examples, validation, filtering, splits, stats.

Storage is line-delimited JSON, one record per line. The full record schema
with every field and invariant is documented in schema/record-schema.md at the
repository root; this module's validator is the executable form of that
document.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, ValidationError

QTYPES = ("bridge", "comparison")
LEVELS = ("easy", "medium", "hard")
ANSWER_KINDS = ("span", "yes", "no")


@dataclass(frozen=True)
class Document:
    title: str
    sentences: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class Answer:
    kind: str  # span | yes | no
    doc: int | None = None
    sentence: int | None = None
    start: int | None = None
    end: int | None = None

    @property
    def is_span(self) -> bool:
        return self.kind == "span"


@dataclass(frozen=True)
class EntityMention:
    doc: int
    sentence: int
    start: int
    end: int
    label: str
    norm: str


@dataclass(frozen=True)
class CorefSpan:
    sentence: int
    start: int
    end: int


@dataclass(frozen=True)
class AnnotatedExample:
    id: str
    documents: tuple[Document, ...]
    answer: Answer
    question: tuple[str, ...]
    supporting_facts: frozenset[tuple[int, int]]
    qtype: str
    level: str
    entity_mentions: tuple[EntityMention, ...] = ()
    # coref_clusters[d] is the cluster list for document d; each cluster is a
    # tuple of CorefSpan.
    coref_clusters: tuple[tuple[tuple[CorefSpan, ...], ...], ...] = ()

    def question_word_count(self) -> int:
        return len(" ".join(self.question).split())

    def sentence_count(self) -> int:
        return sum(len(doc.sentences) for doc in self.documents)


# --------------------------------------------------------------------------
# JSON (de)serialization
# --------------------------------------------------------------------------


def example_to_record(ex: AnnotatedExample) -> dict:
    record = {
        "id": ex.id,
        "documents": [
            {"title": d.title, "sentences": [list(s) for s in d.sentences]}
            for d in ex.documents
        ],
        "answer": {"kind": ex.answer.kind},
        "question": list(ex.question),
        "supporting_facts": sorted([list(sf) for sf in ex.supporting_facts]),
        "qtype": ex.qtype,
        "level": ex.level,
        "entities": [
            {
                "doc": m.doc,
                "sentence": m.sentence,
                "start": m.start,
                "end": m.end,
                "label": m.label,
                "norm": m.norm,
            }
            for m in ex.entity_mentions
        ],
        "coref": [
            {
                "doc": d,
                "clusters": [
                    [
                        {"sentence": s.sentence, "start": s.start, "end": s.end}
                        for s in cluster
                    ]
                    for cluster in clusters
                ],
            }
            for d, clusters in enumerate(ex.coref_clusters)
            if clusters
        ],
    }
    if ex.answer.is_span:
        record["answer"].update(
            doc=ex.answer.doc,
            sentence=ex.answer.sentence,
            start=ex.answer.start,
            end=ex.answer.end,
        )
    return record


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


def example_from_record(record: dict) -> AnnotatedExample:
    """Parse and validate one record; raises ValidationError on any breach."""
    _require(isinstance(record, dict), "record is not an object")
    for key in ("id", "documents", "answer", "question", "supporting_facts", "qtype", "level"):
        _require(key in record, f"missing field '{key}'")

    docs = []
    _require(
        isinstance(record["documents"], list) and len(record["documents"]) == 2,
        f"expected exactly 2 gold documents, got {len(record['documents']) if isinstance(record['documents'], list) else 'non-list'}",
    )
    for d, doc in enumerate(record["documents"]):
        sentences = doc.get("sentences")
        _require(isinstance(sentences, list) and len(sentences) >= 1,
                 f"document {d} has no sentences")
        for s, sent in enumerate(sentences):
            _require(isinstance(sent, list) and len(sent) >= 1,
                     f"document {d} sentence {s} is empty")
            _require(all(isinstance(t, str) and t for t in sent),
                     f"document {d} sentence {s} has a non-string or empty token")
        docs.append(Document(title=str(doc.get("title", "")),
                             sentences=tuple(tuple(s) for s in sentences)))
    docs = tuple(docs)

    def check_span(doc: int, sentence: int, start: int, end: int, what: str) -> None:
        _require(0 <= doc < len(docs), f"{what}: document index {doc} out of range")
        _require(0 <= sentence < len(docs[doc].sentences),
                 f"{what}: sentence index {sentence} out of range in document {doc}")
        length = len(docs[doc].sentences[sentence])
        _require(
            0 <= start < end <= length,
            f"{what}: span [{start}, {end}) outside sentence of length {length}",
        )

    raw_answer = record["answer"]
    _require(isinstance(raw_answer, dict) and raw_answer.get("kind") in ANSWER_KINDS,
             "answer.kind must be one of span|yes|no")
    if raw_answer["kind"] == "span":
        answer = Answer(
            kind="span",
            doc=raw_answer.get("doc"),
            sentence=raw_answer.get("sentence"),
            start=raw_answer.get("start"),
            end=raw_answer.get("end"),
        )
        _require(all(isinstance(v, int) for v in
                     (answer.doc, answer.sentence, answer.start, answer.end)),
                 "span answer requires integer doc/sentence/start/end")
        check_span(answer.doc, answer.sentence, answer.start, answer.end,
                   f"answer span (doc {answer.doc})")
    else:
        answer = Answer(kind=raw_answer["kind"])

    qtype = record["qtype"]
    _require(qtype in QTYPES, f"qtype must be one of {QTYPES}, got {qtype!r}")
    level = record["level"]
    _require(level in LEVELS, f"level must be one of {LEVELS}, got {level!r}")
    _require(answer.is_span or qtype == "comparison",
             "yes/no answers are only valid for comparison examples")

    question = record["question"]
    _require(isinstance(question, list) and len(question) >= 1
             and all(isinstance(t, str) and t for t in question),
             "question must be a non-empty token list")

    facts = set()
    for pair in record["supporting_facts"]:
        _require(isinstance(pair, list) and len(pair) == 2, "malformed supporting fact")
        d, s = pair
        _require(isinstance(d, int) and 0 <= d < len(docs),
                 f"supporting fact document index {d} out of range")
        _require(isinstance(s, int) and 0 <= s < len(docs[d].sentences),
                 f"supporting fact sentence index {s} out of range in document {d}")
        facts.add((d, s))

    mentions = []
    for m in record.get("entities", []):
        mention = EntityMention(
            doc=m["doc"], sentence=m["sentence"], start=m["start"], end=m["end"],
            label=str(m.get("label", "")), norm=str(m.get("norm", "")),
        )
        check_span(mention.doc, mention.sentence, mention.start, mention.end,
                   f"entity mention {m}")
        mentions.append(mention)

    clusters_by_doc = [[] for _ in docs]
    for entry in record.get("coref", []):
        d = entry["doc"]
        _require(isinstance(d, int) and 0 <= d < len(docs),
                 f"coref document index {d} out of range")
        for cluster in entry.get("clusters", []):
            spans = []
            for span in cluster:
                cs = CorefSpan(span["sentence"], span["start"], span["end"])
                check_span(d, cs.sentence, cs.start, cs.end, "coref span")
                spans.append(cs)
            clusters_by_doc[d].append(tuple(spans))

    return AnnotatedExample(
        id=str(record["id"]),
        documents=docs,
        answer=answer,
        question=tuple(question),
        supporting_facts=frozenset(facts),
        qtype=qtype,
        level=level,
        entity_mentions=tuple(mentions),
        coref_clusters=tuple(tuple(c) for c in clusters_by_doc),
    )


def load_and_validate(path) -> list[AnnotatedExample]:
    """Load a JSONL corpus; validation failures carry the 1-based line number."""
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"not valid JSON: {exc}", line=lineno)
            try:
                examples.append(example_from_record(record))
            except ValidationError as exc:
                raise ValidationError(str(exc), line=lineno) from None
            except (KeyError, TypeError) as exc:
                raise ValidationError(f"malformed record: {exc!r}", line=lineno) from None
    return examples


def scan_violations(path) -> list[dict]:
    """Validate every line, collecting violations instead of stopping at the first.

    Returns [{"line": n, "error": message}, ...]; empty when the file is clean.
    """
    violations = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                example_from_record(json.loads(line))
            except json.JSONDecodeError as exc:
                violations.append({"line": lineno, "error": f"not valid JSON: {exc}"})
            except ValidationError as exc:
                violations.append({"line": lineno, "error": str(exc)})
            except (KeyError, TypeError) as exc:
                violations.append({"line": lineno, "error": f"malformed record: {exc!r}"})
    return violations


def save_examples(examples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(example_to_record(ex), ensure_ascii=False) + "\n")


# --------------------------------------------------------------------------
# Filtering / splitting / statistics
# --------------------------------------------------------------------------


@dataclass
class FilterReport:
    max_words: int
    kept: int = 0
    removed_by_level: dict = field(default_factory=dict)

    @property
    def removed(self) -> int:
        return sum(self.removed_by_level.values())

    def to_dict(self) -> dict:
        return {
            "max_words": self.max_words,
            "kept": self.kept,
            "removed": self.removed,
            "removed_by_level": dict(sorted(self.removed_by_level.items())),
        }


def filter_by_question_length(examples, max_words: int = 30):
    """Keep examples whose question has at most max_words whitespace words.

    Word counting is on the raw question text, independent of any subword
    segmentation, so the boundary is stable across tokenizers.
    """
    if max_words < 1:
        raise ConfigError(f"max_words must be >= 1, got {max_words}")
    report = FilterReport(max_words=max_words)
    kept = []
    for ex in examples:
        if ex.question_word_count() <= max_words:
            kept.append(ex)
            report.kept += 1
        else:
            report.removed_by_level[ex.level] = report.removed_by_level.get(ex.level, 0) + 1
    return kept, report


def split_reserve_dev(examples, n_dev: int = 500, seed: int = 0):
    """Seeded shuffle, then reserve the first n_dev examples as the dev set."""
    examples = list(examples)
    if n_dev >= len(examples):
        raise ConfigError(
            f"cannot reserve {n_dev} dev examples from {len(examples)} total"
        )
    order = list(range(len(examples)))
    random.Random(seed).shuffle(order)
    dev = [examples[i] for i in order[:n_dev]]
    train = [examples[i] for i in order[n_dev:]]
    return train, dev


@dataclass
class DatasetStats:
    n_examples: int
    question_length_hist: dict
    context_length_hist: dict
    sf_length_hist: dict
    mean_question_words: float
    mean_entity_mentions: float
    count_by_level: dict
    count_by_qtype: dict

    def to_dict(self) -> dict:
        return {
            "n_examples": self.n_examples,
            "question_length_hist": {str(k): v for k, v in sorted(self.question_length_hist.items())},
            "context_length_hist": {str(k): v for k, v in sorted(self.context_length_hist.items())},
            "sf_length_hist": {str(k): v for k, v in sorted(self.sf_length_hist.items())},
            "mean_question_words": self.mean_question_words,
            "mean_entity_mentions": self.mean_entity_mentions,
            "count_by_level": dict(sorted(self.count_by_level.items())),
            "count_by_qtype": dict(sorted(self.count_by_qtype.items())),
        }


def _non_overlapping_mentions(ex: AnnotatedExample) -> int:
    """Count mentions, skipping any that overlaps an already-counted one."""
    taken: list[EntityMention] = []
    for m in sorted(ex.entity_mentions, key=lambda m: (m.doc, m.sentence, m.start, m.end)):
        clash = any(
            t.doc == m.doc and t.sentence == m.sentence
            and t.start < m.end and m.start < t.end
            for t in taken
        )
        if not clash:
            taken.append(m)
    return len(taken)


def compute_stats(examples) -> DatasetStats:
    examples = list(examples)
    q_hist: Counter = Counter()
    ctx_hist: Counter = Counter()
    sf_hist: Counter = Counter()
    levels: Counter = Counter()
    qtypes: Counter = Counter()
    total_words = 0
    total_mentions = 0
    for ex in examples:
        words = ex.question_word_count()
        q_hist[words] += 1
        total_words += words
        ctx_len = sum(len(s) for d in ex.documents for s in d.sentences)
        ctx_hist[ctx_len] += 1
        sf_len = sum(
            len(ex.documents[d].sentences[s]) for d, s in ex.supporting_facts
        )
        sf_hist[sf_len] += 1
        levels[ex.level] += 1
        qtypes[ex.qtype] += 1
        total_mentions += _non_overlapping_mentions(ex)
    n = len(examples)
    return DatasetStats(
        n_examples=n,
        question_length_hist=dict(q_hist),
        context_length_hist=dict(ctx_hist),
        sf_length_hist=dict(sf_hist),
        mean_question_words=total_words / n if n else 0.0,
        mean_entity_mentions=total_mentions / n if n else 0.0,
        count_by_level=dict(levels),
        count_by_qtype=dict(qtypes),
    )
