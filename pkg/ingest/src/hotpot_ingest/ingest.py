"""Raw HotpotQA distractor JSON -> canonical annotated JSONL.

Per example: keep the two gold paragraphs named by the supporting facts,
tokenize sentences, annotate entities and coreference, locate the answer span
by approximate matching (or flag yes/no), and emit one canonical record.
Examples that cannot be converted are dropped with a logged reason; the drop
report and a `<out>.meta.json` sidecar carry the pinned annotator/tokenizer
versions and thresholds for the run.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .annotate import get_annotator
from .spans import LENGTH_WINDOW, SIMILARITY_THRESHOLD, find_answer_span
from .tokenize import TOKENIZER_VERSION, word_tokenize


@dataclass
class DropReport:
    annotator: dict
    input_count: int = 0
    emitted: int = 0
    dropped: list = field(default_factory=list)

    def drop(self, example_id: str, reason: str) -> None:
        self.dropped.append({"id": example_id, "reason": reason})

    def to_dict(self) -> dict:
        return {
            "input": self.input_count,
            "emitted": self.emitted,
            "dropped": self.dropped,
            "drop_count": len(self.dropped),
            "annotator": self.annotator,
        }


class ConversionError(Exception):
    """Non-convertible example; the message is the drop reason."""


def run_metadata(annotator) -> dict:
    return {
        "annotator": annotator.name,
        "annotator_version": annotator.version,
        "tokenizer_version": TOKENIZER_VERSION,
        "similarity_threshold": SIMILARITY_THRESHOLD,
        "length_window": LENGTH_WINDOW,
    }


def _gold_paragraphs(raw: dict) -> list[tuple[str, list[str]]]:
    gold_titles = []
    for title, _idx in raw.get("supporting_facts", []):
        if title not in gold_titles:
            gold_titles.append(title)
    if len(gold_titles) != 2:
        raise ConversionError(
            f"expected 2 gold paragraph titles from supporting facts, got {len(gold_titles)}"
        )
    by_title = {title: sentences for title, sentences in raw.get("context", [])}
    paragraphs = []
    for title in sorted(gold_titles, key=lambda t: _context_order(raw, t)):
        if title not in by_title:
            raise ConversionError(f"gold paragraph {title!r} missing from context")
        paragraphs.append((title, by_title[title]))
    return paragraphs


def _context_order(raw: dict, title: str) -> int:
    for position, (candidate, _sentences) in enumerate(raw.get("context", [])):
        if candidate == title:
            return position
    return len(raw.get("context", []))


def convert_example(raw: dict, annotator) -> dict:
    """One raw example -> one canonical record. Raises ConversionError on drops."""
    example_id = str(raw.get("_id", "?"))
    question_tokens = word_tokenize(raw.get("question", ""))
    if not question_tokens:
        raise ConversionError("question is empty after tokenization")
    qtype = raw.get("type")
    level = raw.get("level")
    if qtype not in ("bridge", "comparison"):
        raise ConversionError(f"unsupported question type {qtype!r}")
    if level not in ("easy", "medium", "hard"):
        raise ConversionError(f"unsupported level {level!r}")

    paragraphs = _gold_paragraphs(raw)
    documents = []
    # raw sentence index -> post-tokenization index (empty sentences vanish)
    index_maps: list[dict[int, int]] = []
    for title, raw_sentences in paragraphs:
        sentences = []
        index_map: dict[int, int] = {}
        for raw_idx, sentence in enumerate(raw_sentences):
            tokens = word_tokenize(sentence)
            if tokens:
                index_map[raw_idx] = len(sentences)
                sentences.append(tokens)
        if not sentences:
            raise ConversionError(f"gold paragraph {title!r} has no usable sentences")
        documents.append({"title": title, "sentences": sentences})
        index_maps.append(index_map)

    title_to_doc = {doc["title"]: d for d, doc in enumerate(documents)}
    facts = set()
    for title, sentence_idx in raw.get("supporting_facts", []):
        doc = title_to_doc[title]
        mapped = index_maps[doc].get(sentence_idx)
        if mapped is None:
            raise ConversionError(
                f"supporting fact ({title!r}, {sentence_idx}) points at a "
                "missing or empty sentence"
            )
        facts.add((doc, mapped))

    answer_text = str(raw.get("answer", "")).strip()
    if not answer_text:
        raise ConversionError("empty answer")
    if answer_text.lower() in ("yes", "no") and qtype == "comparison":
        answer = {"kind": answer_text.lower()}
    else:
        match = find_answer_span(
            [doc["sentences"] for doc in documents], word_tokenize(answer_text)
        )
        if match is None:
            raise ConversionError(
                f"no span with similarity >= {SIMILARITY_THRESHOLD} for answer "
                f"{answer_text!r}"
            )
        answer = {"kind": "span", "doc": match.doc, "sentence": match.sentence,
                  "start": match.start, "end": match.end}

    entities = []
    coref = []
    for d, doc in enumerate(documents):
        mentions = annotator.entity_mentions(doc["sentences"])
        entities.extend(
            {"doc": d, "sentence": m.sentence, "start": m.start, "end": m.end,
             "label": m.label, "norm": m.norm}
            for m in mentions
        )
        clusters = annotator.coref_clusters(doc["sentences"], mentions)
        if clusters:
            coref.append({
                "doc": d,
                "clusters": [
                    [{"sentence": s, "start": start, "end": end}
                     for s, start, end in cluster]
                    for cluster in clusters
                ],
            })

    return {
        "id": example_id,
        "documents": documents,
        "answer": answer,
        "question": question_tokens,
        "supporting_facts": sorted(list(f) for f in facts),
        "qtype": qtype,
        "level": level,
        "entities": entities,
        "coref": coref,
    }


def _convert_with_annotator(args):
    raw, annotator_name = args
    annotator = get_annotator(annotator_name)
    try:
        return ("ok", convert_example(raw, annotator))
    except ConversionError as exc:
        return ("drop", {"id": str(raw.get("_id", "?")), "reason": str(exc)})


def ingest_file(raw_path, out_path, annotator_name: str = "rule",
                workers: int = 1) -> DropReport:
    """Convert a raw file; write canonical JSONL, drop report data, and the
    version sidecar. Output order follows input order even with workers > 1."""
    raw_examples = json.loads(Path(raw_path).read_text(encoding="utf-8"))
    if not isinstance(raw_examples, list):
        raise ConversionError("raw file must hold a JSON array of examples")
    annotator = get_annotator(annotator_name)
    report = DropReport(annotator=run_metadata(annotator))
    report.input_count = len(raw_examples)

    jobs = [(raw, annotator_name) for raw in raw_examples]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_convert_with_annotator, jobs))
    else:
        outcomes = [_convert_with_annotator(job) for job in jobs]

    out_path = Path(out_path)
    with open(out_path, "w", encoding="utf-8") as fh:
        for status, payload in outcomes:
            if status == "ok":
                fh.write(json.dumps(payload, ensure_ascii=False) + "\n")
                report.emitted += 1
            else:
                report.drop(payload["id"], payload["reason"])
    sidecar = out_path.with_name(out_path.name + ".meta.json")
    sidecar.write_text(json.dumps(run_metadata(annotator), indent=1) + "\n",
                       encoding="utf-8")
    return report
