"""Model-ready sequences: concatenated documents with sentence separators,
answer type ids, supporting-fact labels, and <bos>/<eos>-framed decoder sides.

Every sentence is followed by one <sep> token (a single tied embedding id);
answer-span tokens carry type id 1, everything else 0. Yes/no answers are
appended to the context as a final one-token sentence with its own <sep>,
marked with type id 1. Overlong contexts shrink by whole sentences from the
end, never touching the answer sentence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import AnnotatedExample, Answer
from .errors import AlignmentError, ConfigError
from .tokenizer import BOS_ID, EOS_ID, SEP_ID, Vocabulary

# sep_sentences entry for the appended yes/no pseudo-sentence
APPENDED = (-1, -1)


@dataclass
class EncodedInput:
    example: AnnotatedExample  # post-truncation view feeding this encoding
    encoder_ids: list[int]
    type_ids: list[int]
    sep_positions: list[int]
    sep_sentences: list[tuple[int, int]]  # (doc, sentence) per sep; APPENDED for yes/no
    sf_labels: list[int]
    decoder_input_ids: list[int]
    decoder_target_ids: list[int]
    # (doc, sentence) -> per-word half-open token spans in the encoder sequence
    word_spans: dict = field(default_factory=dict)

    def sep_position(self, doc: int, sentence: int) -> int:
        return self.sep_positions[self.sep_sentences.index((doc, sentence))]

    def word_span(self, doc: int, sentence: int, start: int, stop: int) -> tuple[int, int]:
        spans = self.word_spans[(doc, sentence)]
        return spans[start][0], spans[stop - 1][1]

    @property
    def encoder_len(self) -> int:
        return len(self.encoder_ids)

    @property
    def source_token_count(self) -> int:
        return len(self.encoder_ids)

    @property
    def target_token_count(self) -> int:
        return len(self.decoder_target_ids)


def truncate_example(example: AnnotatedExample, vocabulary: Vocabulary,
                     max_encoder_len: int) -> AnnotatedExample:
    """Drop whole sentences from the end until the encoding fits.

    The answer sentence is never dropped; mentions, coreference spans, and
    supporting facts in dropped sentences are removed with them. Sentence
    indices of surviving sentences are unchanged because removal is only from
    the tail of each document (scanning backwards from the last document).
    """
    piece_counts = {}
    total = 0
    for d, doc in enumerate(example.documents):
        for s, sentence in enumerate(doc.sentences):
            n = sum(len(vocabulary.segment_word(w)) for w in sentence) + 1  # + <sep>
            piece_counts[(d, s)] = n
            total += n
    if example.answer.kind in ("yes", "no"):
        total += 2  # answer token + its <sep>
    if total <= max_encoder_len:
        return example

    keep = {key: True for key in piece_counts}
    order = sorted(piece_counts, reverse=True)  # last document's last sentence first
    answer_key = (
        (example.answer.doc, example.answer.sentence) if example.answer.is_span else None
    )
    for key in order:
        if total <= max_encoder_len:
            break
        if key == answer_key:
            continue
        d, _s = key
        kept_in_doc = sum(1 for (kd, _ks), v in keep.items() if kd == d and v)
        if kept_in_doc <= 1:
            continue  # a document must keep at least one sentence
        keep[key] = False
        total -= piece_counts[key]
    if total > max_encoder_len:
        raise ConfigError(
            f"cannot truncate example {example.id} to {max_encoder_len} tokens "
            "without cutting the answer sentence"
        )

    documents = []
    for d, doc in enumerate(example.documents):
        kept_sentences = tuple(
            s for i, s in enumerate(doc.sentences) if keep[(d, i)]
        )
        documents.append(type(doc)(title=doc.title, sentences=kept_sentences))
    mentions = tuple(
        m for m in example.entity_mentions if keep[(m.doc, m.sentence)]
    )
    coref = tuple(
        tuple(
            pruned for cluster in clusters
            if len(pruned := tuple(s for s in cluster if keep[(d, s.sentence)])) >= 2
        )
        for d, clusters in enumerate(example.coref_clusters)
    )
    facts = frozenset(sf for sf in example.supporting_facts if keep[sf])
    return AnnotatedExample(
        id=example.id,
        documents=tuple(documents),
        answer=example.answer,
        question=example.question,
        supporting_facts=facts,
        qtype=example.qtype,
        level=example.level,
        entity_mentions=mentions,
        coref_clusters=coref,
    )


def encode_example(example: AnnotatedExample, vocabulary: Vocabulary,
                   max_encoder_len: int | None = None,
                   answer_mode: str = "type_ids") -> EncodedInput:
    """answer_mode "type_ids" marks the span in place (the supported mode);
    "concat" instead appends the answer tokens after the context behind a
    <sep> delimiter with all type ids zero, kept only so the weaker baseline
    direction can be reproduced."""
    if answer_mode not in ("type_ids", "concat"):
        raise ConfigError(f"answer_mode must be type_ids or concat, got {answer_mode}")
    if max_encoder_len is not None:
        example = truncate_example(example, vocabulary, max_encoder_len)

    encoder_ids: list[int] = []
    type_ids: list[int] = []
    sep_positions: list[int] = []
    sep_sentences: list[tuple[int, int]] = []
    word_spans: dict = {}

    answer = example.answer
    for d, doc in enumerate(example.documents):
        for s, sentence in enumerate(doc.sentences):
            spans = []
            for w, word in enumerate(sentence):
                pieces = vocabulary.segment_word(word)
                if not pieces:
                    raise AlignmentError(
                        f"word {word!r} (doc {d}, sentence {s}) produced no pieces"
                    )
                start = len(encoder_ids)
                encoder_ids.extend(pieces)
                in_answer = (
                    answer_mode == "type_ids"
                    and answer.is_span and answer.doc == d and answer.sentence == s
                    and answer.start <= w < answer.end
                )
                type_ids.extend([1 if in_answer else 0] * len(pieces))
                spans.append((start, len(encoder_ids)))
            word_spans[(d, s)] = spans
            sep_positions.append(len(encoder_ids))
            sep_sentences.append((d, s))
            encoder_ids.append(SEP_ID)
            type_ids.append(0)

    if answer.kind in ("yes", "no"):
        encoder_ids.append(vocabulary.id_of(answer.kind))
        type_ids.append(1 if answer_mode == "type_ids" else 0)
        sep_positions.append(len(encoder_ids))
        sep_sentences.append(APPENDED)
        encoder_ids.append(SEP_ID)
        type_ids.append(0)
    elif answer_mode == "concat":
        # the last sentence's <sep> serves as the context/answer delimiter
        answer_words = example.documents[answer.doc].sentences[answer.sentence][
            answer.start:answer.end
        ]
        for word in answer_words:
            encoder_ids.extend(vocabulary.segment_word(word))
        type_ids.extend([0] * (len(encoder_ids) - len(type_ids)))

    question_ids: list[int] = []
    for word in example.question:
        question_ids.extend(vocabulary.segment_word(word))

    encoded = EncodedInput(
        example=example,
        encoder_ids=encoder_ids,
        type_ids=type_ids,
        sep_positions=sep_positions,
        sep_sentences=sep_sentences,
        sf_labels=[],
        decoder_input_ids=[BOS_ID] + question_ids,
        decoder_target_ids=question_ids + [EOS_ID],
        word_spans=word_spans,
    )
    encoded.sf_labels = sf_labels(example, encoded)
    return encoded


def sf_labels(example: AnnotatedExample, encoded: EncodedInput) -> list[int]:
    """0/1 per sep position: 1 iff that sentence is an annotated supporting fact.

    The appended yes/no pseudo-sentence is never a supporting fact.
    """
    return [
        1 if key in example.supporting_facts else 0
        for key in encoded.sep_sentences
    ]
