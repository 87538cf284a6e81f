"""Unit coverage: tokenizer, span matcher, rule annotator, conversion."""

import pytest

from hotpot_ingest import (
    ConversionError,
    convert_example,
    edit_similarity,
    find_answer_span,
    get_annotator,
    levenshtein,
    word_tokenize,
)
from hotpot_ingest.annotate import RuleAnnotator


class TestTokenizer:
    def test_words_and_punctuation(self):
        assert word_tokenize("Dr Elena Hart, 1889.") == \
            ["Dr", "Elena", "Hart", ",", "1889", "."]

    def test_keeps_internal_apostrophes_and_hyphens(self):
        assert word_tokenize("O'Brien's multi-hop test") == \
            ["O'Brien's", "multi-hop", "test"]

    def test_abbreviation_dots_split(self):
        assert word_tokenize("U.S. grew") == ["U", ".", "S", ".", "grew"]

    def test_empty(self):
        assert word_tokenize("   ") == []


class TestEditSimilarity:
    def test_levenshtein_known_values(self):
        assert levenshtein("kitten", "sitting") == 3
        assert levenshtein("", "abc") == 3
        assert levenshtein("same", "same") == 0

    def test_similarity_bounds(self):
        assert edit_similarity("abc", "abc") == 1.0
        assert edit_similarity("", "") == 1.0
        assert edit_similarity("abcd", "wxyz") == 0.0

    def test_colour_color(self):
        sim = edit_similarity("the colour of magic", "the color of magic")
        assert abs(sim - (1 - 1 / 19)) < 1e-12


class TestFindAnswerSpan:
    DOCS = [
        [["Elena", "Vasquez", "was", "a", "chemist", "."],
         ["She", "founded", "the", "Royal", "Institute", "."]],
        [["The", "Royal", "Institute", "is", "in", "Aldenport", "."]],
    ]

    def test_exact_match(self):
        match = find_answer_span(self.DOCS, ["Elena", "Vasquez"])
        assert (match.doc, match.sentence, match.start, match.end) == (0, 0, 0, 2)
        assert match.similarity == 1.0

    def test_exact_match_earliest_occurrence(self):
        match = find_answer_span(self.DOCS, ["Royal", "Institute"])
        assert (match.doc, match.sentence) == (0, 1)

    def test_approximate_within_threshold(self):
        match = find_answer_span(self.DOCS, ["Elena", "Vasquez", "."])
        assert match is not None and match.similarity < 1.0
        assert (match.doc, match.sentence, match.start) == (0, 0, 0)

    def test_below_threshold_returns_none(self):
        assert find_answer_span(self.DOCS, ["completely", "unrelated", "words"]) is None

    def test_window_respected(self):
        # answer of 1 token can only match spans of length 1..3
        match = find_answer_span(self.DOCS, ["Aldenport"])
        assert match.end - match.start == 1


class TestRuleAnnotator:
    def test_mentions_with_connector(self):
        annotator = RuleAnnotator()
        sentences = [word_tokenize("Elena Vasquez founded the Royal Institute of Commerce in 1884.")]
        mentions = annotator.entity_mentions(sentences)
        surfaces = {m.norm: m.label for m in mentions}
        assert surfaces["elena vasquez"] == "PERSON"
        assert surfaces["royal institute of commerce"] == "ORG"
        assert surfaces["1884"] == "DATE"

    def test_stop_capitals_not_mentions(self):
        annotator = RuleAnnotator()
        mentions = annotator.entity_mentions([word_tokenize("He moved away.")])
        assert mentions == []

    def test_surface_match_coreference(self):
        annotator = RuleAnnotator()
        sentences = [
            word_tokenize("Elena Vasquez was a chemist."),
            word_tokenize("Elena Vasquez founded a school."),
        ]
        mentions = annotator.entity_mentions(sentences)
        clusters = annotator.coref_clusters(sentences, mentions)
        assert [(0, 0, 2), (1, 0, 2)] in clusters

    def test_pronoun_links_to_nearest_person(self):
        annotator = RuleAnnotator()
        sentences = [
            word_tokenize("Elena Vasquez was a chemist."),
            word_tokenize("She founded a school."),
        ]
        mentions = annotator.entity_mentions(sentences)
        clusters = annotator.coref_clusters(sentences, mentions)
        assert any((1, 0, 1) in cluster and (0, 0, 2) in cluster
                   for cluster in clusters)

    def test_deterministic(self):
        annotator = RuleAnnotator()
        sentences = [word_tokenize("The Pacific Institute of Forestry is in Dunmere.")]
        first = annotator.entity_mentions(sentences)
        second = annotator.entity_mentions(sentences)
        assert first == second

    def test_unknown_annotator_rejected(self):
        with pytest.raises(ValueError):
            get_annotator("statistical")


RAW = {
    "_id": "x1",
    "question": "Which chemist founded the Royal Institute?",
    "answer": "Elena Vasquez",
    "supporting_facts": [["Elena Vasquez", 0], ["Royal Institute", 0]],
    "context": [
        ["Elena Vasquez", ["Elena Vasquez was a chemist.",
                           "She founded the Royal Institute."]],
        ["Noise", ["Nothing relevant here."]],
        ["Royal Institute", ["The Royal Institute is in Aldenport."]],
    ],
    "type": "bridge",
    "level": "medium",
}


class TestConvertExample:
    def test_gold_selection_preserves_context_order(self):
        record = convert_example(RAW, RuleAnnotator())
        assert [d["title"] for d in record["documents"]] == \
            ["Elena Vasquez", "Royal Institute"]

    def test_answer_span_found(self):
        record = convert_example(RAW, RuleAnnotator())
        answer = record["answer"]
        assert answer["kind"] == "span"
        doc = record["documents"][answer["doc"]]
        tokens = doc["sentences"][answer["sentence"]][answer["start"]:answer["end"]]
        assert tokens == ["Elena", "Vasquez"]

    def test_supporting_facts_remapped(self):
        record = convert_example(RAW, RuleAnnotator())
        assert record["supporting_facts"] == [[0, 0], [1, 0]]

    def test_empty_sentences_remap_indices(self):
        raw = dict(RAW)
        raw["context"] = [
            ["Elena Vasquez", ["", "Elena Vasquez was a chemist.",
                               "She founded the Royal Institute."]],
            ["Royal Institute", ["The Royal Institute is in Aldenport."]],
        ]
        raw["supporting_facts"] = [["Elena Vasquez", 1], ["Royal Institute", 0]]
        record = convert_example(raw, RuleAnnotator())
        assert record["supporting_facts"] == [[0, 0], [1, 0]]
        assert len(record["documents"][0]["sentences"]) == 2

    def test_supporting_fact_on_empty_sentence_drops(self):
        raw = dict(RAW)
        raw["context"] = [
            ["Elena Vasquez", ["", "Elena Vasquez was a chemist."]],
            ["Royal Institute", ["The Royal Institute is in Aldenport."]],
        ]
        raw["supporting_facts"] = [["Elena Vasquez", 0], ["Royal Institute", 0]]
        with pytest.raises(ConversionError, match="empty sentence"):
            convert_example(raw, RuleAnnotator())

    def test_missing_gold_paragraph_drops(self):
        raw = dict(RAW)
        raw["context"] = [c for c in RAW["context"] if c[0] != "Royal Institute"]
        with pytest.raises(ConversionError, match="missing from context"):
            convert_example(raw, RuleAnnotator())

    def test_unmatchable_answer_drops(self):
        raw = dict(RAW)
        raw["answer"] = "phlogiston accumulator"
        with pytest.raises(ConversionError, match="similarity"):
            convert_example(raw, RuleAnnotator())

    def test_yes_requires_comparison_type(self):
        raw = dict(RAW)
        raw["answer"] = "yes"
        # bridge qtype: "yes" is treated as a span answer and will not match
        with pytest.raises(ConversionError):
            convert_example(raw, RuleAnnotator())
