"""Annotation pipeline: named-entity mentions and coreference clusters.

The default annotator is a deterministic rule system with a pinned version
string, so two runs over the same input are byte-identical. The interface is
small enough that a statistical pipeline (e.g. a Spacy model, when its weights
are available) can be slotted in behind the same two methods; the annotator
name and version are recorded with every ingested file.
"""

from __future__ import annotations

from dataclasses import dataclass

RULE_ANNOTATOR_VERSION = "rule-annotator-1.0.0"

# connectors allowed inside a capitalized run ("University of Toronto")
_CONNECTORS = {"of", "the", "and", "for", "de", "la"}
# capitalized tokens that never open a mention
_STOP_CAPS = {
    "The", "A", "An", "It", "He", "She", "They", "We", "I", "You", "This",
    "That", "These", "Those", "In", "On", "At", "By", "From", "For", "With",
    "As", "After", "Before", "While", "When", "Where", "Which", "Who", "Whose",
    "However", "Although", "Originally", "Its", "His", "Her", "Their",
}
_ORG_MARKERS = {
    "university", "institute", "college", "bank", "company", "corporation",
    "school", "museum", "gallery", "church", "society", "academy", "orchestra",
    "press", "foundation", "club", "league",
}
_GPE_MARKERS = {
    "city", "county", "province", "state", "republic", "kingdom", "island",
    "islands", "valley", "bay",
}
_MONTHS = {
    "january", "february", "march", "april", "may", "june", "july", "august",
    "september", "october", "november", "december",
}
_PRONOUN_TARGETS = {
    "he": ("PERSON",),
    "she": ("PERSON",),
    "it": ("ORG", "GPE", "MISC", "DATE"),
    "they": ("ORG", "PERSON", "GPE", "MISC"),
}


@dataclass(frozen=True)
class Mention:
    sentence: int
    start: int
    end: int
    label: str
    norm: str


def _is_capitalized(token: str) -> bool:
    return token[:1].isupper() and any(c.isalpha() for c in token)


def _classify(tokens: list[str]) -> str:
    lowered = [t.lower() for t in tokens]
    if any(t in _ORG_MARKERS for t in lowered):
        return "ORG"
    if any(t in _GPE_MARKERS for t in lowered):
        return "GPE"
    if any(t in _MONTHS for t in lowered) or any(t.isdigit() and len(t) == 4 for t in tokens):
        return "DATE"
    if 2 <= len([t for t in tokens if t.lower() not in _CONNECTORS]) <= 3:
        return "PERSON"
    return "MISC"


class RuleAnnotator:
    """Capitalization/gazetteer NER plus surface-match and pronoun coreference."""

    name = "rule"
    version = RULE_ANNOTATOR_VERSION

    def entity_mentions(self, sentences: list[list[str]]) -> list[Mention]:
        mentions = []
        for s, tokens in enumerate(sentences):
            i = 0
            while i < len(tokens):
                if not _is_capitalized(tokens[i]) or tokens[i] in _STOP_CAPS:
                    i += 1
                    continue
                j = i + 1
                while j < len(tokens):
                    if _is_capitalized(tokens[j]) and tokens[j] not in _STOP_CAPS:
                        j += 1
                    elif (tokens[j].lower() in _CONNECTORS and j + 1 < len(tokens)
                          and _is_capitalized(tokens[j + 1])
                          and tokens[j + 1] not in _STOP_CAPS):
                        j += 2
                    else:
                        break
                span = tokens[i:j]
                mentions.append(Mention(
                    sentence=s, start=i, end=j,
                    label=_classify(span),
                    norm=" ".join(t.casefold() for t in span),
                ))
                i = j
            # years outside capitalized runs
            for k, token in enumerate(tokens):
                if token.isdigit() and len(token) == 4 and not any(
                    m.sentence == s and m.start <= k < m.end for m in mentions
                ):
                    mentions.append(Mention(s, k, k + 1, "DATE", token))
        mentions.sort(key=lambda m: (m.sentence, m.start, m.end))
        return mentions

    def coref_clusters(self, sentences: list[list[str]],
                       mentions: list[Mention]) -> list[list[tuple[int, int, int]]]:
        """Clusters of (sentence, start, end) spans within one document."""
        by_norm: dict[str, list[Mention]] = {}
        for m in mentions:
            by_norm.setdefault(m.norm, []).append(m)

        clusters: dict[str, list[tuple[int, int, int]]] = {}
        for norm, group in sorted(by_norm.items()):
            if len(group) >= 2:
                clusters[norm] = [(m.sentence, m.start, m.end) for m in group]

        ordered = sorted(mentions, key=lambda m: (m.sentence, m.start))
        for s, tokens in enumerate(sentences):
            for i, token in enumerate(tokens):
                targets = _PRONOUN_TARGETS.get(token.lower())
                if targets is None:
                    continue
                antecedent = None
                for m in ordered:
                    if (m.sentence, m.start) >= (s, i):
                        break
                    if m.label in targets:
                        antecedent = m
                if antecedent is None:
                    continue
                key = antecedent.norm
                clusters.setdefault(
                    key, [(antecedent.sentence, antecedent.start, antecedent.end)]
                )
                clusters[key].append((s, i, i + 1))

        result = []
        for _norm, spans in sorted(clusters.items()):
            unique = sorted(set(spans))
            if len(unique) >= 2:
                result.append(unique)
        return result


ANNOTATORS = {"rule": RuleAnnotator}


def get_annotator(name: str) -> RuleAnnotator:
    try:
        return ANNOTATORS[name]()
    except KeyError:
        raise ValueError(
            f"unknown annotator {name!r}; available: {sorted(ANNOTATORS)}"
        )
