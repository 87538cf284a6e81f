"""Templated two-document corpora with bridge entities, for desk-scale runs.

Each generated example pairs a person document with an institution document;
the institution name is the bridge entity occurring in both. Questions ask for
the person via the institution, so answering requires both documents. The
generator also emits entity mentions, one coreference cluster, and supporting
facts, giving the graph builder realistic structure.

`long_easy_fraction` mixes in easy-level examples with very long questions to
reproduce the length-distribution mismatch that motivates the 30-word filter.
"""

from __future__ import annotations

import random

from .corpus import AnnotatedExample, Answer, CorefSpan, Document, EntityMention

FIRST = ("amara", "boris", "clara", "dmitri", "elena", "farid",
         "greta", "hiro", "ines", "jonas", "karim", "lena")
LAST = ("abbott", "bergman", "castillo", "duval", "eriksen", "fontana",
        "gershwin", "holt", "ivanov", "jansen", "kovacs", "larsen")
PROFESSION = ("banker", "chemist", "painter", "engineer", "historian",
              "botanist", "composer", "surgeon")
PLACE = ("aldenport", "bruckvale", "cedarholm", "dunmere", "eastgrove",
         "fairhaven", "glenbrook", "harwick", "ironfield", "jarrowdale")
FIELD = ("astronomy", "medicine", "commerce", "letters", "mining",
         "forestry", "navigation", "printing")
ADJ = ("royal", "northern", "central", "pacific", "imperial",
       "western", "maritime", "highland")
KIND = ("research", "technical", "public", "private")
WEATHER = ("rainy", "foggy", "windy", "mild")


def _institution(rng: random.Random) -> tuple[str, ...]:
    return (rng.choice(ADJ), "institute", "of", rng.choice(FIELD))


def _bridge_example(index: int, rng: random.Random, long_question: bool) -> AnnotatedExample:
    first, last = rng.choice(FIRST), rng.choice(LAST)
    person = (first, last)
    inst = _institution(rng)
    profession = rng.choice(PROFESSION)
    place = rng.choice(PLACE)
    place2 = rng.choice([p for p in PLACE if p != place])
    kind = rng.choice(KIND)
    year = str(rng.randint(1860, 1929))

    doc1 = Document(
        title=" ".join(person),
        sentences=(
            person + ("was", "a", profession, "from", place, "."),
            person + ("founded", "the") + inst + ("in", year, "."),
            ("the", "weather", "in", place, "is", "often", rng.choice(WEATHER), "."),
        ),
    )
    doc2 = Document(
        title=" ".join(inst),
        sentences=(
            ("the",) + inst + ("is", "a", kind, "school", "in", place2, "."),
            ("it", "helps", "students", "learn", inst[3], "."),
            ("many", "people", "visit", place2, "every", "year", "."),
        ),
    )

    if long_question:
        filler = ("i", "would", "like", "to", "know", ",", "after", "reading",
                  "both", "documents", "very", "carefully", ",")
        question = filler * 5 + ("which", profession, "founded", "the", kind,
                                 "school", "in", place2, "?")
    else:
        question = ("which", profession, "founded", "the", kind,
                    "school", "in", place2, "?")

    inst_norm = " ".join(inst)
    mentions = (
        EntityMention(0, 0, 0, 2, "PERSON", f"{first} {last}"),
        EntityMention(0, 0, 5, 6, "GPE", place),
        EntityMention(0, 1, 0, 2, "PERSON", f"{first} {last}"),
        EntityMention(0, 1, 3, 7, "ORG", inst_norm),
        EntityMention(1, 0, 1, 5, "ORG", inst_norm),
        EntityMention(1, 0, 9, 10, "GPE", place2),
        EntityMention(1, 2, 3, 4, "GPE", place2),
    )
    coref = (
        (),  # doc 0: no clusters
        ((CorefSpan(0, 1, 5), CorefSpan(1, 0, 1)),),  # institute ... it
    )
    return AnnotatedExample(
        id=f"syn-{index:04d}",
        documents=(doc1, doc2),
        answer=Answer(kind="span", doc=0, sentence=0, start=0, end=2),
        question=question,
        supporting_facts=frozenset({(0, 1), (1, 0)}),
        qtype="bridge",
        level="easy" if long_question else rng.choice(("medium", "hard")),
        entity_mentions=mentions,
        coref_clusters=coref,
    )


def _comparison_example(index: int, rng: random.Random) -> AnnotatedExample:
    first, last = rng.choice(FIRST), rng.choice(LAST)
    other = rng.choice([f for f in FIRST if f != first])
    profession = rng.choice(PROFESSION)
    other_prof = rng.choice([p for p in PROFESSION if p != profession])
    place, place2 = rng.sample(list(PLACE), 2)
    same = rng.random() < 0.5

    doc1 = Document(
        title=f"{first} {last}",
        sentences=(
            (first, last, "was", "a", profession, "from", place, "."),
            ("the", "town", "of", place, "is", "small", "."),
        ),
    )
    doc2 = Document(
        title=f"{other} {last}",
        sentences=(
            (other, last, "was", "a", profession if same else other_prof,
             "from", place2, "."),
            ("few", "records", "about", other, "survive", "."),
        ),
    )
    question = ("were", first, last, "and", other, last, "both",
                profession + "s", "?")
    mentions = (
        EntityMention(0, 0, 0, 2, "PERSON", f"{first} {last}"),
        EntityMention(0, 1, 3, 4, "GPE", place),
        EntityMention(1, 0, 0, 2, "PERSON", f"{other} {last}"),
        EntityMention(1, 1, 3, 4, "PERSON", other),
    )
    return AnnotatedExample(
        id=f"syn-{index:04d}",
        documents=(doc1, doc2),
        answer=Answer(kind="yes" if same else "no"),
        question=question,
        supporting_facts=frozenset({(0, 0), (1, 0)}),
        qtype="comparison",
        level=rng.choice(("medium", "hard")),
        entity_mentions=mentions,
        coref_clusters=((), ()),
    )


def make_corpus(
    n: int,
    seed: int = 0,
    comparison_fraction: float = 0.0,
    long_easy_fraction: float = 0.0,
) -> list[AnnotatedExample]:
    rng = random.Random(seed)
    examples = []
    for i in range(n):
        draw = rng.random()
        if draw < long_easy_fraction:
            examples.append(_bridge_example(i, rng, long_question=True))
        elif draw < long_easy_fraction + comparison_fraction:
            examples.append(_comparison_example(i, rng))
        else:
            examples.append(_bridge_example(i, rng, long_question=False))
    return examples


def corpus_token_pool(examples) -> list[list[str]]:
    """Token sequences (contexts + questions) for vocabulary building."""
    pool = []
    for ex in examples:
        for doc in ex.documents:
            for sentence in doc.sentences:
                pool.append(list(sentence))
        pool.append(list(ex.question))
    pool.append(["yes", "no"])
    return pool
