"""Deterministic 25-example raw corpus in HotpotQA distractor format.

23 examples carry span answers (21 verbatim, 2 approximate with known target
spans); 2 are yes/no comparisons. Every example ships two gold paragraphs
plus distractor paragraphs that ingestion must discard.
"""

NAMES = ["Elena Vasquez", "Marcus Webb", "Priya Sharma", "Johan Lindqvist",
         "Amara Diallo", "Feng Liu", "Rosa Martinelli", "Derek Osei",
         "Ingrid Halvorsen", "Tomas Herrera", "Leila Nassar", "Viktor Brandt",
         "Naomi Tanaka", "Samuel Adeyemi", "Clara Moreau", "Pavel Sokolov",
         "Ayesha Rahman", "Niklas Berger", "Lucia Ferreira", "Omar Haddad",
         "Greta Svensson"]
PROFESSIONS = ["chemist", "architect", "historian", "botanist", "composer",
               "surgeon", "engineer"]
PLACES = ["Aldenport", "Bruckvale", "Cedarholm", "Dunmere", "Eastgrove",
          "Fairhaven", "Glenbrook"]
FIELDS = ["Astronomy", "Medicine", "Commerce", "Forestry", "Navigation"]
ADJS = ["Royal", "Northern", "Central", "Pacific", "Maritime"]

DISTRACTOR_PARAGRAPHS = [
    ("Weather patterns", ["Coastal towns often see fog in spring.",
                          "Inland valleys stay drier through summer."]),
    ("Pottery history", ["Glazed pottery spread along old trade routes.",
                         "Kilns from that era are still being excavated."]),
    ("Rail transport", ["Narrow gauge lines served the mining districts.",
                        "Most were closed by the middle of the century."]),
]

# indices of the two approximate-answer cases and the yes/no cases
APPROX_BOOK = 3
APPROX_DOCTOR = 11
YESNO = (7, 19)


def _bridge_example(i):
    name = NAMES[i % len(NAMES)]
    prof = PROFESSIONS[i % len(PROFESSIONS)]
    place = PLACES[i % len(PLACES)]
    place2 = PLACES[(i + 3) % len(PLACES)]
    adj = ADJS[i % len(ADJS)]
    field = FIELDS[i % len(FIELDS)]
    year = str(1860 + i)
    inst = f"{adj} Institute of {field}"
    person_doc = (name, [
        f"{name} was a {prof} born in {place}.",
        f"{name} founded the {inst} in {year}.",
        f"He later moved to {place2}.",
    ])
    inst_doc = (inst, [
        f"The {inst} is a school in {place2}.",
        f"It was established in {year}.",
    ])
    distractor_a = DISTRACTOR_PARAGRAPHS[i % 3]
    distractor_b = DISTRACTOR_PARAGRAPHS[(i + 1) % 3]
    context = [
        [person_doc[0], person_doc[1]],
        [distractor_a[0], list(distractor_a[1])],
        [inst_doc[0], inst_doc[1]],
        [distractor_b[0], list(distractor_b[1])],
    ]
    if i % 2:
        context = [context[1], context[0], context[3], context[2]]
    return {
        "_id": f"raw-{i:03d}",
        "question": f"Which {prof} founded the school in {place2}?",
        "answer": name,
        "supporting_facts": [[person_doc[0], 0], [person_doc[0], 1], [inst_doc[0], 0]],
        "context": context,
        "type": "bridge",
        "level": ["easy", "medium", "hard"][i % 3],
    }


def _comparison_example(i, same):
    a = NAMES[i % len(NAMES)]
    b = NAMES[(i + 5) % len(NAMES)]
    prof = PROFESSIONS[i % len(PROFESSIONS)]
    other = PROFESSIONS[(i + 2) % len(PROFESSIONS)]
    doc_a = (a, [f"{a} was a {prof} from {PLACES[i % len(PLACES)]}."])
    doc_b = (b, [f"{b} was a {prof if same else other} from "
                 f"{PLACES[(i + 1) % len(PLACES)]}."])
    distractor = DISTRACTOR_PARAGRAPHS[i % 3]
    return {
        "_id": f"raw-{i:03d}",
        "question": f"Were {a} and {b} both {prof}s?",
        "answer": "yes" if same else "no",
        "supporting_facts": [[a, 0], [b, 0]],
        "context": [[doc_a[0], doc_a[1]], [distractor[0], list(distractor[1])],
                    [doc_b[0], doc_b[1]]],
        "type": "comparison",
        "level": "medium",
    }


def _approx_book_example(i):
    # answer spelled "Colour", context spells "Color": edit similarity ~0.947
    book_doc = ("The Color of Magic", [
        "The Color of Magic is a comic fantasy novel by Terry Pratchett.",
        "It introduced the failed wizard Rincewind.",
    ])
    author_doc = ("Terry Pratchett", [
        "Terry Pratchett was an English author of fantasy novels.",
        "His first Discworld book appeared in 1983.",
    ])
    distractor = DISTRACTOR_PARAGRAPHS[1]
    return {
        "_id": f"raw-{i:03d}",
        "question": "Which novel by the English fantasy author introduced Rincewind?",
        "answer": "The Colour of Magic",
        "supporting_facts": [[book_doc[0], 0], [book_doc[0], 1], [author_doc[0], 0]],
        "context": [[author_doc[0], author_doc[1]], [distractor[0], list(distractor[1])],
                    [book_doc[0], book_doc[1]]],
        "type": "bridge",
        "level": "hard",
    }, {"doc": 1, "sentence": 0, "start": 0, "end": 4,
        "surface": "The Color of Magic"}


def _approx_doctor_example(i):
    # answer "Dr. Elena Hart" vs context "Dr Elena Hart": similarity ~0.867
    doctor_doc = ("Elena Hart", [
        "Dr Elena Hart discovered the comet of 1889.",
        "She taught at the observatory in Cedarholm.",
    ])
    comet_doc = ("Comet of 1889", [
        "The comet of 1889 was visible for three weeks.",
        "It was recorded by several observatories.",
    ])
    distractor = DISTRACTOR_PARAGRAPHS[2]
    return {
        "_id": f"raw-{i:03d}",
        "question": "Who discovered the comet that was visible for three weeks?",
        "answer": "Dr. Elena Hart",
        "supporting_facts": [[doctor_doc[0], 0], [comet_doc[0], 0]],
        "context": [[doctor_doc[0], doctor_doc[1]], [comet_doc[0], comet_doc[1]],
                    [distractor[0], list(distractor[1])]],
        "type": "bridge",
        "level": "hard",
    }, {"doc": 0, "sentence": 0, "start": 0, "end": 3,
        "surface": "Dr Elena Hart"}


def build_raw_examples():
    """Returns (raw_examples, expectations) with expectations keyed by _id."""
    raw = []
    expectations = {}
    for i in range(25):
        if i == APPROX_BOOK:
            example, span = _approx_book_example(i)
            expectations[example["_id"]] = {"kind": "approx", "span": span}
        elif i == APPROX_DOCTOR:
            example, span = _approx_doctor_example(i)
            expectations[example["_id"]] = {"kind": "approx", "span": span}
        elif i in YESNO:
            example = _comparison_example(i, same=(i == YESNO[0]))
            expectations[example["_id"]] = {
                "kind": "yes" if i == YESNO[0] else "no"
            }
        else:
            example = _bridge_example(i)
            expectations[example["_id"]] = {"kind": "verbatim",
                                            "answer": example["answer"]}
        raw.append(example)
    return raw, expectations
