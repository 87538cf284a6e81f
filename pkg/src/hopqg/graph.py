"""Multi-relational context-entity graph over mentions, coreference, sentences.

Nodes are entity mentions, coreference mentions, and one sentence node per
context sentence. Relations:
  ENTITY   - mentions co-occurring in a sentence, and mentions sharing a
             normalized surface anywhere in the context (bridge entities);
  COREF    - clique inside each coreference cluster;
  SENTENCE - all sentence-node pairs, plus mention->own-sentence containment
             edges (containment keeps every mention connected to the sentence
             backbone; it can be retyped via containment_relation).

Edges are undirected and stored in both directions; node order is
deterministic by (doc, sentence, start).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import AnnotatedExample
from .errors import AlignmentError, ConfigError

ENTITY = "ENTITY"
COREF = "COREF"
SENTENCE = "SENTENCE"
CONTAINMENT = "CONTAINMENT"

KIND_MENTION = "mention"
KIND_SENTENCE = "sentence"


@dataclass(frozen=True)
class GraphNode:
    kind: str  # mention | sentence
    doc: int
    sentence: int
    start: int | None = None  # token span within the sentence; None for sentence nodes
    end: int | None = None
    norm: str = ""
    # roles a mention node plays: entity and/or coref (coinciding spans share a node)
    roles: tuple[str, ...] = ()


@dataclass
class ContextEntityGraph:
    nodes: list[GraphNode]
    edges: list[tuple[int, int, str]]  # (source, target, relation), both directions
    relations: tuple[str, ...]
    neighbors: dict = field(default_factory=dict)  # node -> [(neighbor, relation)]

    def sentence_node_index(self, doc: int, sentence: int) -> int:
        for i, node in enumerate(self.nodes):
            if node.kind == KIND_SENTENCE and node.doc == doc and node.sentence == sentence:
                return i
        raise KeyError((doc, sentence))

    def to_record(self) -> dict:
        return {
            "nodes": [
                {
                    "kind": n.kind,
                    "doc": n.doc,
                    "sentence": n.sentence,
                    "start": n.start,
                    "end": n.end,
                    "norm": n.norm,
                    "roles": list(n.roles),
                }
                for n in self.nodes
            ],
            "edges": [list(e) for e in self.edges],
            "relations": list(self.relations),
        }


def _normalize_surface(tokens) -> str:
    return " ".join(t.casefold() for t in tokens)


def build_graph(
    example: AnnotatedExample,
    containment_relation: str = SENTENCE,
) -> ContextEntityGraph:
    """Construct the context-entity graph for one validated example."""
    if containment_relation not in (SENTENCE, CONTAINMENT):
        raise ConfigError(
            f"containment_relation must be {SENTENCE} or {CONTAINMENT}"
        )

    # Collect mention spans; coinciding entity/coref spans share one node.
    span_roles: dict[tuple[int, int, int, int], set[str]] = {}
    span_norm: dict[tuple[int, int, int, int], str] = {}
    for m in example.entity_mentions:
        key = (m.doc, m.sentence, m.start, m.end)
        span_roles.setdefault(key, set()).add("entity")
        span_norm[key] = m.norm or _normalize_surface(
            example.documents[m.doc].sentences[m.sentence][m.start:m.end]
        )
    cluster_keys: list[list[tuple[int, int, int, int]]] = []
    for doc, clusters in enumerate(example.coref_clusters):
        for cluster in clusters:
            keys = []
            for span in cluster:
                key = (doc, span.sentence, span.start, span.end)
                span_roles.setdefault(key, set()).add("coref")
                span_norm.setdefault(key, _normalize_surface(
                    example.documents[doc].sentences[span.sentence][span.start:span.end]
                ))
                keys.append(key)
            cluster_keys.append(keys)

    nodes: list[GraphNode] = []
    for key in sorted(span_roles):
        doc, sentence, start, end = key
        nodes.append(GraphNode(
            kind=KIND_MENTION, doc=doc, sentence=sentence, start=start, end=end,
            norm=span_norm[key], roles=tuple(sorted(span_roles[key])),
        ))
    node_index = {
        (n.doc, n.sentence, n.start, n.end): i for i, n in enumerate(nodes)
    }
    sentence_index: dict[tuple[int, int], int] = {}
    for doc, document in enumerate(example.documents):
        for s in range(len(document.sentences)):
            sentence_index[(doc, s)] = len(nodes)
            nodes.append(GraphNode(kind=KIND_SENTENCE, doc=doc, sentence=s))

    undirected: set[tuple[int, int, str]] = set()

    def connect(u: int, v: int, relation: str) -> None:
        if u != v:
            undirected.add((min(u, v), max(u, v), relation))

    entity_nodes = [
        (key, i) for key, i in node_index.items() if "entity" in nodes[i].roles
    ]
    # ENTITY: same-sentence co-occurrence
    by_sentence: dict[tuple[int, int], list[int]] = {}
    for (doc, sentence, _s, _e), i in entity_nodes:
        by_sentence.setdefault((doc, sentence), []).append(i)
    for members in by_sentence.values():
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                connect(members[a], members[b], ENTITY)
    # ENTITY: shared normalized surface across the whole context
    by_norm: dict[str, list[int]] = {}
    for _key, i in entity_nodes:
        by_norm.setdefault(nodes[i].norm, []).append(i)
    for members in by_norm.values():
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                connect(members[a], members[b], ENTITY)

    # COREF: clique per cluster
    for keys in cluster_keys:
        ids = [node_index[k] for k in keys]
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                connect(ids[a], ids[b], COREF)

    # SENTENCE: clique over sentence nodes
    sentence_ids = sorted(sentence_index.values())
    for a in range(len(sentence_ids)):
        for b in range(a + 1, len(sentence_ids)):
            connect(sentence_ids[a], sentence_ids[b], SENTENCE)

    # Containment: every mention to its own sentence node
    for (doc, sentence, _s, _e), i in node_index.items():
        connect(i, sentence_index[(doc, sentence)], containment_relation)

    edges: list[tuple[int, int, str]] = []
    for u, v, relation in sorted(undirected):
        edges.append((u, v, relation))
        edges.append((v, u, relation))

    relations = (ENTITY, COREF, SENTENCE)
    if containment_relation == CONTAINMENT:
        relations = relations + (CONTAINMENT,)

    neighbors: dict[int, list[tuple[int, str]]] = {i: [] for i in range(len(nodes))}
    for u, v, relation in edges:
        neighbors[u].append((v, relation))

    return ContextEntityGraph(
        nodes=nodes, edges=edges, relations=relations, neighbors=neighbors
    )


def node_token_map(graph: ContextEntityGraph, encoded) -> list[tuple[int, int]]:
    """Half-open encoder-token span for each node, in graph node order.

    Mention nodes cover their tokenized span; sentence nodes cover their
    single <sep> position. `encoded` is the EncodedInput built from the same
    example.
    """
    spans = []
    for node in graph.nodes:
        if node.kind == KIND_SENTENCE:
            pos = encoded.sep_position(node.doc, node.sentence)
            spans.append((pos, pos + 1))
        else:
            try:
                start, end = encoded.word_span(node.doc, node.sentence, node.start, node.end)
            except KeyError:
                raise AlignmentError(
                    f"mention {node.norm!r} at (doc {node.doc}, sentence {node.sentence}, "
                    f"tokens {node.start}:{node.end}) is not representable in the encoding"
                )
            if end <= start:
                raise AlignmentError(
                    f"mention {node.norm!r} maps to an empty token span"
                )
            spans.append((start, end))
    return spans
