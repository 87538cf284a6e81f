"""Regression guard: encoder/decoder outputs against frozen snapshots.

The snapshot was recorded from the first fully verified build (gradient suite
and scalar oracles green). Any intentional change to the forward math must
regenerate tests/golden/model_snapshot.npz and say so in the commit.
"""

from pathlib import Path

import numpy as np

from hopqg import synth
from hopqg.encoding import encode_example
from hopqg.graph import build_graph
from hopqg.model import GraphPlan, Model, ModelConfig
from hopqg.tokenizer import build_vocab

GOLDEN = Path(__file__).parent / "golden" / "model_snapshot.npz"


def setup_fixture():
    examples = synth.make_corpus(1, seed=55)
    vocab = build_vocab(synth.corpus_token_pool(examples), max_size=256)
    encoded = encode_example(examples[0], vocab)
    plan = GraphPlan.build(build_graph(encoded.example), encoded)
    return vocab, encoded, plan


def test_te_and_gate_outputs_match_snapshot():
    vocab, encoded, plan = setup_fixture()
    stored = np.load(GOLDEN)
    assert stored["vocab_size"][0] == len(vocab), "fixture drift: rebuild snapshot"
    for graph in (False, True):
        tag = "gate" if graph else "te"
        config = ModelConfig(vocab_size=len(vocab), layers=2, heads=2, d_model=16,
                             d_ff=32, dropout=0.0, graph_enabled=graph, seed=9)
        m = Model(config)
        tokens, seps = m.encode(encoded, plan if graph else None)
        logits = m.decode_teacher_forced(tokens, encoded.decoder_input_ids)
        np.testing.assert_allclose(tokens.data, stored[f"{tag}_tokens"], atol=1e-10)
        np.testing.assert_allclose(seps.data, stored[f"{tag}_seps"], atol=1e-10)
        np.testing.assert_allclose(logits.data, stored[f"{tag}_logits"], atol=1e-10)
