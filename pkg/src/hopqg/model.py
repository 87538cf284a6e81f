"""Transformer encoder-decoder with optional graph-augmented encoder sublayers.

Encoder layers run dot-product self-attention; with graph augmentation
enabled, node embeddings pooled from the layer input feed a relational
graph-attention sublayer whose output is fused back into vertex tokens by an
MLP before the residual/normalization wrapper. The decoder is a standard
masked-self-attention / cross-attention / feed-forward stack sharing one word
embedding table with the encoder and the generation layer.

Two training signals: label-smoothed negative log-likelihood over question
tokens, and binary cross-entropy of a two-layer sigmoid classifier applied to
sentence separator embeddings against supporting-fact labels; they combine as
lambda * contrastive + (1 - lambda) * nll.

Architecture notes (choices the source formulas leave open):
  - residual connections use post-sublayer layer normalization;
  - positional information is sinusoidal, added to scaled token embeddings
    (scaling by sqrt(d) balances the d^-1/2 embedding init against
    unit-amplitude sinusoids; disable with embed_scale=False);
  - self-attention splits d into H head subspaces and scales scores by
    1/sqrt(d/H); graph attention is single-head over the full width and
    scales by 1/sqrt(d) (scale_attention=False recovers the bare
    dot-product formulas);
  - relation embeddings are per-layer (share_relation_embeddings to tie).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import numkit as nk
from .encoding import EncodedInput
from .errors import ConfigError, DegenerateRowError
from .graph import ContextEntityGraph, node_token_map

# When set to a list, attention ops append their coefficient matrices here
# (test instrumentation only).
ATTN_TRACE: list | None = None


@dataclass
class ModelConfig:
    vocab_size: int
    layers: int = 2
    heads: int = 8
    d_model: int = 512
    d_ff: int = 2048
    num_relations: int = 3
    dropout: float = 0.1
    label_smoothing: float = 0.1
    lambda_weight: float = 0.5
    graph_enabled: bool = False
    fusion_hidden: int = 0      # 0 -> 2 * d_model
    classifier_hidden: int = 0  # 0 -> d_model
    scale_attention: bool = True
    embed_scale: bool = True
    share_relation_embeddings: bool = False
    max_positions: int = 2048
    seed: int = 0

    def __post_init__(self):
        if self.d_model % self.heads:
            raise ConfigError(
                f"d_model {self.d_model} must be divisible by heads {self.heads}"
            )
        if not 0.0 <= self.lambda_weight <= 1.0:
            raise ConfigError(f"lambda_weight must be in [0, 1], got {self.lambda_weight}")
        if self.vocab_size < 5:
            raise ConfigError("vocab_size must cover the four specials")
        if not self.fusion_hidden:
            self.fusion_hidden = 2 * self.d_model
        if not self.classifier_hidden:
            self.classifier_hidden = self.d_model

    def to_dict(self) -> dict:
        return asdict(self)


class _DropoutStream:
    """Counter-based per-call generators: call n of a stream is reproducible."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.counter = 0

    def __call__(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.counter,))
        self.counter += 1
        return np.random.default_rng(seq)


def sinusoidal_positions(length: int, d: int) -> np.ndarray:
    positions = np.arange(length)[:, None]
    dims = np.arange(0, d, 2)[None, :]
    angles = positions / np.power(10000.0, dims / d)
    table = np.zeros((length, d))
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles[:, : d // 2])
    return table


@dataclass
class GraphPlan:
    """Per-example graph layout resolved against an encoding.

    entries[i] lists (neighbor, relation_id) pairs for node i; vertex_tokens
    are the encoder positions covered by any node; pool[t] averages the node
    outputs covering vertex token t.
    """

    node_spans: list[tuple[int, int]]
    entries: list[list[tuple[int, int]]]
    vertex_tokens: np.ndarray
    pool: np.ndarray  # [n_vertex_tokens, n_nodes], rows sum to 1

    @staticmethod
    def build(graph: ContextEntityGraph, encoded: EncodedInput) -> "GraphPlan":
        spans = node_token_map(graph, encoded)
        rel_id = {name: i for i, name in enumerate(graph.relations)}
        entries = [
            sorted((nbr, rel_id[rel]) for nbr, rel in graph.neighbors[i])
            for i in range(len(graph.nodes))
        ]
        cover: dict[int, list[int]] = {}
        for node, (start, stop) in enumerate(spans):
            for t in range(start, stop):
                cover.setdefault(t, []).append(node)
        vertex_tokens = np.array(sorted(cover), dtype=np.int64)
        pool = np.zeros((len(vertex_tokens), len(graph.nodes)))
        for row, t in enumerate(vertex_tokens):
            nodes = cover[int(t)]
            pool[row, nodes] = 1.0 / len(nodes)
        return GraphPlan(
            node_spans=spans, entries=entries,
            vertex_tokens=vertex_tokens, pool=pool,
        )


def _causal_mask(n: int) -> np.ndarray:
    return np.tril(np.ones((n, n), dtype=bool))


class Model:
    """Parameter container plus forward passes for training and decoding."""

    def __init__(self, config: ModelConfig, params: dict[str, nk.Tensor] | None = None):
        self.config = config
        self.params = params if params is not None else self._init_params()
        self._dropout = _DropoutStream(config.seed)
        self._positions_cache: np.ndarray | None = None

    # ------------------------------------------------------------------
    # parameters
    # ------------------------------------------------------------------

    def _param_specs(self) -> list[tuple[str, tuple[int, ...]]]:
        cfg = self.config
        d, ff = cfg.d_model, cfg.d_ff
        specs: list[tuple[str, tuple[int, ...]]] = [
            ("embed.word", (cfg.vocab_size, d)),
            ("embed.answer_type", (2, d)),
        ]
        for i in range(cfg.layers):
            specs += [
                (f"enc.{i}.attn.wq", (d, d)),
                (f"enc.{i}.attn.wk", (d, d)),
                (f"enc.{i}.attn.wv", (d, d)),
                (f"enc.{i}.attn.wf", (d, d)),
                (f"enc.{i}.attn_ln.gain", (d,)),
                (f"enc.{i}.attn_ln.bias", (d,)),
            ]
            if cfg.graph_enabled:
                rel_name = "graph.rel" if cfg.share_relation_embeddings else f"enc.{i}.graph.rel"
                specs += [
                    (f"enc.{i}.graph.wq", (d, d)),
                    (f"enc.{i}.graph.wk", (d, d)),
                    (f"enc.{i}.graph.wv", (d, d)),
                    (f"enc.{i}.graph.wf", (d, d)),
                    (rel_name, (cfg.num_relations, d)),
                    (f"enc.{i}.fuse.w1", (2 * d, cfg.fusion_hidden)),
                    (f"enc.{i}.fuse.b1", (cfg.fusion_hidden,)),
                    (f"enc.{i}.fuse.w2", (cfg.fusion_hidden, d)),
                    (f"enc.{i}.fuse.b2", (d,)),
                ]
            specs += [
                (f"enc.{i}.ff.w1", (d, ff)),
                (f"enc.{i}.ff.b1", (ff,)),
                (f"enc.{i}.ff.w2", (ff, d)),
                (f"enc.{i}.ff.b2", (d,)),
                (f"enc.{i}.ff_ln.gain", (d,)),
                (f"enc.{i}.ff_ln.bias", (d,)),
            ]
        for i in range(cfg.layers):
            specs += [
                (f"dec.{i}.self.wq", (d, d)),
                (f"dec.{i}.self.wk", (d, d)),
                (f"dec.{i}.self.wv", (d, d)),
                (f"dec.{i}.self.wf", (d, d)),
                (f"dec.{i}.self_ln.gain", (d,)),
                (f"dec.{i}.self_ln.bias", (d,)),
                (f"dec.{i}.cross.wq", (d, d)),
                (f"dec.{i}.cross.wk", (d, d)),
                (f"dec.{i}.cross.wv", (d, d)),
                (f"dec.{i}.cross.wf", (d, d)),
                (f"dec.{i}.cross_ln.gain", (d,)),
                (f"dec.{i}.cross_ln.bias", (d,)),
                (f"dec.{i}.ff.w1", (d, ff)),
                (f"dec.{i}.ff.b1", (ff,)),
                (f"dec.{i}.ff.w2", (ff, d)),
                (f"dec.{i}.ff.b2", (d,)),
                (f"dec.{i}.ff_ln.gain", (d,)),
                (f"dec.{i}.ff_ln.bias", (d,)),
            ]
        specs += [
            ("clf.w1", (d, cfg.classifier_hidden)),
            ("clf.b1", (cfg.classifier_hidden,)),
            ("clf.w2", (cfg.classifier_hidden, 1)),
            ("clf.b2", (1,)),
        ]
        # dedupe (shared relation table appears once per layer in the loop)
        seen = set()
        unique = []
        for name, shape in specs:
            if name not in seen:
                seen.add(name)
                unique.append((name, shape))
        return unique

    def _init_params(self) -> dict[str, nk.Tensor]:
        cfg = self.config
        specs = self._param_specs()
        seeds = np.random.SeedSequence(cfg.seed).generate_state(len(specs))
        params: dict[str, nk.Tensor] = {}
        for (name, shape), seed in zip(specs, seeds):
            seed = int(seed)
            if name == "embed.word":
                params[name] = nk.init_gaussian_embedding(shape[0], shape[1], seed)
            elif name.endswith("ln.gain"):
                params[name] = nk.init_ones(shape)
            elif name.endswith(("ln.bias", ".b1", ".b2")):
                params[name] = nk.init_zeros(shape)
            elif name.endswith("graph.rel"):
                params[name] = nk.init_lecun_uniform(shape, seed, fan_in=cfg.d_model)
            elif name == "embed.answer_type":
                params[name] = nk.init_lecun_uniform(shape, seed, fan_in=cfg.d_model)
            else:
                params[name] = nk.init_lecun_uniform(shape, seed)
        return params

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def reset_dropout(self, seed: int | None = None) -> None:
        self._dropout = _DropoutStream(self.config.seed if seed is None else seed)

    def _positions(self, length: int) -> np.ndarray:
        cache = self._positions_cache
        if cache is None or cache.shape[0] < length:
            size = max(length, 64)
            if self._positions_cache is not None:
                size = max(size, self._positions_cache.shape[0])
            self._positions_cache = sinusoidal_positions(size, self.config.d_model)
        return self._positions_cache[:length]

    # ------------------------------------------------------------------
    # sublayers
    # ------------------------------------------------------------------

    def _drop(self, x, train: bool):
        return nk.dropout(x, self.config.dropout, train, self._dropout() if train else None)

    def self_attention(self, x, prefix: str, train: bool, mask=None,
                       keys_values=None, heads: int | None = None):
        """Multi-head dot-product attention; cross-attention when keys_values given."""
        cfg = self.config
        heads = cfg.heads if heads is None else heads
        d = cfg.d_model
        if d % heads:
            raise ConfigError(f"d_model {d} not divisible by heads {heads}")
        head_dim = d // heads
        source = x if keys_values is None else keys_values
        q = nk.matmul(x, self.params[f"{prefix}.wq"])
        k = nk.matmul(source, self.params[f"{prefix}.wk"])
        v = nk.matmul(source, self.params[f"{prefix}.wv"])
        outputs = []
        for h in range(heads):
            lo, hi = h * head_dim, (h + 1) * head_dim
            scores = nk.matmul(nk.slice_cols(q, lo, hi),
                               nk.transpose(nk.slice_cols(k, lo, hi)))
            if cfg.scale_attention:
                scores = nk.scale(scores, 1.0 / math.sqrt(head_dim))
            coeffs = nk.softmax_rows(scores, mask=mask)
            if ATTN_TRACE is not None:
                ATTN_TRACE.append(coeffs.data.copy())
            coeffs = self._drop(coeffs, train)
            outputs.append(nk.matmul(coeffs, nk.slice_cols(v, lo, hi)))
        merged = outputs[0]
        for part in outputs[1:]:
            merged = nk.concat_cols(merged, part)
        return nk.matmul(merged, self.params[f"{prefix}.wf"])

    def feed_forward(self, x, prefix: str, train: bool):
        hidden = nk.relu(nk.add(nk.matmul(x, self.params[f"{prefix}.w1"]),
                                self.params[f"{prefix}.b1"]))
        hidden = self._drop(hidden, train)
        return nk.add(nk.matmul(hidden, self.params[f"{prefix}.w2"]),
                      self.params[f"{prefix}.b2"])

    def _layer_norm(self, x, prefix: str):
        return nk.layer_norm(x, self.params[f"{prefix}.gain"], self.params[f"{prefix}.bias"])

    def graph_attention(self, nodes, layer: int, entries, train: bool):
        """Relational dot-product attention restricted to each node's neighbors.

        Every (neighbor, relation) entry scores q_i . (k_j + gamma_r) and
        contributes (v_j + gamma_r); parallel edges with different relations
        are separate entries.
        """
        cfg = self.config
        rel_name = "graph.rel" if cfg.share_relation_embeddings else f"enc.{layer}.graph.rel"
        rel = self.params[rel_name]
        q = nk.matmul(nodes, self.params[f"enc.{layer}.graph.wq"])
        k = nk.matmul(nodes, self.params[f"enc.{layer}.graph.wk"])
        v = nk.matmul(nodes, self.params[f"enc.{layer}.graph.wv"])
        scale = 1.0 / math.sqrt(cfg.d_model) if cfg.scale_attention else 1.0
        rows = []
        for i, node_entries in enumerate(entries):
            if not node_entries:
                raise DegenerateRowError(f"graph node {i} has no neighbors to attend over")
            nbrs = [j for j, _ in node_entries]
            rels = [r for _, r in node_entries]
            keys = nk.add(nk.gather_rows(k, nbrs), nk.gather_rows(rel, rels))
            scores = nk.matmul(nk.gather_rows(q, [i]), nk.transpose(keys))
            if cfg.scale_attention:
                scores = nk.scale(scores, scale)
            coeffs = nk.softmax_rows(scores)
            if ATTN_TRACE is not None:
                ATTN_TRACE.append(coeffs.data.copy())
            coeffs = self._drop(coeffs, train)
            values = nk.add(nk.gather_rows(v, nbrs), nk.gather_rows(rel, rels))
            rows.append(nk.matmul(coeffs, values))
        stacked = rows[0] if len(rows) == 1 else nk.stack_rows(rows)
        return nk.matmul(stacked, self.params[f"enc.{layer}.graph.wf"])

    def fuse(self, token_states, node_outputs, plan: GraphPlan, layer: int, train: bool):
        """Replace vertex-token states with f([z, z_graph]); others pass through."""
        if len(plan.vertex_tokens) == 0:
            return token_states
        scattered = nk.matmul(nk.Tensor(plan.pool), node_outputs)
        z_vertex = nk.gather_rows(token_states, plan.vertex_tokens)
        joined = nk.concat_cols(z_vertex, scattered)
        hidden = nk.relu(nk.add(nk.matmul(joined, self.params[f"enc.{layer}.fuse.w1"]),
                                self.params[f"enc.{layer}.fuse.b1"]))
        hidden = self._drop(hidden, train)
        fused = nk.add(nk.matmul(hidden, self.params[f"enc.{layer}.fuse.w2"]),
                       self.params[f"enc.{layer}.fuse.b2"])
        return nk.row_scatter(token_states, fused, plan.vertex_tokens)

    # ------------------------------------------------------------------
    # encoder / decoder passes
    # ------------------------------------------------------------------

    def embed_encoder(self, encoded: EncodedInput, train: bool):
        cfg = self.config
        ids = encoded.encoder_ids
        if len(ids) > cfg.max_positions:
            raise ConfigError(
                f"encoder input of {len(ids)} tokens exceeds max_positions {cfg.max_positions}"
            )
        tokens = nk.embedding_lookup(self.params["embed.word"], ids)
        if cfg.embed_scale:
            tokens = nk.scale(tokens, math.sqrt(cfg.d_model))
        types = nk.embedding_lookup(self.params["embed.answer_type"], encoded.type_ids)
        x = nk.add(nk.add(tokens, nk.Tensor(self._positions(len(ids)))), types)
        return self._drop(x, train)

    def encode(self, encoded: EncodedInput, plan: GraphPlan | None = None,
               train: bool = False):
        """Full encoder stack; returns (token_states, sep_states)."""
        cfg = self.config
        if cfg.graph_enabled and plan is None:
            raise ConfigError("graph-enabled encoder needs a GraphPlan")
        x = self.embed_encoder(encoded, train)
        for i in range(cfg.layers):
            sub = self.self_attention(x, f"enc.{i}.attn", train)
            if cfg.graph_enabled:
                nodes = nk.span_means(x, plan.node_spans)
                node_out = self.graph_attention(nodes, i, plan.entries, train)
                sub = self.fuse(sub, node_out, plan, i, train)
            x = self._layer_norm(nk.add(x, self._drop(sub, train)), f"enc.{i}.attn_ln")
            ff = self.feed_forward(x, f"enc.{i}.ff", train)
            x = self._layer_norm(nk.add(x, self._drop(ff, train)), f"enc.{i}.ff_ln")
        sep_states = nk.gather_rows(x, encoded.sep_positions)
        return x, sep_states

    def embed_decoder(self, ids, train: bool):
        cfg = self.config
        tokens = nk.embedding_lookup(self.params["embed.word"], ids)
        if cfg.embed_scale:
            tokens = nk.scale(tokens, math.sqrt(cfg.d_model))
        x = nk.add(tokens, nk.Tensor(self._positions(len(ids))))
        return self._drop(x, train)

    def decode_teacher_forced(self, encoder_states, decoder_input_ids, train: bool = False):
        """Causally masked decoder pass; returns [K x V] generation logits."""
        cfg = self.config
        x = self.embed_decoder(decoder_input_ids, train)
        mask = _causal_mask(len(decoder_input_ids))
        for i in range(cfg.layers):
            sub = self.self_attention(x, f"dec.{i}.self", train, mask=mask)
            x = self._layer_norm(nk.add(x, self._drop(sub, train)), f"dec.{i}.self_ln")
            sub = self.self_attention(x, f"dec.{i}.cross", train, keys_values=encoder_states)
            x = self._layer_norm(nk.add(x, self._drop(sub, train)), f"dec.{i}.cross_ln")
            ff = self.feed_forward(x, f"dec.{i}.ff", train)
            x = self._layer_norm(nk.add(x, self._drop(ff, train)), f"dec.{i}.ff_ln")
        return nk.matmul(x, nk.transpose(self.params["embed.word"]))

    def classifier_logits(self, sep_states):
        hidden = nk.relu(nk.add(nk.matmul(sep_states, self.params["clf.w1"]),
                                self.params["clf.b1"]))
        return nk.add(nk.matmul(hidden, self.params["clf.w2"]), self.params["clf.b2"])

    # ------------------------------------------------------------------
    # losses
    # ------------------------------------------------------------------

    def nll_loss(self, logits, targets):
        return nk.label_smoothed_nll(logits, targets, self.config.label_smoothing)

    def contrastive_loss(self, sep_states, labels):
        logits = self.classifier_logits(sep_states)
        labels = np.asarray(labels, dtype=np.float64).reshape(-1, 1)
        return nk.binary_cross_entropy_with_logits(logits, labels)

    def composite_loss(self, nll, contrastive, lambda_weight: float | None = None):
        lam = self.config.lambda_weight if lambda_weight is None else lambda_weight
        if not 0.0 <= lam <= 1.0:
            raise ConfigError(f"lambda must be in [0, 1], got {lam}")
        if lam == 0.0:
            return nll
        if lam == 1.0:
            return contrastive
        return nk.add(nk.scale(contrastive, lam), nk.scale(nll, 1.0 - lam))

    def example_losses(self, encoded: EncodedInput, plan: GraphPlan | None = None,
                       train: bool = False):
        """(nll, contrastive) scalar tensors for one encoded example."""
        token_states, sep_states = self.encode(encoded, plan, train)
        logits = self.decode_teacher_forced(token_states, encoded.decoder_input_ids, train)
        nll = self.nll_loss(logits, encoded.decoder_target_ids)
        contrastive = self.contrastive_loss(sep_states, encoded.sf_labels)
        return nll, contrastive

    # ------------------------------------------------------------------
    # inference helpers
    # ------------------------------------------------------------------

    def encode_for_inference(self, encoded: EncodedInput, plan: GraphPlan | None = None):
        token_states, sep_states = self.encode(encoded, plan, train=False)
        return token_states.detach(), sep_states.detach()

    def next_token_log_probs(self, encoder_states, prefix_ids) -> np.ndarray:
        logits = self.decode_teacher_forced(encoder_states, prefix_ids, train=False)
        row = logits.data[-1]
        shifted = row - row.max()
        return shifted - math.log(np.exp(shifted).sum())

    def supporting_fact_probs(self, sep_states) -> np.ndarray:
        return nk.sigmoid(self.classifier_logits(sep_states)).data.reshape(-1)

    # ------------------------------------------------------------------
    # checkpointing
    # ------------------------------------------------------------------

    def save_checkpoint(self, path, vocab_sha256: str) -> None:
        arrays = {name: p.data for name, p in self.params.items()}
        nk.write_snapshot(path, arrays, extra={
            "model_config": self.config.to_dict(),
            "vocab_sha256": vocab_sha256,
        })

    @classmethod
    def load_checkpoint(cls, path, expected_vocab_sha256: str | None = None) -> "Model":
        arrays, extra = nk.read_snapshot(path)
        stored = extra.get("vocab_sha256")
        if expected_vocab_sha256 is not None and stored != expected_vocab_sha256:
            raise ConfigError(
                f"checkpoint was trained with vocabulary {stored}, "
                f"got {expected_vocab_sha256}"
            )
        config = ModelConfig(**extra["model_config"])
        params = {name: nk.Tensor(data, requires_grad=True) for name, data in arrays.items()}
        model = cls(config, params=params)
        return model

    @staticmethod
    def peek_config(path) -> dict:
        manifest = json.loads((Path(path) / "manifest.json").read_text())
        return manifest["extra"]
