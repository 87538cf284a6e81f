"""Decoding: greedy / beam search with length normalization, two-model
probability-space ensembling, and supporting-fact prediction.

Beam search expands from <bos>; hypotheses emitting <eos> move to a finished
pool and the final ranking divides cumulative log-probability by the length
penalty lp(n) = ((5 + n) / 6)^alpha, ties broken by shorter length then
lexicographic token ids. If nothing finishes within max_len the best
unfinished hypothesis is returned with a truncation flag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import APPENDED, EncodedInput
from .errors import ConfigError, EnsembleError
from .model import GraphPlan, Model
from .tokenizer import BOS_ID, EOS_ID, Vocabulary


def length_penalty(length: int, alpha: float = 1.0) -> float:
    return ((5.0 + length) / 6.0) ** alpha


@dataclass(frozen=True)
class Hypothesis:
    ids: tuple[int, ...]  # generated ids after <bos>; includes <eos> when finished
    log_prob: float
    finished: bool

    def normalized_score(self, alpha: float) -> float:
        return self.log_prob / length_penalty(max(len(self.ids), 1), alpha)


@dataclass
class DecodeResult:
    hypothesis: Hypothesis
    truncated: bool
    text: str

    @property
    def tokens(self) -> tuple[int, ...]:
        ids = self.hypothesis.ids
        return ids[:-1] if ids and ids[-1] == EOS_ID else ids

    def normalized_score(self, alpha: float = 1.0) -> float:
        return self.hypothesis.normalized_score(alpha)


def _rank_key(alpha: float):
    # higher normalized score first; then shorter; then lexicographic ids
    return lambda h: (-h.normalized_score(alpha), len(h.ids), h.ids)


def beam_search(step_fn, width: int = 5, max_len: int = 64, alpha: float = 1.0,
                eos_id: int = EOS_ID, prefix: tuple[int, ...] = (BOS_ID,)):
    """Generic beam search over a step function.

    step_fn(ids) returns next-token log-probabilities given the full prefix
    (which starts with <bos>). Returns (best Hypothesis, truncated flag).
    """
    if width < 1:
        raise ConfigError(f"beam width must be >= 1, got {width}")
    if max_len < 1:
        raise ConfigError(f"max_len must be >= 1, got {max_len}")
    live = [Hypothesis(ids=(), log_prob=0.0, finished=False)]
    finished: list[Hypothesis] = []
    for _ in range(max_len):
        candidates: list[tuple[tuple[int, ...], float]] = []
        for hyp in live:
            log_probs = step_fn(prefix + hyp.ids)
            vocab = len(log_probs)
            if vocab > 512:
                # only width+1 non-eos continuations per hypothesis can survive
                # the global cut; always keep the eos continuation for the pool
                k = min(width + 1, vocab)
                tokens = {int(t) for t in np.argpartition(-log_probs, k - 1)[:k]}
                tokens.add(eos_id)
            else:
                tokens = range(vocab)
            for token in tokens:
                candidates.append(
                    (hyp.ids + (token,), hyp.log_prob + float(log_probs[token]))
                )
        candidates.sort(key=lambda c: (-c[1], c[0]))
        # the top `width` candidates are selected; finished ones retire to the
        # pool (at width 1 this makes beam search identical to greedy decoding)
        live = []
        for ids, log_prob in candidates[:width]:
            if ids[-1] == eos_id:
                finished.append(Hypothesis(ids, log_prob, True))
            else:
                live.append(Hypothesis(ids, log_prob, False))
        if not live:
            break
    if finished:
        return min(finished, key=_rank_key(alpha)), False
    return min(live, key=_rank_key(alpha)), True


def model_step_fn(model: Model, encoded: EncodedInput, plan: GraphPlan | None):
    """Per-prefix next-token log-probabilities with cached encoder states."""
    states, _ = model.encode(encoded, plan, train=False)
    states = states.detach()

    def step(ids: tuple[int, ...]) -> np.ndarray:
        return model.next_token_log_probs(states, list(ids))

    return step


def ensemble_step(p_first: np.ndarray, p_second: np.ndarray,
                  alpha: float = 0.5) -> np.ndarray:
    """Convex combination of two next-token distributions in probability space."""
    p_first = np.asarray(p_first, dtype=np.float64)
    p_second = np.asarray(p_second, dtype=np.float64)
    if p_first.shape != p_second.shape:
        raise EnsembleError(
            f"vocabulary mismatch: {p_first.shape} vs {p_second.shape}"
        )
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"ensemble alpha must be in [0, 1], got {alpha}")
    return alpha * p_first + (1.0 - alpha) * p_second


def ensemble_step_fn(model_a: Model, model_b: Model, encoded_a: EncodedInput,
                     encoded_b: EncodedInput, plan_a: GraphPlan | None,
                     plan_b: GraphPlan | None, alpha: float = 0.5):
    """One shared beam over the interpolated per-step distributions."""
    if model_a.config.vocab_size != model_b.config.vocab_size:
        raise EnsembleError(
            f"vocabulary mismatch: {model_a.config.vocab_size} "
            f"vs {model_b.config.vocab_size}"
        )
    step_a = model_step_fn(model_a, encoded_a, plan_a)
    step_b = model_step_fn(model_b, encoded_b, plan_b)

    def step(ids: tuple[int, ...]) -> np.ndarray:
        mixed = ensemble_step(np.exp(step_a(ids)), np.exp(step_b(ids)), alpha)
        return np.log(np.maximum(mixed, 1e-300))

    return step


def _finish(result: tuple[Hypothesis, bool], vocabulary: Vocabulary | None) -> DecodeResult:
    hyp, truncated = result
    ids = hyp.ids[:-1] if hyp.ids and hyp.ids[-1] == EOS_ID else hyp.ids
    text = vocabulary.decode(ids) if vocabulary is not None else ""
    return DecodeResult(hypothesis=hyp, truncated=truncated, text=text)


def beam_decode(model: Model, encoded: EncodedInput, plan: GraphPlan | None = None,
                width: int = 5, max_len: int = 64, alpha: float = 1.0,
                vocabulary: Vocabulary | None = None) -> DecodeResult:
    step = model_step_fn(model, encoded, plan)
    return _finish(beam_search(step, width=width, max_len=max_len, alpha=alpha),
                   vocabulary)


def greedy_decode(model: Model, encoded: EncodedInput, plan: GraphPlan | None = None,
                  max_len: int = 64,
                  vocabulary: Vocabulary | None = None) -> DecodeResult:
    return beam_decode(model, encoded, plan, width=1, max_len=max_len,
                       alpha=0.0, vocabulary=vocabulary)


def ensemble_decode(model_a: Model, model_b: Model, encoded_a: EncodedInput,
                    encoded_b: EncodedInput, plan_a: GraphPlan | None,
                    plan_b: GraphPlan | None, mix_alpha: float = 0.5,
                    width: int = 5, max_len: int = 64, alpha: float = 1.0,
                    vocabulary: Vocabulary | None = None) -> DecodeResult:
    step = ensemble_step_fn(model_a, model_b, encoded_a, encoded_b,
                            plan_a, plan_b, mix_alpha)
    return _finish(beam_search(step, width=width, max_len=max_len, alpha=alpha),
                   vocabulary)


def predict_supporting_facts(model: Model, encoded: EncodedInput,
                             plan: GraphPlan | None = None,
                             threshold: float = 0.5) -> set[tuple[int, int]]:
    """Sentences whose classifier probability clears the threshold.

    The appended yes/no pseudo-sentence is never predicted: it is not part of
    the annotated context.
    """
    _, sep_states = model.encode(encoded, plan, train=False)
    probs = model.supporting_fact_probs(sep_states)
    return {
        key
        for key, prob in zip(encoded.sep_sentences, probs)
        if key != APPENDED and prob >= threshold
    }
