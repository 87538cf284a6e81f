"""Optimization loop: warmup/decay schedule, token-budget batching, composite
training, checkpointing, and dev-set model selection by greedy-decode BLEU."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import numkit as nk
from .corpus import filter_by_question_length
from .encoding import encode_example
from .errors import ConfigError, ContractError, TrainingDiverged
from .graph import build_graph
from .model import GraphPlan, Model, ModelConfig


def lr(step: int, d: int, warmup: int = 16000) -> float:
    """2 * d^-0.5 * min(step^-0.5, step * warmup^-1.5): linear warmup, then
    inverse-sqrt decay, peaking at `warmup`."""
    if step < 1:
        raise ContractError(f"lr is defined for step >= 1, got {step}")
    return 2.0 * d ** -0.5 * min(step ** -0.5, step * warmup ** -1.5)


@dataclass
class TrainConfig:
    token_budget: int = 12000
    max_steps: int = 1000
    warmup_steps: int = 16000
    seed: int = 0
    checkpoint_every: int = 0     # 0: checkpoint only at the end
    log_every: int = 25
    lambda_weight: float | None = None  # None: take the model config's value
    filter_enabled: bool = True
    max_question_words: int = 30
    grad_clip: float = 0.0        # 0: off
    max_encoder_len: int | None = None

    def __post_init__(self):
        if self.warmup_steps < 1:
            raise ConfigError("warmup_steps must be >= 1")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")


@dataclass
class PreparedExample:
    encoded: object
    plan: GraphPlan | None

    @property
    def token_count(self) -> int:
        return self.encoded.source_token_count + self.encoded.target_token_count


def prepare_examples(examples, vocabulary, model_config: ModelConfig,
                     max_encoder_len: int | None = None) -> list[PreparedExample]:
    prepared = []
    for ex in examples:
        encoded = encode_example(ex, vocabulary, max_encoder_len=max_encoder_len)
        plan = None
        if model_config.graph_enabled:
            plan = GraphPlan.build(build_graph(encoded.example), encoded)
        prepared.append(PreparedExample(encoded=encoded, plan=plan))
    return prepared


def make_batches(prepared: list[PreparedExample], token_budget: int,
                 seed: int) -> list[list[PreparedExample]]:
    """Length-sorted greedy fill under the source+target token budget, then a
    seeded shuffle of the batch order."""
    for p in prepared:
        if p.token_count > token_budget:
            raise ConfigError(
                f"example {p.encoded.example.id} needs {p.token_count} tokens, "
                f"over the batch budget {token_budget}"
            )
    by_length = sorted(
        prepared, key=lambda p: (p.token_count, p.encoded.example.id)
    )
    batches: list[list[PreparedExample]] = []
    current: list[PreparedExample] = []
    used = 0
    for p in by_length:
        if current and used + p.token_count > token_budget:
            batches.append(current)
            current, used = [], 0
        current.append(p)
        used += p.token_count
    if current:
        batches.append(current)
    random.Random(seed).shuffle(batches)
    return batches


@dataclass
class TrainResult:
    steps: int
    final_nll: float
    final_ct: float
    final_composite: float
    best_dev_bleu: float | None
    best_checkpoint: str | None
    log: list[dict] = field(default_factory=list)


def train(model: Model, train_examples, vocabulary, config: TrainConfig,
          dev_examples=None, out_dir=None, quiet: bool = True) -> TrainResult:
    """Teacher-forced composite-objective training.

    Checkpoints (when out_dir is set) land in out_dir/step-N and out_dir/best;
    the best checkpoint is the one with the highest greedy-decode dev BLEU.
    Appends one JSON line per logged step to out_dir/metrics.jsonl.
    """
    from .inference import greedy_decode  # local import to avoid a cycle
    from .metrics import bleu4

    examples = list(train_examples)
    if config.filter_enabled:
        examples, _report = filter_by_question_length(
            examples, max_words=config.max_question_words
        )
    if not examples:
        raise ConfigError("no training examples left after filtering")

    prepared = prepare_examples(examples, vocabulary, model.config,
                                max_encoder_len=config.max_encoder_len)
    dev_prepared = (
        prepare_examples(dev_examples, vocabulary, model.config,
                         max_encoder_len=config.max_encoder_len)
        if dev_examples else None
    )

    lam = (model.config.lambda_weight if config.lambda_weight is None
           else config.lambda_weight)
    adam = nk.AdamState()
    model.reset_dropout(config.seed)
    out = Path(out_dir) if out_dir is not None else None
    metrics_path = out / "metrics.jsonl" if out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)

    def write_log(record: dict) -> None:
        result.log.append(record)
        if metrics_path:
            with open(metrics_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")

    def dev_bleu() -> float:
        hyps, refs = [], []
        for p in dev_prepared:
            decoded = greedy_decode(model, p.encoded, p.plan,
                                    max_len=64, vocabulary=vocabulary)
            hyps.append(decoded.text)
            refs.append(" ".join(p.encoded.example.question))
        return bleu4(hyps, refs)

    def checkpoint(tag: str) -> str:
        path = out / tag
        model.save_checkpoint(path, vocabulary.sha256())
        return str(path)

    result = TrainResult(steps=0, final_nll=float("nan"), final_ct=float("nan"),
                         final_composite=float("nan"), best_dev_bleu=None,
                         best_checkpoint=None)

    batches: list[list[PreparedExample]] = []
    batch_cursor = 0
    epoch = 0
    best_bleu = -1.0

    for step in range(1, config.max_steps + 1):
        if batch_cursor >= len(batches):
            batches = make_batches(prepared, config.token_budget,
                                   seed=config.seed + epoch)
            batch_cursor = 0
            epoch += 1
        batch = batches[batch_cursor]
        batch_cursor += 1

        model.zero_grad()
        with nk.Tape() as tape:
            nlls, cts = [], []
            for p in batch:
                nll, ct = model.example_losses(p.encoded, p.plan, train=True)
                nlls.append(nll)
                cts.append(ct)
            nll_mean = nk.mean_tensors(nlls)
            ct_mean = nk.mean_tensors(cts)
            composite = model.composite_loss(nll_mean, ct_mean, lam)
            if not np.isfinite(composite.data):
                raise TrainingDiverged(
                    f"non-finite loss at step {step} on batch "
                    f"{[p.encoded.example.id for p in batch]}"
                )
            tape.backward(composite)

        if config.grad_clip > 0:
            total = math.sqrt(sum(
                float((p.grad ** 2).sum())
                for p in model.params.values() if p.grad is not None
            ))
            if total > config.grad_clip:
                factor = config.grad_clip / total
                for p in model.params.values():
                    if p.grad is not None:
                        p.grad *= factor

        step_lr = lr(step, model.config.d_model, config.warmup_steps)
        nk.adam_step(model.params, adam, step_lr)

        result.steps = step
        result.final_nll = float(nll_mean.data)
        result.final_ct = float(ct_mean.data)
        result.final_composite = float(composite.data)

        should_log = step % config.log_every == 0 or step == config.max_steps
        should_checkpoint = out and (
            step == config.max_steps
            or (config.checkpoint_every and step % config.checkpoint_every == 0)
        )
        if should_log or should_checkpoint:
            record = {
                "step": step,
                "lr": step_lr,
                "nll": result.final_nll,
                "ct": result.final_ct,
                "composite": result.final_composite,
            }
            if should_checkpoint:
                checkpoint(f"step-{step}")
                if dev_prepared:
                    bleu = dev_bleu()
                    record["dev_bleu"] = bleu
                    if bleu > best_bleu:
                        best_bleu = bleu
                        result.best_dev_bleu = bleu
                        result.best_checkpoint = checkpoint("best")
            write_log(record)
            if not quiet:
                print(json.dumps(record))

    if out and result.best_checkpoint is None:
        # no dev set: the final weights are the selected model
        result.best_checkpoint = checkpoint("best")
    return result
