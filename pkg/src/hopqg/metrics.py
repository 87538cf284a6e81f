"""Evaluation metrics: corpus BLEU-4, ROUGE-L, sentence GLEU, supporting-fact
F1/EM, and the per-example GLEU-difference comparison of two systems.

Metric tokenization is lowercased whitespace splitting (applied when inputs
arrive as strings); subword output must be detokenized before scoring. All
scores live on a 0..100 scale.
"""

from __future__ import annotations

import math
from collections import Counter

from .errors import ValidationError

MAX_ORDER = 4


def metric_tokens(text_or_tokens) -> list[str]:
    if isinstance(text_or_tokens, str):
        return text_or_tokens.lower().split()
    return [t.lower() for t in text_or_tokens]


def ngram_counts(tokens: list[str], order: int) -> Counter:
    return Counter(
        tuple(tokens[i:i + order]) for i in range(len(tokens) - order + 1)
    )


def _paired(hypotheses, references):
    if len(hypotheses) != len(references):
        raise ValidationError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise ValidationError("empty evaluation corpus")
    return [
        (metric_tokens(h), metric_tokens(r))
        for h, r in zip(hypotheses, references)
    ]


def bleu4(hypotheses, references) -> float:
    """Corpus-level geometric mean of clipped 1..4-gram precisions times the
    brevity penalty; no smoothing, so any empty precision zeroes the score."""
    pairs = _paired(hypotheses, references)
    matched = [0] * MAX_ORDER
    total = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in pairs:
        hyp_len += len(hyp)
        ref_len += len(ref)
        for order in range(1, MAX_ORDER + 1):
            hyp_grams = ngram_counts(hyp, order)
            ref_grams = ngram_counts(ref, order)
            matched[order - 1] += sum(
                min(count, ref_grams[gram]) for gram, count in hyp_grams.items()
            )
            total[order - 1] += max(len(hyp) - order + 1, 0)
    if any(m == 0 or t == 0 for m, t in zip(matched, total)):
        return 0.0
    log_precision = sum(math.log(m / t) for m, t in zip(matched, total)) / MAX_ORDER
    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / max(hyp_len, 1))
    return 100.0 * brevity * math.exp(log_precision)


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[len(b)]


def rouge_l_single(hypothesis, reference, beta: float = 1.2) -> float:
    hyp = metric_tokens(hypothesis)
    ref = metric_tokens(reference)
    if not hyp or not ref:
        return 0.0
    lcs = _lcs_length(hyp, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(hyp)
    recall = lcs / len(ref)
    beta_sq = beta * beta
    return 100.0 * (1 + beta_sq) * precision * recall / (recall + beta_sq * precision)


def rouge_l(hypotheses, references, beta: float = 1.2) -> float:
    """LCS F-measure (precision-side weight beta), averaged over examples."""
    pairs = _paired(hypotheses, references)
    return sum(rouge_l_single(h, r, beta) for h, r in pairs) / len(pairs)


def gleu(hypothesis, reference) -> float:
    """min(precision, recall) over the pooled 1..4-gram multisets of one pair."""
    hyp = metric_tokens(hypothesis)
    ref = metric_tokens(reference)
    if not hyp or not ref:
        return 0.0
    hyp_pool: Counter = Counter()
    ref_pool: Counter = Counter()
    for order in range(1, MAX_ORDER + 1):
        hyp_pool.update(ngram_counts(hyp, order))
        ref_pool.update(ngram_counts(ref, order))
    overlap = sum((hyp_pool & ref_pool).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(hyp_pool.values())
    recall = overlap / sum(ref_pool.values())
    return 100.0 * min(precision, recall)


def gleu_mean(hypotheses, references) -> float:
    pairs = _paired(hypotheses, references)
    return sum(gleu(h, r) for h, r in pairs) / len(pairs)


def sf_scores(predicted_sets, gold_sets) -> dict:
    """Macro-averaged F1 and exact-match over per-example fact sets."""
    if len(predicted_sets) != len(gold_sets):
        raise ValidationError(
            f"{len(predicted_sets)} predictions vs {len(gold_sets)} golds"
        )
    if not predicted_sets:
        return {"f1": 0.0, "em": 0.0}
    f1_total = 0.0
    em_total = 0
    for predicted, gold in zip(predicted_sets, gold_sets):
        predicted, gold = set(predicted), set(gold)
        if predicted == gold:
            em_total += 1
            f1_total += 100.0
            continue
        overlap = len(predicted & gold)
        if overlap:
            precision = overlap / len(predicted)
            recall = overlap / len(gold)
            f1_total += 100.0 * 2 * precision * recall / (precision + recall)
    n = len(gold_sets)
    return {"f1": f1_total / n, "em": 100.0 * em_total / n}


def gleu_diff_report(outputs_a, outputs_b, references, margin: float = 20.0) -> dict:
    """How often each system beats the other by at least `margin` GLEU points."""
    if not (len(outputs_a) == len(outputs_b) == len(references)):
        raise ValidationError("gleu_diff_report needs aligned lists")
    a_wins = 0
    b_wins = 0
    for a, b, ref in zip(outputs_a, outputs_b, references):
        score_a = gleu(a, ref)
        score_b = gleu(b, ref)
        if score_a >= score_b + margin:
            a_wins += 1
        if score_b >= score_a + margin:
            b_wins += 1
    n = len(references)
    return {
        "margin": margin,
        "a_wins": a_wins,
        "b_wins": b_wins,
        "a_fraction": a_wins / n if n else 0.0,
        "b_fraction": b_wins / n if n else 0.0,
        "n": n,
    }


def evaluation_report(hypotheses, references, predicted_facts=None,
                      gold_facts=None, config_hash: str = "") -> dict:
    report = {
        "bleu4": bleu4(hypotheses, references),
        "rouge_l": rouge_l(hypotheses, references),
        "meteor": "n/a",
        "gleu_mean": gleu_mean(hypotheses, references),
        "sf_f1": None,
        "sf_em": None,
        "config_hash": config_hash,
        "tokenization": "lowercased whitespace tokens; detokenize subwords first",
    }
    if predicted_facts is not None and gold_facts is not None:
        scores = sf_scores(predicted_facts, gold_facts)
        report["sf_f1"] = scores["f1"]
        report["sf_em"] = scores["em"]
    return report
