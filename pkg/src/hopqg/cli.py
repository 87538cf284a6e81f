"""Command-line pipeline: validate, filter, split, stats, train, generate,
ensemble-generate, evaluate, graph-dump.

Every subcommand accepts --config/--seed/--out, prints its effective
configuration to stderr at startup, and exits 0 on success, 1 on validation
failure, 2 on configuration errors (argparse uses 2 for usage errors too).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from .config import Resolver, load_config_file
from .encoding import encode_example
from .errors import ConfigError, HopqgError, ValidationError
from .graph import build_graph
from .inference import beam_decode, ensemble_decode, greedy_decode, predict_supporting_facts
from .metrics import evaluation_report
from .model import GraphPlan, Model, ModelConfig
from .tokenizer import build_vocab, load_vocab
from .trainer import TrainConfig, prepare_examples, train


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def _write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _read_jsonl(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


# ----------------------------------------------------------------------
# subcommand implementations
# ----------------------------------------------------------------------


def cmd_validate(args, resolver: Resolver) -> int:
    resolver.announce("validate")
    violations = corpus_mod.scan_violations(args.data)
    report = {"file": str(args.data), "violations": violations,
              "count": len(violations)}
    if args.out:
        _write_json(args.out, report)
    for violation in violations:
        print(f"line {violation['line']}: {violation['error']}", file=sys.stderr)
    print(f"{len(violations)} violation(s) in {args.data}")
    return 1 if violations else 0


def cmd_filter(args, resolver: Resolver) -> int:
    max_words = resolver.get("max_words", args.max_words, 30)
    resolver.announce("filter")
    examples = corpus_mod.load_and_validate(args.data)
    kept, report = corpus_mod.filter_by_question_length(examples, max_words=max_words)
    corpus_mod.save_examples(kept, args.output)
    payload = report.to_dict()
    if args.report:
        _write_json(args.report, payload)
    print(json.dumps(payload))
    return 0


def cmd_split(args, resolver: Resolver) -> int:
    n_dev = resolver.get("n_dev", args.n_dev, 500)
    seed = resolver.get("seed", args.seed, 0)
    resolver.announce("split")
    examples = corpus_mod.load_and_validate(args.data)
    train_set, dev_set = corpus_mod.split_reserve_dev(examples, n_dev=n_dev, seed=seed)
    corpus_mod.save_examples(train_set, args.train_out)
    corpus_mod.save_examples(dev_set, args.dev_out)
    print(json.dumps({"train": len(train_set), "dev": len(dev_set)}))
    return 0


def cmd_stats(args, resolver: Resolver) -> int:
    resolver.announce("stats")
    examples = corpus_mod.load_and_validate(args.data)
    stats = corpus_mod.compute_stats(examples).to_dict()
    if args.out:
        _write_json(args.out, stats)
    print(json.dumps(stats))
    return 0


def _model_config_from(resolver: Resolver, overrides: dict, vocab_size: int,
                       seed: int | None) -> ModelConfig:
    section = resolver.section_dict("model", overrides)
    section.pop("vocab_size", None)
    if seed is not None:
        section["seed"] = seed
    try:
        return ModelConfig(vocab_size=vocab_size, **section)
    except TypeError as exc:
        raise ConfigError(f"bad model config: {exc}")


def cmd_train(args, resolver: Resolver) -> int:
    seed = resolver.get("seed", args.seed, 0, section="train")
    vocab_max = resolver.get("vocab_max_size", args.vocab_max_size, 32000,
                             section="train")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    examples = corpus_mod.load_and_validate(args.data)
    dev = corpus_mod.load_and_validate(args.dev) if args.dev else None

    if args.vocab:
        vocabulary = load_vocab(args.vocab)
    else:
        pool = [list(w for s in d.sentences for w in s) for e in examples
                for d in e.documents]
        pool += [list(e.question) for e in examples]
        pool.append(["yes", "no"])
        vocabulary = build_vocab(pool, max_size=vocab_max)
    vocabulary.save(out_dir / "vocab.txt")

    model_config = _model_config_from(
        resolver, {"graph_enabled": args.graph}, len(vocabulary), seed
    )
    train_section = resolver.section_dict("train", {
        "max_steps": args.max_steps, "token_budget": args.token_budget,
        "warmup_steps": args.warmup_steps, "checkpoint_every": args.checkpoint_every,
    })
    train_section.pop("vocab_max_size", None)
    train_section["seed"] = seed
    try:
        train_config = TrainConfig(**train_section)
    except TypeError as exc:
        raise ConfigError(f"bad train config: {exc}")
    resolver.announce("train")

    model = Model(model_config)
    result = train(model, examples, vocabulary, train_config,
                   dev_examples=dev, out_dir=out_dir, quiet=False)
    summary = {
        "steps": result.steps,
        "final_nll": result.final_nll,
        "final_ct": result.final_ct,
        "final_composite": result.final_composite,
        "best_dev_bleu": result.best_dev_bleu,
        "best_checkpoint": result.best_checkpoint,
        "vocab": str(out_dir / "vocab.txt"),
    }
    _write_json(out_dir / "summary.json", summary)
    print(json.dumps(summary))
    return 0


def _load_model_and_vocab(checkpoint, vocab_path):
    vocabulary = load_vocab(vocab_path)
    model = Model.load_checkpoint(checkpoint, vocabulary.sha256())
    return model, vocabulary


def _decode_records(args, resolver, decode_one):
    examples = corpus_mod.load_and_validate(args.data)
    records = []
    for ex in examples:
        records.append(decode_one(ex))
    _write_jsonl(args.out, records)
    print(json.dumps({"generated": len(records), "out": str(args.out)}))
    return 0


def cmd_generate(args, resolver: Resolver) -> int:
    width = resolver.get("width", args.width, 5, section="generate")
    max_len = resolver.get("max_len", args.max_len, 64, section="generate")
    alpha = resolver.get("length_alpha", args.length_alpha, 1.0, section="generate")
    threshold = resolver.get("sf_threshold", args.sf_threshold, 0.5, section="generate")
    resolver.announce("generate")
    model, vocabulary = _load_model_and_vocab(args.checkpoint, args.vocab)

    def decode_one(ex):
        encoded = encode_example(ex, vocabulary)
        plan = (GraphPlan.build(build_graph(encoded.example), encoded)
                if model.config.graph_enabled else None)
        if width == 1:
            result = greedy_decode(model, encoded, plan, max_len=max_len,
                                   vocabulary=vocabulary)
        else:
            result = beam_decode(model, encoded, plan, width=width,
                                 max_len=max_len, alpha=alpha, vocabulary=vocabulary)
        facts = predict_supporting_facts(model, encoded, plan, threshold=threshold)
        return {
            "id": ex.id,
            "question_text": result.text,
            "normalized_score": result.normalized_score(alpha),
            "truncated": result.truncated,
            "predicted_supporting_facts": sorted(list(f) for f in facts),
        }

    return _decode_records(args, resolver, decode_one)


def cmd_ensemble_generate(args, resolver: Resolver) -> int:
    width = resolver.get("width", args.width, 5, section="generate")
    max_len = resolver.get("max_len", args.max_len, 64, section="generate")
    alpha = resolver.get("length_alpha", args.length_alpha, 1.0, section="generate")
    mix = resolver.get("mix_alpha", args.mix_alpha, 0.5, section="generate")
    threshold = resolver.get("sf_threshold", args.sf_threshold, 0.5, section="generate")
    resolver.announce("ensemble-generate")
    model_a, vocabulary = _load_model_and_vocab(args.checkpoint_a, args.vocab)
    model_b, _ = _load_model_and_vocab(args.checkpoint_b, args.vocab)

    def decode_one(ex):
        encoded = encode_example(ex, vocabulary)
        plan_a = (GraphPlan.build(build_graph(encoded.example), encoded)
                  if model_a.config.graph_enabled else None)
        plan_b = (GraphPlan.build(build_graph(encoded.example), encoded)
                  if model_b.config.graph_enabled else None)
        result = ensemble_decode(model_a, model_b, encoded, encoded, plan_a, plan_b,
                                 mix_alpha=mix, width=width, max_len=max_len,
                                 alpha=alpha, vocabulary=vocabulary)
        facts = predict_supporting_facts(model_a, encoded, plan_a, threshold=threshold)
        return {
            "id": ex.id,
            "question_text": result.text,
            "normalized_score": result.normalized_score(alpha),
            "truncated": result.truncated,
            "predicted_supporting_facts": sorted(list(f) for f in facts),
        }

    return _decode_records(args, resolver, decode_one)


def cmd_evaluate(args, resolver: Resolver) -> int:
    margin = resolver.get("gleu_margin", args.gleu_margin, 20.0, section="evaluate")
    resolver.announce("evaluate")
    hyp_records = {r["id"]: r for r in _read_jsonl(args.hyp)}
    references = corpus_mod.load_and_validate(args.ref)
    missing = [ex.id for ex in references if ex.id not in hyp_records]
    if missing:
        raise ValidationError(
            f"hypothesis file lacks {len(missing)} ids (first: {missing[0]})"
        )
    hyps, refs, predicted, gold = [], [], [], []
    for ex in references:
        record = hyp_records[ex.id]
        hyps.append(record["question_text"])
        refs.append(" ".join(ex.question))
        predicted.append({tuple(p) for p in record.get("predicted_supporting_facts", [])})
        gold.append(set(ex.supporting_facts))
    report = evaluation_report(hyps, refs, predicted, gold,
                               config_hash=args.config_hash or "")
    if args.hyp_b:
        from .metrics import gleu_diff_report

        b_records = {r["id"]: r for r in _read_jsonl(args.hyp_b)}
        missing_b = [ex.id for ex in references if ex.id not in b_records]
        if missing_b:
            raise ValidationError(
                f"second hypothesis file lacks {len(missing_b)} ids"
            )
        hyps_b = [b_records[ex.id]["question_text"] for ex in references]
        report["gleu_diff"] = gleu_diff_report(hyps, hyps_b, refs, margin=margin)
    if args.out:
        _write_json(args.out, report)
    print(json.dumps(report))
    return 0


def cmd_graph_dump(args, resolver: Resolver) -> int:
    resolver.announce("graph-dump")
    examples = corpus_mod.load_and_validate(args.data)
    records = []
    for ex in examples:
        record = build_graph(ex).to_record()
        record["id"] = ex.id
        records.append(record)
    _write_jsonl(args.out, records)
    print(json.dumps({"graphs": len(records), "out": str(args.out)}))
    return 0


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopqg",
        description="Multi-hop question generation pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False, out_help="output path"):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="random seed override")
        p.add_argument("--out", required=out_required, default=None, help=out_help)

    p = sub.add_parser("validate", help="validate a corpus file")
    p.add_argument("data", help="corpus JSONL file")
    common(p, out_help="write the violation report here (JSON)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("filter", help="drop examples with over-long questions")
    p.add_argument("data", help="corpus JSONL file")
    p.add_argument("output", help="filtered corpus JSONL file")
    p.add_argument("--max-words", type=int, default=None,
                   help="maximum question length in words (default 30)")
    p.add_argument("--report", default=None, help="write the removal report here")
    common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("split", help="reserve a dev set from a corpus")
    p.add_argument("data", help="corpus JSONL file")
    p.add_argument("--train-out", required=True, help="training split output")
    p.add_argument("--dev-out", required=True, help="dev split output")
    p.add_argument("--n-dev", type=int, default=None, help="dev size (default 500)")
    common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("data", help="corpus JSONL file")
    common(p, out_help="write the stats report here (JSON)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--data", required=True, help="training corpus JSONL")
    p.add_argument("--dev", default=None, help="dev corpus JSONL for model selection")
    p.add_argument("--vocab", default=None, help="existing vocabulary file")
    p.add_argument("--vocab-max-size", type=int, default=None,
                   help="vocabulary cap when building from data (default 32000)")
    p.add_argument("--graph", action="store_true", default=None,
                   help="enable the graph-augmented encoder")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--token-budget", type=int, default=None)
    p.add_argument("--warmup-steps", type=int, default=None)
    p.add_argument("--checkpoint-every", type=int, default=None)
    common(p, out_required=True, out_help="run directory for checkpoints and logs")
    p.set_defaults(func=cmd_train)

    def decode_args(p):
        p.add_argument("--data", required=True, help="corpus JSONL to decode")
        p.add_argument("--vocab", required=True, help="vocabulary file")
        p.add_argument("--width", type=int, default=None, help="beam width (default 5)")
        p.add_argument("--max-len", type=int, default=None, help="decode cap (default 64)")
        p.add_argument("--length-alpha", type=float, default=None,
                       help="length-normalization strength (default 1.0)")
        p.add_argument("--sf-threshold", type=float, default=None,
                       help="supporting-fact probability threshold (default 0.5)")
        common(p, out_required=True, out_help="generation output JSONL")

    p = sub.add_parser("generate", help="decode questions with one model")
    p.add_argument("--checkpoint", required=True, help="checkpoint directory")
    decode_args(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ensemble-generate",
                       help="decode with two models, probability-interpolated")
    p.add_argument("--checkpoint-a", required=True, help="first checkpoint directory")
    p.add_argument("--checkpoint-b", required=True, help="second checkpoint directory")
    p.add_argument("--mix-alpha", type=float, default=None,
                   help="weight on the first model (default 0.5)")
    decode_args(p)
    p.set_defaults(func=cmd_ensemble_generate)

    p = sub.add_parser("evaluate", help="score generations against references")
    p.add_argument("--hyp", required=True, help="generation JSONL")
    p.add_argument("--ref", required=True, help="reference corpus JSONL")
    p.add_argument("--hyp-b", default=None,
                   help="second system's generations: adds a per-example "
                        "GLEU-difference comparison to the report")
    p.add_argument("--gleu-margin", type=float, default=None,
                   help="GLEU-point margin for the two-system comparison "
                        "(default 20)")
    p.add_argument("--config-hash", default=None,
                   help="configuration fingerprint recorded in the report")
    common(p, out_help="write the evaluation report here (JSON)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("graph-dump", help="write context-entity graphs as JSONL")
    p.add_argument("data", help="corpus JSONL file")
    common(p, out_required=True, out_help="graph dump JSONL")
    p.set_defaults(func=cmd_graph_dump)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_config = load_config_file(args.config)
        resolver = Resolver(file_config, args.command)
        return args.func(args, resolver)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, HopqgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
