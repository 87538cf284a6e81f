"""End-to-end CLI coverage on tiny corpora: every subcommand, exit codes,
help-text goldens, seed reproducibility."""

import json
import os
from pathlib import Path

import pytest

from hopqg import synth
from hopqg.cli import build_parser, main
from hopqg.corpus import example_to_record, save_examples

GOLDEN = Path(__file__).parent / "golden"
SUBCOMMANDS = ["validate", "filter", "split", "stats", "train", "generate",
               "ensemble-generate", "evaluate", "graph-dump"]


@pytest.fixture()
def corpus_file(tmp_path):
    examples = synth.make_corpus(12, seed=31, comparison_fraction=0.2,
                                 long_easy_fraction=0.2)
    path = tmp_path / "corpus.jsonl"
    save_examples(examples, path)
    return path


class TestHelpGoldens:
    @pytest.mark.parametrize("name", SUBCOMMANDS)
    def test_help_matches_golden(self, name):
        os.environ["COLUMNS"] = "80"
        parser = build_parser()
        sub = parser._subparsers._group_actions[0].choices[name]
        expected = (GOLDEN / f"help_{name}.txt").read_text()
        assert sub.format_help() == expected

    @pytest.mark.parametrize("name", SUBCOMMANDS)
    def test_help_documents_common_flags(self, name):
        text = (GOLDEN / f"help_{name}.txt").read_text()
        for flag in ("--config", "--seed", "--out"):
            assert flag in text


class TestExitCodes:
    def test_unknown_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["validate", "x.jsonl", "--bogus"])
        assert excinfo.value.code == 2

    def test_validation_failure_exits_1(self, tmp_path, capsys):
        bad = example_to_record(synth.make_corpus(1, seed=0)[0])
        bad["qtype"] = "nope"
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(bad) + "\n")
        assert main(["validate", str(path)]) == 1
        assert "qtype" in capsys.readouterr().err

    def test_clean_corpus_exits_0(self, corpus_file, capsys):
        assert main(["validate", str(corpus_file)]) == 0

    def test_config_error_exits_2(self, corpus_file, tmp_path, capsys):
        # n_dev larger than the corpus
        code = main(["split", str(corpus_file),
                     "--train-out", str(tmp_path / "t.jsonl"),
                     "--dev-out", str(tmp_path / "d.jsonl"),
                     "--n-dev", "99"])
        assert code == 2

    def test_broken_config_file_exits_2(self, corpus_file, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        code = main(["stats", str(corpus_file), "--config", str(cfg)])
        assert code == 2


class TestDataCommands:
    def test_filter_writes_output_and_report(self, corpus_file, tmp_path, capsys):
        out = tmp_path / "filtered.jsonl"
        report = tmp_path / "report.json"
        code = main(["filter", str(corpus_file), str(out),
                     "--max-words", "30", "--report", str(report)])
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["kept"] + payload["removed"] == 12
        assert payload["removed"] >= 1  # the long-easy spike
        assert out.exists()

    def test_config_file_supplies_max_words(self, corpus_file, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"filter": {"max_words": 5}}))
        out = tmp_path / "filtered.jsonl"
        assert main(["filter", str(corpus_file), str(out), "--config", str(cfg)]) == 0
        stdout = capsys.readouterr().out
        assert json.loads(stdout.splitlines()[-1])["max_words"] == 5

    def test_cli_flag_beats_config_file(self, corpus_file, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"filter": {"max_words": 5}}))
        out = tmp_path / "filtered.jsonl"
        main(["filter", str(corpus_file), str(out), "--config", str(cfg),
              "--max-words", "9"])
        stdout = capsys.readouterr().out
        assert json.loads(stdout.splitlines()[-1])["max_words"] == 9

    def test_split_deterministic_under_seed(self, corpus_file, tmp_path, capsys):
        outputs = []
        for run in ("a", "b"):
            train_out = tmp_path / f"train_{run}.jsonl"
            dev_out = tmp_path / f"dev_{run}.jsonl"
            assert main(["split", str(corpus_file), "--train-out", str(train_out),
                         "--dev-out", str(dev_out), "--n-dev", "3",
                         "--seed", "11"]) == 0
            outputs.append(train_out.read_text() + dev_out.read_text())
        assert outputs[0] == outputs[1]

    def test_stats_reports_counts(self, corpus_file, tmp_path, capsys):
        out = tmp_path / "stats.json"
        assert main(["stats", str(corpus_file), "--out", str(out)]) == 0
        stats = json.loads(out.read_text())
        assert stats["n_examples"] == 12
        assert sum(stats["question_length_hist"].values()) == 12

    def test_graph_dump(self, corpus_file, tmp_path, capsys):
        out = tmp_path / "graphs.jsonl"
        assert main(["graph-dump", str(corpus_file), "--out", str(out)]) == 0
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(lines) == 12
        assert all({"nodes", "edges", "relations", "id"} <= set(l) for l in lines)


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory):
    """One tiny TE training run shared by the pipeline tests."""
    root = tmp_path_factory.mktemp("pipeline")
    examples = synth.make_corpus(10, seed=41)
    data = root / "train.jsonl"
    save_examples(examples, data)
    dev = root / "dev.jsonl"
    save_examples(synth.make_corpus(3, seed=42), dev)
    cfg = root / "cfg.json"
    cfg.write_text(json.dumps({
        "model": {"layers": 1, "heads": 2, "d_model": 16, "d_ff": 16,
                  "dropout": 0.0, "label_smoothing": 0.0},
        "train": {"max_steps": 8, "token_budget": 800, "warmup_steps": 100,
                  "checkpoint_every": 4, "log_every": 4},
    }))
    run_dir = root / "run"
    code = main(["train", "--data", str(data), "--dev", str(dev),
                 "--config", str(cfg), "--out", str(run_dir), "--seed", "3"])
    assert code == 0
    return root, data, run_dir


class TestPipeline:
    def test_train_outputs(self, trained_run, capsys):
        _root, _data, run_dir = trained_run
        assert (run_dir / "vocab.txt").exists()
        assert (run_dir / "best" / "manifest.json").exists()
        assert (run_dir / "metrics.jsonl").exists()
        summary = json.loads((run_dir / "summary.json").read_text())
        assert summary["steps"] == 8

    def test_generate_and_evaluate(self, trained_run, capsys):
        root, data, run_dir = trained_run
        gen = root / "gen.jsonl"
        code = main(["generate", "--checkpoint", str(run_dir / "best"),
                     "--data", str(data), "--vocab", str(run_dir / "vocab.txt"),
                     "--out", str(gen), "--width", "2", "--max-len", "12"])
        assert code == 0
        records = [json.loads(l) for l in gen.read_text().splitlines()]
        assert len(records) == 10
        assert all({"id", "question_text", "normalized_score",
                    "predicted_supporting_facts"} <= set(r) for r in records)

        report = root / "report.json"
        code = main(["evaluate", "--hyp", str(gen), "--ref", str(data),
                     "--out", str(report)])
        assert code == 0
        payload = json.loads(report.read_text())
        assert payload["meteor"] == "n/a"
        assert 0.0 <= payload["bleu4"] <= 100.0
        assert payload["sf_f1"] is not None

    def test_evaluate_two_system_gleu_comparison(self, trained_run, capsys):
        root, data, run_dir = trained_run
        gen = root / "gen.jsonl"
        if not gen.exists():
            main(["generate", "--checkpoint", str(run_dir / "best"),
                  "--data", str(data), "--vocab", str(run_dir / "vocab.txt"),
                  "--out", str(gen), "--width", "2", "--max-len", "12"])
        report = root / "diff_report.json"
        code = main(["evaluate", "--hyp", str(gen), "--hyp-b", str(gen),
                     "--ref", str(data), "--out", str(report)])
        assert code == 0
        diff = json.loads(report.read_text())["gleu_diff"]
        assert diff["a_wins"] == 0 and diff["b_wins"] == 0  # identical systems
        assert diff["margin"] == 20.0 and diff["n"] == 10

    def test_ensemble_generate(self, trained_run, capsys):
        root, data, run_dir = trained_run
        gen = root / "ens.jsonl"
        code = main(["ensemble-generate",
                     "--checkpoint-a", str(run_dir / "best"),
                     "--checkpoint-b", str(run_dir / "best"),
                     "--data", str(data), "--vocab", str(run_dir / "vocab.txt"),
                     "--out", str(gen), "--width", "2", "--max-len", "10",
                     "--mix-alpha", "0.5"])
        assert code == 0
        assert len(gen.read_text().splitlines()) == 10

    def test_generate_reproducible_under_seed(self, trained_run, capsys):
        root, data, run_dir = trained_run
        outputs = []
        for tag in ("r1", "r2"):
            gen = root / f"gen_{tag}.jsonl"
            main(["generate", "--checkpoint", str(run_dir / "best"),
                  "--data", str(data), "--vocab", str(run_dir / "vocab.txt"),
                  "--out", str(gen), "--width", "2", "--max-len", "10",
                  "--seed", "5"])
            outputs.append(gen.read_text())
        assert outputs[0] == outputs[1]
