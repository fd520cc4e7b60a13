"""CLI behaviour: golden byte-identity, determinism, config files, exit codes."""

import json
import subprocess
import sys

import pytest

from revrank.cli import main

GOLDEN_COMMANDS = {
    "reranked_positive.jsonl": [
        "rerank",
        "--candidates", "tests/data/candidates.jsonl",
        "--sims", "tests/data/sims.jsonl",
        "--embeddings", "tests/data/embeddings.txt",
        "--corpus", "tests/data/corpus.txt",
        "--variant", "positive",
    ],
    "reranked_fusion.jsonl": [
        "rerank",
        "--candidates", "tests/data/candidates.jsonl",
        "--sims", "tests/data/sims.jsonl",
        "--embeddings", "tests/data/embeddings.txt",
        "--corpus", "tests/data/corpus.txt",
        "--variant", "two-context-fusion", "--prior-source", "beam",
        "--informativeness", "multi-mean",
    ],
    "enriched.jsonl": [
        "enrich",
        "--detections", "tests/data/detections.jsonl",
        "--captions", "tests/data/captions_enrich.jsonl",
        "--embeddings", "tests/data/embeddings.txt",
        "--tau", "0.2", "--topk", "3",
    ],
    "significance_seed7.json": [
        "significance",
        "--scores", "tests/data/scores_ab.jsonl",
        "--test", "both", "--trials", "1000", "--seed", "7",
    ],
}


@pytest.fixture(autouse=True)
def run_from_repo_root(monkeypatch, repo_root):
    monkeypatch.chdir(repo_root)


class TestGoldenFiles:
    @pytest.mark.parametrize("name", sorted(GOLDEN_COMMANDS))
    def test_output_matches_committed_golden(self, name, tmp_path, repo_root):
        out = tmp_path / name
        assert main([*GOLDEN_COMMANDS[name], "--out", str(out)]) == 0
        golden = repo_root / "tests" / "data" / "golden" / name
        assert out.read_bytes() == golden.read_bytes()

    def test_two_runs_byte_identical(self, tmp_path):
        outs = []
        for i in (1, 2):
            out = tmp_path / f"run{i}.jsonl"
            assert main([*GOLDEN_COMMANDS["reranked_positive.jsonl"],
                         "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_rerun_from_provenance_block_reproduces_bytes(self, tmp_path, repo_root):
        golden = repo_root / "tests" / "data" / "golden" / "reranked_positive.jsonl"
        block = json.loads(golden.read_text().splitlines()[0])["provenance"]
        argv = [block["subcommand"]]
        for key, value in block["options"].items():
            argv += [f"--{key.replace('_', '-')}", str(value)]
        out = tmp_path / "replay.jsonl"
        assert main([*argv, "--out", str(out)]) == 0
        assert out.read_bytes() == golden.read_bytes()

    def test_parallel_jobs_preserve_record_bytes(self, tmp_path):
        argv = GOLDEN_COMMANDS["reranked_positive.jsonl"]
        seq = tmp_path / "seq.jsonl"
        par = tmp_path / "par.jsonl"
        assert main([*argv, "--out", str(seq)]) == 0
        assert main([*argv, "--jobs", "3", "--out", str(par)]) == 0
        # provenance embeds the worker count; every record line must match
        seq_lines = seq.read_text().splitlines()[1:]
        par_lines = par.read_text().splitlines()[1:]
        assert seq_lines == par_lines


class TestScore:
    def test_positive_example(self, capsys):
        assert main(["score", "--prior", "0.5", "--sim", "0.5", "--pc", "0.2",
                     "--variant", "positive"]) == 0
        value = float(capsys.readouterr().out.strip())
        assert value == pytest.approx(0.7498928398623983, abs=1e-9)

    def test_negative_example(self, capsys):
        assert main(["score", "--prior", "0.5", "--sim", "0.5", "--pc", "0.2",
                     "--variant", "negative"]) == 0
        value = float(capsys.readouterr().out.strip())
        assert value == pytest.approx(0.2501071601376017, abs=1e-9)

    def test_fusion_requires_second_context(self, capsys):
        assert main(["score", "--prior", "0.5", "--sim", "0.5", "--pc", "0.2",
                     "--variant", "two-context-fusion"]) == 4

    def test_fusion_value(self, capsys):
        assert main(["score", "--prior", "0.5", "--sim", "0.6", "--pc", "0.9",
                     "--sim2", "0.4", "--pc2", "0.8", "--variant",
                     "two-context-fusion"]) == 0
        a1 = ((1 - 0.6) / (1 + 0.6)) ** (1 - 0.9)
        a2 = ((1 - 0.4) / (1 + 0.4)) ** (1 - 0.8)
        c1, c2 = 0.5 ** a1, 0.5 ** a2
        beta = 0.9
        expected = beta * max(c1, c2) + (1 - beta) * (c1 + c2 - c1 * c2)
        value = float(capsys.readouterr().out.strip())
        assert value == pytest.approx(expected, abs=1e-12)


class TestSignificanceCLI:
    def test_repeat_runs_identical(self, tmp_path):
        argv = GOLDEN_COMMANDS["significance_seed7.json"]
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        assert main([*argv, "--out", str(a)]) == 0
        assert main([*argv, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_metric_recompute_path(self, tmp_path):
        out = tmp_path / "sig.json"
        assert main([
            "significance",
            "--a", "tests/data/hyp_beam.jsonl",
            "--b", "tests/data/hyp_beam.jsonl",
            "--refs", "tests/data/refs.jsonl",
            "--metric", "bleu", "--test", "ar",
            "--trials", "200", "--seed", "3",
            "--out", str(out),
        ]) == 0
        report = json.loads(out.read_text())
        result = report["results"][0]
        assert result["observed_delta"] == 0.0
        assert result["p_value"] == 1.0


class TestMetricsCLI:
    def test_report_structure(self, tmp_path):
        out = tmp_path / "report.json"
        assert main([
            "metrics",
            "--hyp", "tests/data/hyp_beam.jsonl",
            "--refs", "tests/data/refs.jsonl",
            "--metrics", "bleu,rouge",
            "--out", str(out),
        ]) == 0
        report = json.loads(out.read_text())
        assert set(report["metrics"]) == {"bleu", "rouge_l"}
        assert len(report["metrics"]["bleu"]["per_item"]) == 50
        assert report["provenance"]["subcommand"] == "metrics"

    def test_reranked_file_accepted_as_hyp(self, tmp_path):
        out = tmp_path / "report.json"
        assert main([
            "metrics",
            "--hyp", "tests/data/golden/reranked_positive.jsonl",
            "--refs", "tests/data/refs.jsonl",
            "--metrics", "bleu",
            "--out", str(out),
        ]) == 0
        assert json.loads(out.read_text())["metrics"]["bleu"]["corpus_value"] > 0


class TestDiversityCLI:
    def test_grouped_input_with_mbleu(self, tmp_path):
        out = tmp_path / "div.json"
        assert main([
            "diversity",
            "--captions", "tests/data/golden/reranked_positive.jsonl",
            "--refs", "tests/data/refs.jsonl",
            "--mbleu-mode", "best5",
            "--out", str(out),
        ]) == 0
        report = json.loads(out.read_text())
        assert 0 < report["ttr"] <= 1
        assert report["mtld"] > 0
        assert 0 < report["div1"] <= 1
        assert report["mbleu"]["corpus_value"] > 0
        assert report["vocab"]["distinct"] > 0

    def test_flat_text_input(self, tmp_path):
        captions = tmp_path / "captions.txt"
        captions.write_text("a dog on a bench\na cat on a mat\n")
        out = tmp_path / "div.json"
        assert main(["diversity", "--captions", str(captions),
                     "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["captions"] == 2


class TestConfigFile:
    def test_config_supplies_defaults_flags_override(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("# scoring defaults\nprior = 0.5\nsim = 0.5\npc = 0.2\n")
        assert main(["score", "--config", str(config), "--prior", "0.5",
                     "--sim", "0.0", "--pc", "0.2"]) == 0
        value = float(capsys.readouterr().out.strip())
        assert value == 0.5  # --sim 0.0 overrides the config's 0.5: no revision

    def test_unknown_config_key(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("bogus = 1\n")
        assert main(["score", "--config", str(config), "--prior", "0.5",
                     "--sim", "0.5", "--pc", "0.2"]) == 4


class TestExitCodes:
    def test_missing_file_is_io_error(self, capsys):
        assert main(["rerank", "--candidates", "nope.jsonl",
                     "--sims", "tests/data/sims.jsonl"]) == 3
        err = json.loads(capsys.readouterr().err)
        assert "nope.jsonl" in err["message"]

    def test_validation_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("not json\n")
        assert main(["rerank", "--candidates", str(bad),
                     "--sims", "tests/data/sims.jsonl"]) == 4
        assert json.loads(capsys.readouterr().err)["error"] == "ParseError"

    def test_usage_error_via_subprocess(self):
        proc = subprocess.run(
            [sys.executable, "-m", "revrank.cli", "rerank"],
            capture_output=True, text=True)
        assert proc.returncode == 2

    def test_console_script_runs(self):
        proc = subprocess.run(
            [sys.executable, "-m", "revrank.cli", "score", "--prior", "0.5",
             "--sim", "0.5", "--pc", "0.2"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert float(proc.stdout.strip()) == pytest.approx(0.7498928398623983)
