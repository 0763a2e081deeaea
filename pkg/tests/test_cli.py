"""Command-line interface: verbs, config file, precedence chain."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from tzr import RetrievalIndex
from tzr.cli import main, parse_config_file, resolve_engine_config
from tzr.index import load_eval_pairs
from tzr.pipeline import PipelineParams


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def ingested(small_corpus, tmp_path_factory):
    """A CLI-produced index over the small corpus."""
    index_path = tmp_path_factory.mktemp("cli") / "cli.idx"
    result = CliRunner().invoke(
        main, ["ingest", small_corpus.directory, "--index", str(index_path)]
    )
    assert result.exit_code == 0, result.output
    return index_path


class TestIngestVerb:
    def test_report_and_index_file(self, ingested):
        index = RetrievalIndex.load(ingested)
        assert len(index) == 8

    def test_summary_lines(self, runner, small_corpus, tmp_path):
        result = runner.invoke(
            main, ["ingest", small_corpus.directory, "--index", str(tmp_path / "a.idx")]
        )
        assert result.exit_code == 0
        assert "frames processed: 8" in result.output
        assert "failures: 0" in result.output

    def test_missing_source_rejected(self, runner, tmp_path):
        result = runner.invoke(main, ["ingest", str(tmp_path / "nope")])
        assert result.exit_code != 0

    def test_mode_flag(self, runner, small_corpus, tmp_path):
        path = tmp_path / "g.idx"
        result = runner.invoke(
            main,
            ["ingest", small_corpus.directory, "--index", str(path), "--mode", "global_only"],
        )
        assert result.exit_code == 0
        index = RetrievalIndex.load(path)
        assert all(len(r.regions) == 0 for r in index.records())


class TestSearchVerb:
    def test_planted_frame_first(self, runner, ingested, small_corpus):
        bucket = small_corpus.buckets[4]
        result = runner.invoke(
            main, ["search", f"color:{bucket}", "--index", str(ingested), "--k", "3"]
        )
        assert result.exit_code == 0, result.output
        first = result.output.splitlines()[0]
        assert first.startswith("  1. frame      4")
        assert "+1.0000" in first

    def test_global_only_flag(self, runner, ingested):
        result = runner.invoke(
            main, ["search", "color:0", "--index", str(ingested), "--global-only", "--k", "2"]
        )
        assert result.exit_code == 0
        assert all("global" in line for line in result.output.splitlines())

    def test_missing_index_fails(self, runner, tmp_path):
        result = runner.invoke(main, ["search", "q", "--index", str(tmp_path / "no.idx")])
        assert result.exit_code != 0
        assert "Error: file not found:" in result.output
        assert "Traceback" not in result.output

    def test_blank_query_clean_error(self, runner, ingested):
        result = runner.invoke(main, ["search", "", "--index", str(ingested)])
        assert result.exit_code != 0
        assert "Error: empty query text" in result.output

    def test_corrupt_index_clean_error(self, runner, tmp_path):
        bad = tmp_path / "bad.idx"
        bad.write_bytes(b"definitely not an index file")
        result = runner.invoke(main, ["search", "q", "--index", str(bad)])
        assert result.exit_code != 0
        assert "Error:" in result.output and "bad magic" in result.output
        assert "Traceback" not in result.output


class TestEvalVerb:
    def test_recall_lines_match_library(self, runner, ingested, small_corpus, encoder):
        pairs_file = str(Path(small_corpus.directory) / "pairs.jsonl")
        result = runner.invoke(
            main, ["eval", pairs_file, "--index", str(ingested), "--k", "1", "--k", "5"]
        )
        assert result.exit_code == 0, result.output
        index = RetrievalIndex.load(ingested)
        pairs = load_eval_pairs(pairs_file)
        for k in (1, 5):
            want = index.recall_at_k(pairs, k, encoder)
            assert f"recall@{k} = {want:.4f}" in result.output

    def test_header_counts(self, runner, ingested, small_corpus):
        pairs_file = str(Path(small_corpus.directory) / "pairs.jsonl")
        result = runner.invoke(main, ["eval", pairs_file, "--index", str(ingested)])
        assert "8 queries against 8 frames" in result.output

    def test_malformed_pairs_clean_error(self, runner, ingested, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("not json at all\n", encoding="utf-8")
        result = runner.invoke(main, ["eval", str(bad), "--index", str(ingested)])
        assert result.exit_code != 0
        assert "Error:" in result.output and "bad eval pair" in result.output
        assert "Traceback" not in result.output


class TestAnalyzeVerb:
    def test_stage_summary_and_json(self, runner, small_corpus, tmp_path):
        image = str(Path(small_corpus.directory) / "frame_0000.png")
        bucket = small_corpus.buckets[0]
        out = tmp_path / "stages.json"
        result = runner.invoke(
            main, ["analyze", image, "--query", f"color:{bucket}", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert "image 512x512" in result.output
        assert "low-attention windows:" in result.output
        assert "best: region:" in result.output

        payload = json.loads(out.read_text())
        assert payload["best"]["score"] == pytest.approx(1.0, abs=1e-5)
        assert payload["best"]["source"].startswith("region:")
        assert len(payload["crops"]) == len(payload["regions"])

    def test_query_optional(self, runner, small_corpus):
        image = str(Path(small_corpus.directory) / "frame_0001.png")
        result = runner.invoke(main, ["analyze", image])
        assert result.exit_code == 0
        assert "global cosine" not in result.output

    def test_undecodable_image(self, runner, tmp_path):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"nope")
        result = runner.invoke(main, ["analyze", str(bad)])
        assert result.exit_code != 0
        assert "undecodable" in result.output


class TestDensesetVerb:
    def test_writes_pairs_and_captions(self, runner, tmp_path):
        doc = {
            "images": [
                {"id": i, "file_name": f"{i}.jpg", "width": 64, "height": 64}
                for i in range(1, 11)
            ],
            "annotations": (
                [{"image_id": 1, "category_id": 1}] * 5
                + [{"image_id": 1, "category_id": 2}]
                + [{"image_id": j, "category_id": 1} for j in range(2, 11)]
            ),
            "categories": [{"id": 1, "name": "person"}, {"id": 2, "name": "dog"}],
        }
        ann_path = tmp_path / "instances.json"
        ann_path.write_text(json.dumps(doc))
        out = tmp_path / "pairs.jsonl"
        csv = tmp_path / "captions.csv"
        result = runner.invoke(
            main,
            ["denseset", str(ann_path), "--out", str(out), "--captions-out", str(csv)],
        )
        assert result.exit_code == 0, result.output
        pairs = load_eval_pairs(out)
        assert [(p.query, set(p.relevant)) for p in pairs] == [("dog", {1})]
        assert csv.read_text().splitlines() == [
            "image_id,caption,instance_count",
            "1,dog,6",
        ]
        assert "crowded-decile threshold" in result.output

    def test_malformed_annotations_clean_error(self, runner, tmp_path):
        ann_path = tmp_path / "instances.json"
        ann_path.write_text(json.dumps({"images": [], "annotations": []}))
        result = runner.invoke(main, ["denseset", str(ann_path)])
        assert result.exit_code != 0
        assert "Error: malformed COCO annotations" in result.output
        assert "Traceback" not in result.output


class TestServeVerb:
    def test_missing_index_is_a_clean_error(self, runner, tmp_path):
        result = runner.invoke(main, ["serve", "--index", str(tmp_path / "no.idx")])
        assert result.exit_code != 0
        assert "index not found" in result.output


class TestConfigFile:
    def test_parse_values_comments_quotes(self, tmp_path):
        cfg = tmp_path / "tzr.conf"
        cfg.write_text(
            "# engine setup\n"
            "threshold = 0.25\n"
            "index_path = 'my.idx'  # quoted\n"
            "\n"
            'encoder_url = "builtin:test"\n'
        )
        assert parse_config_file(cfg) == {
            "threshold": "0.25",
            "index_path": "my.idx",
            "encoder_url": "builtin:test",
        }

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "tzr.conf"
        cfg.write_text("warp_speed = 9\n")
        with pytest.raises(Exception, match="unknown config key"):
            parse_config_file(cfg)

    def test_missing_equals_rejected(self, tmp_path):
        cfg = tmp_path / "tzr.conf"
        cfg.write_text("just a line\n")
        with pytest.raises(Exception, match="expected key = value"):
            parse_config_file(cfg)


class TestPrecedence:
    def test_defaults_when_nothing_given(self):
        cfg = resolve_engine_config(None, {})
        assert cfg.index_path == "tzr.idx"
        assert cfg.params == PipelineParams()

    def test_config_file_overrides_defaults(self, tmp_path, monkeypatch):
        monkeypatch.delenv("TZR_ENCODER_URL", raising=False)
        monkeypatch.delenv("TZR_INDEX", raising=False)
        path = tmp_path / "tzr.conf"
        path.write_text("threshold = 0.25\nindex_path = file.idx\nstride = 16\n")
        cfg = resolve_engine_config(str(path), {})
        assert cfg.params.threshold == 0.25
        assert cfg.params.stride == 16
        assert cfg.index_path == "file.idx"

    def test_flags_override_config_file(self, tmp_path, monkeypatch):
        monkeypatch.delenv("TZR_INDEX", raising=False)
        path = tmp_path / "tzr.conf"
        path.write_text("threshold = 0.25\nindex_path = file.idx\n")
        cfg = resolve_engine_config(
            str(path), {"threshold": 0.35, "index_path": "flag.idx"}
        )
        assert cfg.params.threshold == 0.35
        assert cfg.index_path == "flag.idx"

    def test_env_overrides_flags(self, monkeypatch):
        monkeypatch.setenv("TZR_ENCODER_URL", "http://env.example")
        monkeypatch.setenv("TZR_INDEX", "env.idx")
        cfg = resolve_engine_config(
            None, {"encoder_url": "builtin:test", "index_path": "flag.idx"}
        )
        assert cfg.encoder_url == "http://env.example"
        assert cfg.index_path == "env.idx"

    def test_env_index_redirects_cli_ingest(self, runner, small_corpus, tmp_path, monkeypatch):
        env_path = tmp_path / "env.idx"
        flag_path = tmp_path / "flag.idx"
        monkeypatch.setenv("TZR_INDEX", str(env_path))
        result = runner.invoke(
            main, ["ingest", small_corpus.directory, "--index", str(flag_path)]
        )
        assert result.exit_code == 0, result.output
        assert env_path.exists()
        assert not flag_path.exists()

    def test_kmeans_flags_reach_params(self, monkeypatch):
        monkeypatch.delenv("TZR_ENCODER_URL", raising=False)
        monkeypatch.delenv("TZR_INDEX", raising=False)
        cfg = resolve_engine_config(None, {"kmeans_max_iters": 7, "kmeans_tol": 0.001})
        assert cfg.params.kmeans_max_iters == 7
        assert cfg.params.kmeans_tol == 0.001

    def test_bad_mode_rejected(self):
        with pytest.raises(Exception, match="mode must be"):
            resolve_engine_config(None, {"mode": "psychic"})

    def test_bad_numeric_config_value(self, tmp_path):
        path = tmp_path / "tzr.conf"
        path.write_text("threshold = not_a_number\n")
        with pytest.raises(Exception, match="threshold"):
            resolve_engine_config(str(path), {})


class TestTopLevel:
    def test_version_flag(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0

    def test_help_lists_verbs(self, runner):
        result = runner.invoke(main, ["--help"])
        for verb in ("ingest", "search", "eval", "analyze", "denseset", "serve"):
            assert verb in result.output
