import json
from pathlib import Path

import pytest

from quotekg.cli import main as cli_main
from quotekg.pipeline import (
    CLUSTERS_FILE,
    MENTIONS_FILE,
    RAW_QUOTES_FILE,
    PipelineError,
    discover_dumps,
    run,
)
from quotekg.rules import ConfigError

from fixture_paths import FIXTURES

ARTIFACTS = [RAW_QUOTES_FILE, MENTIONS_FILE, CLUSTERS_FILE, "quotekg.nt", "quotekg.ttl", "void.ttl"]


def read_bytes(path: Path, name: str) -> bytes:
    return (path / name).read_bytes()


class TestDiscovery:
    def test_dump_names_parsed(self):
        descriptors = discover_dumps(str(FIXTURES / "dumps"))
        assert [d.language_code for d in descriptors] == ["de", "en", "fr"]
        assert all(d.page_count_estimate >= 1 for d in descriptors)

    def test_missing_dir_is_config_error(self):
        with pytest.raises(ConfigError):
            discover_dumps("no/such/dir")


class TestStages:
    def test_run_all_matches_golden(self, fixture_config, tmp_path):
        out = tmp_path / "all"
        run("all", fixture_config(out=out))
        for name in ("quotekg.nt", "quotekg.ttl", "void.ttl"):
            assert read_bytes(out, name) == (FIXTURES / "golden" / name).read_bytes(), name

    def test_stage_composition_equals_run_all(self, fixture_config, tmp_path):
        staged = tmp_path / "staged"
        config = fixture_config(out=staged)
        for stage in ("extract", "enrich", "align", "emit"):
            run(stage, config)
        combined = tmp_path / "combined"
        run("all", fixture_config(out=combined))
        for name in ARTIFACTS:
            assert read_bytes(staged, name) == read_bytes(combined, name), name

    def test_extract_twice_byte_identical(self, fixture_config, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        run("extract", fixture_config(out=first))
        run("extract", fixture_config(out=second))
        assert read_bytes(first, RAW_QUOTES_FILE) == read_bytes(second, RAW_QUOTES_FILE)

    def test_align_without_enrich_names_missing_file(self, fixture_config, tmp_path):
        config = fixture_config(out=tmp_path / "bare")
        with pytest.raises(PipelineError, match=MENTIONS_FILE):
            run("align", config)
        with pytest.raises(PipelineError, match="enrich"):
            run("align", config)

    def test_emit_without_align_names_missing_file(self, fixture_config, tmp_path):
        config = fixture_config(out=tmp_path / "bare")
        with pytest.raises(PipelineError, match=CLUSTERS_FILE):
            run("emit", config)

    def test_counters_consistent(self, fixture_config, tmp_path):
        report = run("all", fixture_config(out=tmp_path / "out"))
        counters = report.counters
        assert counters["mentions"] >= counters["emitted_quotes"] >= 0
        assert counters["emitted_mentions"] == counters["mentions"]
        assert counters["pages_seen"] >= counters["person_pages"]
        assert counters["raw_quotes"] <= counters["mentions"]
        assert counters["persons"] == counters["emitted_persons"]

    def test_report_written_deterministically(self, fixture_config, tmp_path):
        out = tmp_path / "out"
        run("all", fixture_config(out=out))
        first = read_bytes(out, "report.json")
        run("all", fixture_config(out=out))
        assert read_bytes(out, "report.json") == first

    def test_jobs_parallelism_is_deterministic(self, fixture_config, tmp_path):
        serial, parallel = tmp_path / "serial", tmp_path / "parallel"
        run("all", fixture_config(out=serial))
        run("all", fixture_config(out=parallel, jobs=4))
        for name in ARTIFACTS:
            assert read_bytes(serial, name) == read_bytes(parallel, name), name

    def test_language_filter(self, fixture_config, tmp_path):
        out = tmp_path / "only-de"
        run("all", fixture_config(out=out, languages=["de"]))
        rows = [json.loads(l) for l in (out / CLUSTERS_FILE).read_text().splitlines()][1:]
        assert {r["person"]["canonical_label"] for r in rows} == {"Angela Merkel"}

    def test_min_pages_excludes_small_editions(self, fixture_config, tmp_path):
        out = tmp_path / "strict"
        report = run("extract", fixture_config(out=out, min_pages=50))
        assert report.counters["editions"] == []
        assert report.counters["raw_quotes"] == 0

    def test_threshold_validation(self, fixture_config, tmp_path):
        with pytest.raises(ConfigError, match="threshold"):
            run("all", fixture_config(out=tmp_path / "x", threshold=1.5))

    def test_unknown_stage(self, fixture_config, tmp_path):
        with pytest.raises(ConfigError, match="unknown stage"):
            run("polish", fixture_config(out=tmp_path / "x"))

    def test_unreachable_endpoint_degrades_and_flags(self, fixture_config, tmp_path):
        config = fixture_config(out=tmp_path / "deg", nlp_endpoint="http://127.0.0.1:9")
        report = run("all", config)
        assert report.degraded is True
        # artifacts still match the offline golden output
        assert read_bytes(tmp_path / "deg", "quotekg.nt") == (
            FIXTURES / "golden" / "quotekg.nt"
        ).read_bytes()

    def test_degraded_header_recorded(self, fixture_config, tmp_path):
        out = tmp_path / "out"
        run("all", fixture_config(out=out))
        header = json.loads((out / MENTIONS_FILE).read_text().splitlines()[0])
        assert header["degraded"] is True  # offline fallback mode
        assert header["format"] == "quotekg/mentions"


class TestCli:
    def base_args(self, out):
        return [
            "run",
            "all",
            "--dumps-dir",
            str(FIXTURES / "dumps"),
            "--sitelinks",
            str(FIXTURES / "sitelinks.tsv"),
            "--min-pages",
            "1",
            "--out",
            str(out),
        ]

    def test_run_all_exit_zero(self, tmp_path, capsys):
        assert cli_main(self.base_args(tmp_path / "out")) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["counters"]["emitted_quotes"] == 5

    def test_missing_stage_artifact_exit_three(self, tmp_path, capsys):
        code = cli_main(
            ["run", "align", "--out", str(tmp_path / "empty"), "--dumps-dir", str(FIXTURES / "dumps")]
        )
        assert code == 3
        assert MENTIONS_FILE in capsys.readouterr().err

    def test_config_error_exit_two(self, tmp_path, capsys):
        args = self.base_args(tmp_path / "out") + ["--threshold", "7"]
        assert cli_main(args) == 2

    def test_degraded_endpoint_exit_four(self, tmp_path):
        args = self.base_args(tmp_path / "out") + ["--nlp-endpoint", "http://127.0.0.1:9"]
        assert cli_main(args) == 4

    def test_stats_from_graph(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert cli_main(self.base_args(out)) == 0
        capsys.readouterr()
        assert cli_main(["stats", "--graph", str(out / "quotekg.nt"), "--json"]) == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["total"] == {
            "persons": 2,
            "quotes": 5,
            "mentions": 6,
            "mentions_with_context": 4,
            "triples": 74,
        }
        assert stats["per_language"]["en"]["quotes"] == 3
        assert stats["per_language"]["fr"] == {
            "persons": 1,
            "quotes": 1,
            "mentions": 1,
            "mentions_with_context": 0,
        }

    def test_stats_from_clusters_agrees_with_graph(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert cli_main(self.base_args(out)) == 0
        capsys.readouterr()
        assert cli_main(["stats", "--clusters", str(out / CLUSTERS_FILE), "--json"]) == 0
        from_clusters = json.loads(capsys.readouterr().out)
        assert cli_main(["stats", "--graph", str(out / "quotekg.nt"), "--json"]) == 0
        from_graph = json.loads(capsys.readouterr().out)
        assert from_clusters["per_language"] == from_graph["per_language"]

    def test_eval_command(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert cli_main(self.base_args(out)) == 0
        capsys.readouterr()
        gold_line = {
            "person": "Albert Einstein",
            "clusters": [
                [
                    {
                        "language": "en",
                        "text": "Falling in love is not at all the most stupid thing that people do — but gravitation cannot be held responsible for it.",
                    },
                    {
                        "language": "fr",
                        "text": "Tomber amoureux n'est pas du tout la chose la plus stupide que font les gens — mais la gravitation ne peut en être tenue pour responsable.",
                    },
                ],
                [{"language": "en", "text": "Imagination is more important than knowledge."}],
                [
                    {
                        "language": "en",
                        "text": "Everything is energy and that's all there is to it. It can be no other way. This is not philosophy. This is physics.",
                    }
                ],
            ],
        }
        gold_path = tmp_path / "gold.ndjson"
        gold_path.write_text(json.dumps(gold_line, ensure_ascii=False) + "\n", encoding="utf-8")
        code = cli_main(
            ["eval", "--gold", str(gold_path), "--predicted", str(out / CLUSTERS_FILE), "--json"]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        row = payload["per_person"][0]
        # offline embeddings cannot align the French translation: one missed pair
        assert row["fp"] == 0 and row["fn"] == 1
        assert row["precision"] == 1.0

    def test_version_flag(self, capsys):
        assert cli_main(["--version"]) == 0
        out = capsys.readouterr().out
        assert "quotekg" in out and "fallback-char-trigram-512" in out

    def test_emit_raw_and_dump_clusters_copies(self, tmp_path):
        out = tmp_path / "out"
        raw_copy = tmp_path / "raw-copy.ndjson"
        clusters_copy = tmp_path / "clusters-copy.ndjson"
        args = self.base_args(out) + [
            "--emit-raw",
            str(raw_copy),
            "--dump-clusters",
            str(clusters_copy),
        ]
        assert cli_main(args) == 0
        assert raw_copy.read_bytes() == (out / RAW_QUOTES_FILE).read_bytes()
        assert clusters_copy.read_bytes() == (out / CLUSTERS_FILE).read_bytes()
