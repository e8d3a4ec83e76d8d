"""Exit codes, summary output, and override plumbing of the command line."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from feedprio import ExternalServiceError
from feedprio.cli import COMMANDS, build_parser, main

DATA = Path(__file__).resolve().parent.parent / "data"
NOTELY = DATA / "notely"


def notely_config(tmp_path: Path) -> Path:
    payload = {
        "paths": {
            "output_dir": str(tmp_path / "out"),
            "requirements": str(NOTELY / "requirements.csv"),
            "reviews": str(NOTELY / "reviews.csv"),
        },
        "pipeline": {"n_topics": 4, "passes": 5, "seed": 0},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


class TestParser:
    def test_every_command_registered(self):
        parser = build_parser()
        for name in ("ingest", "topics", "prioritize", "evaluate", "mine", "dvalue", "nrp", "report"):
            args = parser.parse_args([name, "--config", "x.json"])
            assert args.command == name
            assert name in COMMANDS

    def test_config_is_required(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            build_parser().parse_args(["ingest"])
        assert excinfo.value.code == 2
        assert "--config" in capsys.readouterr().err

    def test_unknown_command_rejected(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["frobnicate", "--config", "x.json"])
        assert "invalid choice" in capsys.readouterr().err

    def test_set_accumulates(self):
        args = build_parser().parse_args(
            ["topics", "--config", "c.json", "--set", "pipeline.seed=1", "--set", "pipeline.passes=3"]
        )
        assert args.overrides == ["pipeline.seed=1", "pipeline.passes=3"]


class TestExitCodes:
    def test_success_prints_summary_json(self, tmp_path, capsys):
        code = main(["ingest", "--config", str(notely_config(tmp_path))])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary == {"requirements": 15, "messages": 28, "instances": 2}

    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["ingest", "--config", str(tmp_path / "absent.json")])
        assert code == 1
        assert "configuration error" in capsys.readouterr().err

    def test_invalid_json_config(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code = main(["ingest", "--config", str(bad)])
        assert code == 1
        assert "configuration error" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path, capsys):
        config = notely_config(tmp_path)
        code = main(["ingest", "--config", str(config), "--set", "pipeline.bogus=1"])
        assert code == 1
        assert "bogus" in capsys.readouterr().err

    def test_data_error_maps_to_two(self, tmp_path, capsys):
        reqs = tmp_path / "reqs.csv"
        reqs.write_text("id,text,period,app\nr1,single feature,2024-01,solo\n")
        config = notely_config(tmp_path)
        code = main(
            ["prioritize", "--config", str(config), "--set", f"paths.requirements={reqs}"]
        )
        assert code == 2
        assert "data error" in capsys.readouterr().err

    def test_external_error_maps_to_three(self, tmp_path, capsys, monkeypatch):
        def explode(config):
            raise ExternalServiceError("chat endpoint unreachable")

        monkeypatch.setitem(COMMANDS, "mine", explode)
        code = main(["mine", "--config", str(notely_config(tmp_path))])
        assert code == 3
        assert "external service error" in capsys.readouterr().err


class TestOverrideWiring:
    def test_override_reaches_the_command(self, tmp_path, capsys):
        config = notely_config(tmp_path)
        code = main(["topics", "--config", str(config), "--set", "pipeline.n_topics=2"])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["topics"] == 2

    def test_malformed_override(self, tmp_path, capsys):
        code = main(["ingest", "--config", str(notely_config(tmp_path)), "--set", "nodot=1"])
        assert code == 1
        assert "configuration error" in capsys.readouterr().err

    def test_full_prioritize_run(self, tmp_path, capsys):
        config = notely_config(tmp_path)
        code = main(["prioritize", "--config", str(config)])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["metrics_rows"] == 30
        assert (tmp_path / "out" / "metrics.csv").exists()
