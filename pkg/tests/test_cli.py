from __future__ import annotations

import json
import os

import pytest

from escaperoom.cli import main, parse_seeds


class TestParseSeeds:
    def test_inclusive_range(self):
        assert parse_seeds("0..10") == list(range(11))

    def test_single_and_list(self):
        assert parse_seeds("7") == [7]
        assert parse_seeds("1,4,9") == [1, 4, 9]


@pytest.fixture(scope="module")
def oracle_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    rc = main(
        [
            "run",
            "--difficulty", "d1",
            "--style", "bedroom",
            "--seeds", "0..10",
            "--agent", "oracle",
            "--out", str(out),
        ]
    )
    assert rc == 0
    return out


class TestCommands:
    def test_generate_writes_validating_scenes(self, tmp_path, capsys):
        out = tmp_path / "scenes"
        rc = main(
            [
                "generate",
                "--difficulty", "d3-note-key",
                "--style", "kitchen",
                "--seeds", "0..2",
                "--out", str(out),
            ]
        )
        assert rc == 0
        files = sorted(os.listdir(out))
        assert len(files) == 3
        rc = main(["validate", *(str(out / f) for f in files)])
        captured = capsys.readouterr()
        assert rc == 0
        assert captured.out.count("OK") == 3

    def test_report_over_eleven_oracle_d1_scenes(self, oracle_run, capsys):
        rc = main(["report", "--logs", str(oracle_run / "logs")])
        assert rc == 0
        table = capsys.readouterr().out
        assert "100.00" in table  # the ER cell
        assert "AVG ER" in table
        assert "correlation vs optimal: 1.000" in table

    def test_replay_clean_at_cli_level(self, oracle_run, capsys):
        logs = sorted(os.listdir(oracle_run / "logs"))
        rc = main(
            [
                "replay",
                "--log", str(oracle_run / "logs" / logs[0]),
                "--scenes", str(oracle_run / "scenes"),
            ]
        )
        assert rc == 0
        assert "OK" in capsys.readouterr().out

    def test_judge_with_stub(self, oracle_run, capsys):
        rc = main(["judge", "--logs", str(oracle_run / "logs"), "--stub"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "mean C_IO: 1.0000" in out
        assert "excluded as unusable: 0" in out

    def test_debrief_echo_player(self, oracle_run, capsys):
        rc = main(
            [
                "debrief",
                "--logs", str(oracle_run / "logs"),
                "--scenes", str(oracle_run / "scenes"),
            ]
        )
        assert rc == 0
        assert "Average Score: 5.00" in capsys.readouterr().out

    def test_report_json_output(self, oracle_run, tmp_path, capsys):
        target = tmp_path / "report.json"
        rc = main(["report", "--logs", str(oracle_run / "logs"), "--json", str(target)])
        assert rc == 0
        data = json.loads(target.read_text())
        assert data["groups"]["d1"]["escape_rate_pct"] == "100.00"
        assert data["groups"]["d1"]["n"] == 11

    def test_tampered_log_fails_replay(self, oracle_run, tmp_path, capsys):
        logs = sorted(os.listdir(oracle_run / "logs"))
        source = (oracle_run / "logs" / logs[0]).read_text()
        lines = source.splitlines()
        step = json.loads(lines[1])
        step["feedback_text"] = "Nothing happened at all."
        lines[1] = json.dumps(step)
        bad = tmp_path / "tampered.jsonl"
        bad.write_text("\n".join(lines) + "\n")
        rc = main(["replay", "--log", str(bad), "--scenes", str(oracle_run / "scenes")])
        assert rc == 1
