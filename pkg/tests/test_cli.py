import json
from pathlib import Path

import pytest

from lightbot.cli import main
from lightbot.service import ExperimentService, PuzzleSet
from lightbot.world import parse_puzzle

PUZZLE_DIR = Path(__file__).resolve().parents[1] / "src" / "lightbot" / "puzzles"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestCompressVerb:
    def test_tokens_from_file(self, tmp_path, capsys):
        f = tmp_path / "seq.txt"
        f.write_text("walk,walk,light\nwalk walk light\nwalk,walk,light\n")
        code, out = run(capsys, "compress", str(f))
        body = json.loads(out)
        assert code == 0
        assert body["flat_length"] == 9
        assert body["compressed_length"] == 5
        assert body["compressibility_exact"] == "4/9"
        assert body["recursion_applied"] is True
        assert body["program"]["main"] == ["call1"]

    def test_unknown_token_fails(self, tmp_path, capsys):
        f = tmp_path / "seq.txt"
        f.write_text("walk fly\n")
        with pytest.raises(ValueError):
            main(["compress", str(f)])


class TestSolveVerb:
    def test_exact_on_bundled_tutorial(self, capsys):
        code, out = run(capsys, "solve", "--exact", str(PUZZLE_DIR / "T1.json"))
        body = json.loads(out)
        assert code == 0
        assert body["length"] == 3
        assert body["actions"] == ["walk", "walk", "light"]

    def test_exact_unsolvable_exit_code(self, tmp_path, capsys):
        doc = (
            '{"width":2,"height":1,"tiles":[{"h":0,"light":false},{"h":3,"light":true}],'
            '"start":{"x":0,"y":0,"dir":"E"},"name":"x"}'
        )
        f = tmp_path / "p.json"
        f.write_text(doc)
        code, out = run(capsys, "solve", "--exact", str(f))
        assert code == 1
        assert json.loads(out) == {"solvable": False}

    def test_ppo_with_config_override(self, tmp_path, capsys):
        config = tmp_path / "hyper.json"
        config.write_text(
            json.dumps(
                {
                    "horizon": 256,
                    "max_env_steps": 30000,
                    "convergence_window": 10,
                    "convergence_patience": 8,
                    "epochs": 4,
                }
            )
        )
        code, out = run(
            capsys, "solve", "--ppo", str(PUZZLE_DIR / "T1.json"), "--seed", "3", "--config", str(config)
        )
        body = json.loads(out)
        assert code == 0 and body["solved"]
        assert body["length"] >= 3

    def test_ppo_unknown_hyperparameter(self, tmp_path):
        config = tmp_path / "hyper.json"
        config.write_text('{"bogus": 1}')
        with pytest.raises(SystemExit, match="unknown hyperparameter"):
            main(["solve", "--ppo", str(PUZZLE_DIR / "T1.json"), "--config", str(config)])


class TestPuzzleVerbs:
    def test_validate(self, capsys):
        code, out = run(capsys, "puzzle", "validate", str(PUZZLE_DIR / "P1.json"))
        assert code == 0 and "P1" in out and "OK" in out

    def test_show(self, capsys):
        code, out = run(capsys, "puzzle", "show", str(PUZZLE_DIR / "T1.json"))
        assert code == 0
        assert "0.E" in out and "0o" in out

    def test_stats(self, capsys):
        code, out = run(capsys, "puzzle", "stats", str(PUZZLE_DIR / "P1.json"))
        body = json.loads(out)
        assert body["optimal_flat_length"] == 12
        assert body["solvable"] is True

    def test_from_ascii_round_trip(self, tmp_path, capsys):
        grid = tmp_path / "grid.txt"
        grid.write_text("0 0 1*\n0 2 0\n")
        code, out = run(capsys, "puzzle", "from-ascii", str(grid), "--start", "0,0,E", "--name", "made")
        assert code == 0
        puzzle = parse_puzzle(out)
        assert puzzle.width == 3 and puzzle.height == 2
        assert puzzle.num_lights == 1
        assert puzzle.tile_at(2, 0).height == 1 and puzzle.tile_at(2, 0).is_light
        assert puzzle.tile_at(1, 1).height == 2

    def test_from_ascii_ragged_rejected(self, tmp_path):
        grid = tmp_path / "grid.txt"
        grid.write_text("0 0\n0\n")
        with pytest.raises(SystemExit, match="ragged"):
            main(["puzzle", "from-ascii", str(grid), "--start", "0,0,E"])


class TestExportAndAnalyze:
    def test_end_to_end(self, tmp_path, capsys):
        data_dir = tmp_path / "data"
        svc = ExperimentService(puzzle_set=PuzzleSet.bundled(), data_dir=data_dir)
        for condition, seed in [("efficient_flat", 1), ("default_flat", 2)]:
            session = svc.create_session(condition, seed=seed)
            svc.submit_program(session.id, "T1", {"main": ["walk", "walk", "light"], "procs": []})

        code, out = run(capsys, "export", "--data-dir", str(data_dir))
        assert code == 0
        lines = [l for l in out.splitlines() if l]
        assert {json.loads(l)["kind"] for l in lines} == {"session_start", "test_run", "puzzle_complete"}

        logs = tmp_path / "logs.jsonl"
        logs.write_text("\n".join(lines) + "\n")
        out_dir = tmp_path / "tables"
        code, out = run(
            capsys, "analyze", str(logs), "--puzzles", str(PUZZLE_DIR), "--out-dir", str(out_dir)
        )
        assert code == 0
        assert (out_dir / "per_condition.csv").exists()
        records_csv = (out_dir / "records.csv").read_text()
        assert "T1" in records_csv and "flattened_length" in records_csv
