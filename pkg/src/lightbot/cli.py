"""Command-line interface: compress sequences, solve puzzles exactly or with
the RL agent, run the experiment service, export logs, analyze exports, and
author puzzles."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import fields
from pathlib import Path

from . import analysis as analysis_mod
from .compress import CompressionConfig, compress
from .program import serialize_program
from .solver_exact import bfs_shortest
from .solver_ppo import Hyperparams, best_of_rollouts, train
from .world import (
    Action,
    Heading,
    Pose,
    Puzzle,
    PuzzleFormatError,
    Tile,
    parse_puzzle,
    render_ascii,
    serialize_puzzle,
)


def _read_tokens(source: str) -> list[Action]:
    text = sys.stdin.read() if source == "-" else Path(source).read_text()
    raw = [tok for chunk in text.replace(",", "\n").split("\n") for tok in chunk.split()]
    return [Action.from_token(tok) for tok in raw if tok]


def _load_puzzle(path: str) -> Puzzle:
    try:
        return parse_puzzle(Path(path).read_text())
    except (OSError, PuzzleFormatError) as exc:
        raise SystemExit(f"error: {exc}") from exc


def cmd_compress(args: argparse.Namespace) -> int:
    seq = _read_tokens(args.input)
    if not seq:
        raise SystemExit("error: no action tokens in input")
    config = CompressionConfig(max_procs=args.max_procs)
    result = compress(seq, config)
    out = {
        "program": serialize_program(result.program),
        "flat_length": result.flat_length,
        "compressed_length": result.compressed_length,
        "compressibility": float(result.compressibility),
        "compressibility_exact": f"{result.compressibility.numerator}/{result.compressibility.denominator}",
        "recursion_applied": result.recursion_applied,
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    puzzle = _load_puzzle(args.puzzle)
    if args.exact:
        solution = bfs_shortest(puzzle)
        if solution is None:
            print(json.dumps({"solvable": False}))
            return 1
        print(json.dumps({"solvable": True, "length": len(solution), "actions": [a.token for a in solution]}))
        return 0
    overrides = {}
    if args.config:
        overrides = json.loads(Path(args.config).read_text())
        known = {f.name for f in fields(Hyperparams)}
        unknown = set(overrides) - known
        if unknown:
            raise SystemExit(f"error: unknown hyperparameter(s): {', '.join(sorted(unknown))}")
    hyper = Hyperparams(**{**overrides, "seed": args.seed})
    result = train(puzzle, hyper)
    for entry in result.history:
        print(json.dumps(entry), file=sys.stderr)
    if not result.completed_any:
        print(json.dumps({"solved": False, "reason": "no completing episode within budget"}))
        return 1
    import numpy as np

    actions = best_of_rollouts(result.policy, puzzle, n=100, rng=np.random.default_rng(hyper.seed + 1))
    print(
        json.dumps(
            {
                "solved": True,
                "length": len(actions),
                "actions": [a.token for a in actions],
                "converged": result.converged,
                "env_steps": result.total_env_steps,
            }
        )
    )
    return 0


def _write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    headers: list[str] = []
    for row in rows:
        for key in row:
            if key not in headers:
                headers.append(key)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=headers)
        writer.writeheader()
        writer.writerows(rows)


def cmd_analyze(args: argparse.Namespace) -> int:
    records = analysis_mod.load_records(Path(args.logs))
    puzzles = {}
    for file in sorted(Path(args.puzzles).glob("*.json")):
        puzzle = parse_puzzle(file.read_text())
        puzzles[puzzle.name] = puzzle
    report = analysis_mod.analyze(
        records, puzzles, pool_across_conditions=not args.within_condition_norms
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "records.csv", report.per_record)
    _write_csv(out_dir / "per_condition.csv", report.per_condition)
    _write_csv(out_dir / "per_condition_puzzle.csv", report.per_condition_puzzle)
    _write_csv(out_dir / "comparisons.csv", report.comparisons)
    _write_csv(out_dir / "bonuses.csv", report.bonuses)
    print(f"analyzed {len(report.per_record)} solutions -> {out_dir}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ExperimentService, PuzzleSet, create_app

    config = {}
    if args.config:
        config = json.loads(Path(args.config).read_text())
    port = args.port or config.get("port", 8000)
    host = config.get("host", "127.0.0.1")
    data_dir = args.data_dir or config.get("data_dir", "sessions")
    puzzle_dir = args.puzzle_dir or config.get("puzzle_dir")
    static_dir = args.static_dir or config.get("static_dir")
    puzzle_set = PuzzleSet.from_dir(puzzle_dir) if puzzle_dir else None
    service = ExperimentService(
        puzzle_set=puzzle_set,
        data_dir=data_dir,
        condition_seeds=config.get("condition_seeds"),
    )
    app = create_app(service, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    from .service import export_sessions

    lines = export_sessions(args.data_dir, condition=args.condition)
    out = sys.stdout if args.out == "-" else Path(args.out).open("w")
    try:
        for line in lines:
            out.write(line + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_puzzle(args: argparse.Namespace) -> int:
    if args.puzzle_cmd == "from-ascii":
        return _puzzle_from_ascii(args)
    puzzle = _load_puzzle(args.file)
    if args.puzzle_cmd == "validate":
        print(f"{puzzle.name or '(unnamed)'}: {puzzle.width}x{puzzle.height}, {puzzle.num_lights} lights - OK")
        return 0
    if args.puzzle_cmd == "show":
        print(render_ascii(puzzle))
        return 0
    # stats
    solution = bfs_shortest(puzzle)
    stats = {
        "name": puzzle.name,
        "size": f"{puzzle.width}x{puzzle.height}",
        "lights": puzzle.num_lights,
        "max_height": puzzle.max_height,
        "solvable": solution is not None,
    }
    if solution is not None:
        result = compress(solution)
        stats["optimal_flat_length"] = len(solution)
        stats["optimal_flat_compressibility"] = float(result.compressibility)
    print(json.dumps(stats, indent=2))
    return 0


def _puzzle_from_ascii(args: argparse.Namespace) -> int:
    """Authoring helper: rows of whitespace-separated cells, each a height
    digit string with an optional '*' suffix marking a light."""
    text = sys.stdin.read() if args.input == "-" else Path(args.input).read_text()
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows:
        raise SystemExit("error: empty grid")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise SystemExit("error: ragged rows in grid")
    tiles = []
    for row in rows:
        for cell in row:
            light = cell.endswith("*")
            digits = cell[:-1] if light else cell
            if not digits.isdigit():
                raise SystemExit(f"error: bad cell {cell!r}, expected e.g. 0, 2, 1*")
            tiles.append(Tile(height=int(digits), is_light=light))
    try:
        sx, sy, sdir = args.start.split(",")
        start = Pose(int(sx), int(sy), Heading.from_letter(sdir))
        puzzle = Puzzle(width=width, height=len(rows), tiles=tuple(tiles), start=start, name=args.name)
    except (ValueError, IndexError) as exc:
        raise SystemExit(f"error: {exc}") from exc
    if puzzle.num_lights == 0:
        raise SystemExit("error: no light tiles")
    sys.stdout.write(serialize_puzzle(puzzle))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lightbot", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("compress", help="compress an action-token sequence into a program")
    p.add_argument("input", nargs="?", default="-", help="token file, or - for stdin")
    p.add_argument("--max-procs", type=int, default=4)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("solve", help="find a flat solution for a puzzle")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--exact", action="store_true", help="breadth-first exact search")
    group.add_argument("--ppo", action="store_true", help="train the RL agent")
    p.add_argument("puzzle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="JSON file of hyperparameter overrides")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("analyze", help="compute result tables from an exported log")
    p.add_argument("logs")
    p.add_argument("--puzzles", required=True, help="directory of puzzle files")
    p.add_argument("--out-dir", default="analysis_out")
    p.add_argument("--within-condition-norms", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="run the experiment service")
    p.add_argument("--config", help="JSON config file (port, data_dir, puzzle_dir, static_dir)")
    p.add_argument("--port", type=int)
    p.add_argument("--data-dir")
    p.add_argument("--puzzle-dir")
    p.add_argument("--static-dir")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="dump session logs as JSONL")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--condition")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("puzzle", help="puzzle authoring and inspection")
    psub = p.add_subparsers(dest="puzzle_cmd", required=True)
    for name in ("validate", "show", "stats"):
        pp = psub.add_parser(name)
        pp.add_argument("file")
    pp = psub.add_parser("from-ascii", help="build a puzzle document from an ASCII grid")
    pp.add_argument("input", nargs="?", default="-")
    pp.add_argument("--start", required=True, help="x,y,dir e.g. 0,0,E")
    pp.add_argument("--name", default="")
    p.set_defaults(func=cmd_puzzle)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
