"""Measurement pipeline over exported session logs: normalized distances to
optimal, flattened program lengths, compressibility, Welch t comparisons, and
the bonus schedule.

Only completed solutions enter any analysis; skipped or unfinished puzzles
are filtered at load time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import integrate

from .compress import CompressionConfig, compress
from .program import (
    ExecutionLimits,
    ExecutionStatus,
    Program,
    execute,
    parse_program,
    program_length,
)
from .solver_exact import bfs_shortest
from .world import Puzzle

__all__ = [
    "AnalysisError",
    "DegenerateNormsError",
    "DegenerateSampleError",
    "SolutionRecord",
    "PuzzleNorms",
    "WelchResult",
    "normalized_distance",
    "flattened_length",
    "solution_compressibility",
    "welch_t",
    "bonus",
    "load_records",
    "analyze",
    "AnalysisReport",
]


class AnalysisError(ValueError):
    pass


class DegenerateNormsError(AnalysisError):
    """All pool values equal: min-max normalization is undefined."""


class DegenerateSampleError(AnalysisError):
    """Sample too small or with zero variance for a t test."""


@dataclass(frozen=True)
class SolutionRecord:
    """One participant's final solution to one puzzle."""

    session_id: str
    condition_id: str
    puzzle_id: str
    program: Program
    completed: bool
    duration_s: float


@dataclass(frozen=True)
class PuzzleNorms:
    """Per-puzzle min and max of the quantity being normalized, taken over
    the analyzed pool."""

    low: float
    high: float

    def normalize(self, value: float) -> float:
        if self.high <= self.low:
            raise DegenerateNormsError(
                f"pool min and max are both {self.low}; normalization undefined"
            )
        return (value - self.low) / (self.high - self.low)

    @classmethod
    def from_pool(cls, values: Sequence[float]) -> "PuzzleNorms":
        if not values:
            raise AnalysisError("empty pool")
        return cls(low=min(values), high=max(values))


def normalized_distance(length: int, optimal_length: int, norms: PuzzleNorms) -> float:
    """Distance of a solution length from optimal, min-max normalized against
    the pool's distances. Pool extremes map to exactly 0 and 1."""
    return norms.normalize(length - optimal_length)


def flattened_length(
    record: SolutionRecord, puzzle: Puzzle, limits: ExecutionLimits = ExecutionLimits()
) -> int:
    """Number of actions the record's program generates when run to
    completion. A record marked completed whose program does not complete is
    contradictory and rejected."""
    trace = execute(puzzle, record.program, limits)
    if record.completed and trace.status is not ExecutionStatus.COMPLETED:
        raise AnalysisError(
            f"record for puzzle {record.puzzle_id} is marked completed but its "
            f"program stops with {trace.status.value}"
        )
    return len(trace.actions)


def solution_compressibility(
    record: SolutionRecord,
    puzzle: Puzzle,
    config: CompressionConfig = CompressionConfig(),
    limits: ExecutionLimits = ExecutionLimits(),
) -> Fraction:
    """Compressibility of the record's flattened action sequence."""
    trace = execute(puzzle, record.program, limits)
    if record.completed and trace.status is not ExecutionStatus.COMPLETED:
        raise AnalysisError(
            f"record for puzzle {record.puzzle_id} is marked completed but its "
            f"program stops with {trace.status.value}"
        )
    return compress(list(trace.actions), config).compressibility


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float


def _t_pdf(x: float, df: float) -> float:
    log_norm = math.lgamma((df + 1.0) / 2.0) - math.lgamma(df / 2.0) - 0.5 * math.log(df * math.pi)
    return math.exp(log_norm - (df + 1.0) / 2.0 * math.log1p(x * x / df))


def welch_t(sample_a: Sequence[float], sample_b: Sequence[float]) -> WelchResult:
    """Welch's unequal-variance t statistic with Welch-Satterthwaite degrees
    of freedom; the two-sided p comes from numerically integrating the t
    density tail. Each sample needs size >= 2 and nonzero variance."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise DegenerateSampleError("each sample needs at least 2 observations")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va == 0.0 or vb == 0.0:
        raise DegenerateSampleError("zero-variance sample; t is undefined or infinite")
    qa, qb = va / len(a), vb / len(b)
    se = math.sqrt(qa + qb)
    t = (a.mean() - b.mean()) / se
    df = (qa + qb) ** 2 / (qa**2 / (len(a) - 1) + qb**2 / (len(b) - 1))
    tail, _ = integrate.quad(_t_pdf, abs(t), np.inf, args=(df,))
    return WelchResult(t=float(t), df=float(df), p=min(2.0 * tail, 1.0))


def bonus(record_len: int, best_len: int, worst_len: int, max_bonus: float = 0.50) -> float:
    """Linear bonus: max_bonus for the pool's shortest solution, 0 at the
    pool's worst, clamped to [0, max_bonus]."""
    if best_len > record_len:
        raise AnalysisError(f"record length {record_len} below pool best {best_len}")
    if worst_len <= best_len:
        raise DegenerateNormsError(
            f"bonus pool degenerate: best {best_len}, worst {worst_len}"
        )
    raw = max_bonus * (1.0 - (record_len - best_len) / (worst_len - best_len))
    return min(max(raw, 0.0), max_bonus)


def load_records(
    lines: Iterable[str] | str | Path, include_incomplete: bool = False
) -> list[SolutionRecord]:
    """Build solution records from an exported JSONL event stream (a path or
    an iterable of lines). The completing test_run provides the program; the
    matching puzzle_complete provides the duration. Skipped puzzles yield
    incomplete records, which are dropped unless requested."""
    if isinstance(lines, (str, Path)):
        lines = Path(lines).read_text().splitlines()
    conditions: dict[str, str] = {}
    solutions: dict[tuple[str, str], dict] = {}
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        try:
            event = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise AnalysisError(f"malformed log line: {exc}") from exc
        sid, kind, payload = event["session_id"], event["kind"], event.get("payload", {})
        if kind == "session_start":
            conditions[sid] = payload["condition"]
        elif kind == "test_run" and payload.get("completed"):
            key = (sid, payload["puzzle_id"])
            solutions.setdefault(key, {})["program"] = payload["program"]
        elif kind == "puzzle_complete":
            key = (sid, payload["puzzle_id"])
            solutions.setdefault(key, {})["duration_s"] = payload.get("duration_s", float("nan"))
        elif kind == "puzzle_skipped":
            key = (sid, payload["puzzle_id"])
            solutions.setdefault(key, {})["skipped"] = True

    records = []
    for (sid, puzzle_id), info in solutions.items():
        completed = "program" in info and not info.get("skipped", False)
        if not completed and not include_incomplete:
            continue
        records.append(
            SolutionRecord(
                session_id=sid,
                condition_id=conditions.get(sid, "unknown"),
                puzzle_id=puzzle_id,
                program=parse_program(info["program"]) if "program" in info else Program(),
                completed=completed,
                duration_s=info.get("duration_s", float("nan")),
            )
        )
    return records


@dataclass
class AnalysisReport:
    """Tables ready for CSV export."""

    per_record: list[dict]
    per_condition: list[dict]
    per_condition_puzzle: list[dict]
    comparisons: list[dict]
    bonuses: list[dict]


_METRICS = ("normalized_distance", "normalized_flattened_length", "compressibility")


def analyze(
    records: Sequence[SolutionRecord],
    puzzles: dict[str, Puzzle],
    pool_across_conditions: bool = True,
    max_bonus: float = 0.50,
    bonus_modes: Optional[dict[str, str]] = None,
) -> AnalysisReport:
    """Full measurement pass over completed records.

    Per-puzzle min-max norms pool across conditions by default; set
    pool_across_conditions=False to normalize within each condition.
    bonus_modes maps condition id to "linear" or "fixed" (defaults to the
    bundled conditions).
    """
    if bonus_modes is None:
        from .conditions import CONDITIONS

        bonus_modes = {cid: c.bonus_mode for cid, c in CONDITIONS.items()}

    rows = []
    for rec in records:
        if not rec.completed:
            continue
        puzzle = puzzles.get(rec.puzzle_id)
        if puzzle is None:
            raise AnalysisError(f"no puzzle named {rec.puzzle_id!r} supplied")
        optimal = bfs_shortest(puzzle)
        if optimal is None:
            raise AnalysisError(f"puzzle {rec.puzzle_id} is unsolvable; bad registry")
        flat_len = flattened_length(rec, puzzle)
        rows.append(
            {
                "session_id": rec.session_id,
                "condition": rec.condition_id,
                "puzzle_id": rec.puzzle_id,
                "program_length": program_length(rec.program),
                "flattened_length": flat_len,
                "optimal_length": len(optimal),
                "distance": flat_len - len(optimal),
                "compressibility": float(solution_compressibility(rec, puzzle)),
                "duration_s": rec.duration_s,
            }
        )

    def pool_key(row: dict) -> tuple:
        return (row["puzzle_id"],) if pool_across_conditions else (row["puzzle_id"], row["condition"])

    pools: dict[tuple, list[dict]] = {}
    for row in rows:
        pools.setdefault(pool_key(row), []).append(row)
    for pool in pools.values():
        dist_norms = PuzzleNorms.from_pool([r["distance"] for r in pool])
        len_norms = PuzzleNorms.from_pool([r["flattened_length"] for r in pool])
        for row in pool:
            row["normalized_distance"] = (
                dist_norms.normalize(row["distance"]) if dist_norms.high > dist_norms.low else None
            )
            row["normalized_flattened_length"] = (
                len_norms.normalize(row["flattened_length"]) if len_norms.high > len_norms.low else None
            )

    def mean_of(items: list[dict], key: str) -> Optional[float]:
        vals = [r[key] for r in items if r.get(key) is not None]
        return float(np.mean(vals)) if vals else None

    by_condition: dict[str, list[dict]] = {}
    by_condition_puzzle: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        by_condition.setdefault(row["condition"], []).append(row)
        by_condition_puzzle.setdefault((row["condition"], row["puzzle_id"]), []).append(row)

    per_condition = [
        {
            "condition": cond,
            "n": len(items),
            "mean_normalized_distance": mean_of(items, "normalized_distance"),
            "mean_normalized_flattened_length": mean_of(items, "normalized_flattened_length"),
            "mean_compressibility": mean_of(items, "compressibility"),
            "mean_program_length": mean_of(items, "program_length"),
        }
        for cond, items in sorted(by_condition.items())
    ]
    per_condition_puzzle = [
        {
            "condition": cond,
            "puzzle_id": pid,
            "n": len(items),
            "mean_normalized_distance": mean_of(items, "normalized_distance"),
            "mean_normalized_flattened_length": mean_of(items, "normalized_flattened_length"),
            "mean_compressibility": mean_of(items, "compressibility"),
        }
        for (cond, pid), items in sorted(by_condition_puzzle.items())
    ]

    comparisons = []
    conds = sorted(by_condition)
    for i, ca in enumerate(conds):
        for cb in conds[i + 1 :]:
            for metric in _METRICS:
                va = [r[metric] for r in by_condition[ca] if r.get(metric) is not None]
                vb = [r[metric] for r in by_condition[cb] if r.get(metric) is not None]
                try:
                    res = welch_t(va, vb)
                    comparisons.append(
                        {"a": ca, "b": cb, "metric": metric, "t": res.t, "df": res.df, "p": res.p}
                    )
                except DegenerateSampleError as exc:
                    comparisons.append(
                        {"a": ca, "b": cb, "metric": metric, "t": None, "df": None, "p": None, "note": str(exc)}
                    )

    bonuses = []
    for (cond, pid), items in sorted(by_condition_puzzle.items()):
        mode = bonus_modes.get(cond, "fixed")
        if mode == "fixed":
            for row in items:
                bonuses.append(
                    {"session_id": row["session_id"], "condition": cond, "puzzle_id": pid, "bonus": max_bonus}
                )
            continue
        lengths = [r["program_length"] for r in items]
        best, worst = min(lengths), max(lengths)
        for row in items:
            amount = (
                max_bonus
                if worst == best
                else bonus(row["program_length"], best, worst, max_bonus)
            )
            bonuses.append(
                {"session_id": row["session_id"], "condition": cond, "puzzle_id": pid, "bonus": round(amount, 2)}
            )

    return AnalysisReport(
        per_record=rows,
        per_condition=per_condition,
        per_condition_puzzle=per_condition_puzzle,
        comparisons=comparisons,
        bonuses=bonuses,
    )
