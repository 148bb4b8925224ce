"""Experiment backend: session and condition management, server-side program
validation and execution, append-only event persistence, and the /v1 JSON API
the browser client consumes.

The server is authoritative for everything that matters to the data: program
lengths, completion, skip timing, and timestamps. Logs are append-only JSONL,
one file per session, and exports are replay-complete.
"""

from __future__ import annotations

import json
import os
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Optional

from .conditions import CONDITIONS, ConditionSpec, get_condition
from .program import (
    ExecutionStatus,
    ProgramFormatError,
    execute,
    parse_program,
    program_length,
    trace_to_doc,
    validate_program,
)
from .world import parse_puzzle, serialize_puzzle

__all__ = [
    "EVENT_KINDS",
    "CLIENT_EVENT_KINDS",
    "SKIP_AFTER_S",
    "ServiceError",
    "PuzzleSet",
    "Session",
    "EventLog",
    "ExperimentService",
    "create_app",
    "export_sessions",
    "import_sessions",
]

SKIP_AFTER_S = 360.0

EVENT_KINDS = (
    "session_start",
    "instruction_added",
    "instruction_removed",
    "instruction_reordered",
    "test_run",
    "puzzle_complete",
    "puzzle_skipped",
    "session_end",
)
# Kinds a client may log directly; the rest are emitted by the server.
CLIENT_EVENT_KINDS = ("instruction_added", "instruction_removed", "instruction_reordered")

TUTORIAL_IDS = ("T1", "T2", "T3")
BLOCK_A_IDS = ("P1", "P2", "P3")
BLOCK_B_IDS = ("P4", "P5", "P6")


class ServiceError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass(frozen=True)
class PuzzleSet:
    """The nine experiment puzzles: three tutorials in fixed order, then two
    blocks of three test puzzles that are each shuffled per session."""

    puzzles: dict[str, Puzzle]

    def __post_init__(self) -> None:
        required = TUTORIAL_IDS + BLOCK_A_IDS + BLOCK_B_IDS
        missing = [pid for pid in required if pid not in self.puzzles]
        if missing:
            raise ValueError(f"puzzle set missing {', '.join(missing)}")

    @classmethod
    def from_dir(cls, path: str | Path) -> "PuzzleSet":
        puzzles = {}
        for file in sorted(Path(path).glob("*.json")):
            puzzle = parse_puzzle(file.read_text())
            puzzles[puzzle.name] = puzzle
        return cls(puzzles)

    @classmethod
    def bundled(cls) -> "PuzzleSet":
        return cls.from_dir(Path(__file__).parent / "puzzles")

    def order_for_seed(self, seed: int) -> list[str]:
        rnd = random.Random(seed)
        block_a, block_b = list(BLOCK_A_IDS), list(BLOCK_B_IDS)
        rnd.shuffle(block_a)
        rnd.shuffle(block_b)
        return list(TUTORIAL_IDS) + block_a + block_b


@dataclass
class Session:
    id: str
    condition: ConditionSpec
    seed: int
    order: list[str]
    created_at: float
    cursor: int = 0
    puzzle_started_at: dict[str, float] = field(default_factory=dict)
    last_event_t: float = 0.0
    finished: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def current_puzzle_id(self) -> Optional[str]:
        return None if self.finished else self.order[self.cursor]


class EventLog:
    """Append-only JSONL store, one file per session.

    Each record is written with a single write() to an O_APPEND descriptor,
    so a crash leaves either the whole line or nothing; a trailing partial
    line (no newline) is ignored on read.
    """

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.jsonl"

    def append(self, session_id: str, record: dict) -> None:
        data = (json.dumps(record, separators=(",", ":")) + "\n").encode()
        fd = os.open(self._path(session_id), os.O_APPEND | os.O_CREAT | os.O_WRONLY, 0o644)
        try:
            written = os.write(fd, data)
            if written != len(data):
                raise ServiceError(500, f"short write to event log for {session_id}")
        finally:
            os.close(fd)

    def read_lines(self, session_id: str) -> list[str]:
        path = self._path(session_id)
        if not path.exists():
            return []
        raw = path.read_bytes()
        complete, sep, _partial = raw.rpartition(b"\n")
        if not sep:
            return []
        return (complete + sep).decode().splitlines()

    def session_ids(self) -> list[str]:
        return [p.stem for p in self.data_dir.glob("*.jsonl")]


class ExperimentService:
    """Core experiment logic, transport-agnostic. The HTTP layer in
    create_app is a thin adapter over these methods."""

    def __init__(
        self,
        puzzle_set: Optional[PuzzleSet] = None,
        data_dir: str | Path = "sessions",
        clock: Callable[[], float] = time.time,
        id_factory: Callable[[], str] = lambda: uuid.uuid4().hex,
        condition_seeds: Optional[dict[str, int]] = None,
    ):
        self.puzzle_set = puzzle_set or PuzzleSet.bundled()
        self.log = EventLog(data_dir)
        self.clock = clock
        self.id_factory = id_factory
        self.condition_seeds = condition_seeds or {}
        self.sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        self._rehydrate()

    # -- session lifecycle --------------------------------------------------

    def create_session(self, condition_id: str, seed: Optional[int] = None) -> Session:
        try:
            condition = get_condition(condition_id)
        except KeyError as exc:
            raise ServiceError(400, str(exc)) from exc
        if seed is None:
            seed = self.condition_seeds.get(condition_id)
        if seed is None:
            raise ServiceError(400, "seed required (none configured for this condition)")
        now = self.clock()
        session = Session(
            id=self.id_factory(),
            condition=condition,
            seed=seed,
            order=self.puzzle_set.order_for_seed(seed),
            created_at=now,
        )
        session.puzzle_started_at[session.order[0]] = now
        with self._registry_lock:
            if session.id in self.sessions:
                raise ServiceError(500, f"session id collision: {session.id}")
            self.sessions[session.id] = session
        self._log_event(
            session,
            "session_start",
            {"condition": condition.id, "seed": seed, "order": session.order},
        )
        return session

    def _get_session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise ServiceError(404, f"unknown session {session_id}")
        return session

    def session_info(self, session_id: str) -> dict:
        s = self._get_session(session_id)
        with s.lock:
            return {
                "session_id": s.id,
                "condition": s.condition.id,
                "puzzle_count": len(s.order),
                "cursor": s.cursor,
                "finished": s.finished,
            }

    # -- puzzle flow ---------------------------------------------------------

    def current_puzzle(self, session_id: str) -> dict:
        s = self._get_session(session_id)
        with s.lock:
            if s.finished:
                raise ServiceError(409, "session already finished")
            pid = s.current_puzzle_id
            elapsed = self.clock() - s.puzzle_started_at[pid]
            puzzle = self.puzzle_set.puzzles[pid]
            out = {
                "puzzle_id": pid,
                "index": s.cursor,
                "total": len(s.order),
                "puzzle": json.loads(serialize_puzzle(puzzle)),
                "subprocesses_allowed": s.condition.subprocesses_allowed,
                "counter_visible": s.condition.counter_visible,
                "efficiency_instructions": s.condition.efficiency_instructions,
                "elapsed_s": elapsed,
                "skip_available_in_s": max(0.0, SKIP_AFTER_S - elapsed),
            }
            return out

    def _require_active(self, s: Session, puzzle_id: str) -> None:
        if s.finished:
            raise ServiceError(409, "session already finished")
        if puzzle_id != s.current_puzzle_id:
            raise ServiceError(409, f"puzzle {puzzle_id} is not the active puzzle")

    def _advance(self, s: Session, now: float) -> Optional[str]:
        s.cursor += 1
        if s.cursor >= len(s.order):
            s.finished = True
            self._log_event(s, "session_end", {})
            return None
        nxt = s.order[s.cursor]
        s.puzzle_started_at[nxt] = now
        return nxt

    def submit_program(self, session_id: str, puzzle_id: str, program_doc: dict) -> dict:
        s = self._get_session(session_id)
        with s.lock:
            self._require_active(s, puzzle_id)
            condition = s.condition
            try:
                program = parse_program(program_doc)
            except ProgramFormatError as exc:
                return {
                    "valid": False,
                    "violations": [{"code": "format", "frame": "main", "index": -1, "message": str(exc)}],
                    "counter_visible": condition.counter_visible,
                }
            violations = validate_program(program, condition)
            if violations:
                return {
                    "valid": False,
                    "violations": [v.__dict__ for v in violations],
                    "counter_visible": condition.counter_visible,
                }
            puzzle = self.puzzle_set.puzzles[puzzle_id]
            trace = execute(puzzle, program)
            completed = trace.status is ExecutionStatus.COMPLETED
            length = program_length(program)
            now = self.clock()
            self._log_event(
                s,
                "test_run",
                {
                    "puzzle_id": puzzle_id,
                    "program": program_doc,
                    "completed": completed,
                    "status": trace.status.value,
                    "n_actions": len(trace.actions),
                    "program_length": length,
                },
            )
            out = {
                "valid": True,
                "completed": completed,
                "trace": trace_to_doc(trace),
                "counter_visible": condition.counter_visible,
            }
            if condition.counter_visible:
                out["program_length"] = length
            if completed:
                duration = now - s.puzzle_started_at[puzzle_id]
                self._log_event(
                    s, "puzzle_complete", {"puzzle_id": puzzle_id, "duration_s": duration}
                )
                out["next_puzzle_id"] = self._advance(s, now)
                out["session_finished"] = s.finished
            return out

    def skip_puzzle(self, session_id: str, puzzle_id: str, client_elapsed_s: float = 0.0) -> dict:
        s = self._get_session(session_id)
        with s.lock:
            self._require_active(s, puzzle_id)
            now = self.clock()
            elapsed = now - s.puzzle_started_at[puzzle_id]
            if elapsed < SKIP_AFTER_S:
                # server clock is authoritative; the client timer is advisory
                return {"ok": False, "remaining_s": SKIP_AFTER_S - elapsed}
            self._log_event(
                s,
                "puzzle_skipped",
                {"puzzle_id": puzzle_id, "duration_s": elapsed, "client_elapsed_s": client_elapsed_s},
            )
            return {
                "ok": True,
                "next_puzzle_id": self._advance(s, now),
                "session_finished": s.finished,
            }

    # -- event logging & export ----------------------------------------------

    def log_client_event(self, session_id: str, kind: str, payload: dict) -> dict:
        s = self._get_session(session_id)
        if kind not in CLIENT_EVENT_KINDS:
            raise ServiceError(400, f"clients may not log {kind!r} events")
        with s.lock:
            if s.finished:
                raise ServiceError(409, "session already finished")
            self._log_event(s, kind, payload)
            out = {"ok": True}
            if s.condition.counter_visible and isinstance(payload.get("program"), dict):
                try:
                    out["program_length"] = program_length(parse_program(payload["program"]))
                except ProgramFormatError:
                    pass
            return out

    def _log_event(self, s: Session, kind: str, payload: dict) -> None:
        # timestamps are non-decreasing per session even if the clock jumps
        t = max(self.clock(), s.last_event_t)
        s.last_event_t = t
        self.log.append(s.id, {"session_id": s.id, "t": t, "kind": kind, "payload": payload})

    def export(
        self, condition: Optional[str] = None, session_ids: Optional[list[str]] = None
    ) -> Iterator[str]:
        return export_sessions(self.log, condition=condition, session_ids=session_ids)

    # -- recovery -------------------------------------------------------------

    def _rehydrate(self) -> None:
        """Rebuild in-memory sessions from the event logs on disk."""
        for sid in self.log.session_ids():
            lines = self.log.read_lines(sid)
            if not lines:
                continue
            head = json.loads(lines[0])
            if head.get("kind") != "session_start":
                continue
            payload = head["payload"]
            session = Session(
                id=sid,
                condition=get_condition(payload["condition"]),
                seed=payload["seed"],
                order=list(payload["order"]),
                created_at=head["t"],
            )
            session.puzzle_started_at[session.order[0]] = head["t"]
            session.last_event_t = head["t"]
            for raw in lines[1:]:
                event = json.loads(raw)
                kind, t = event["kind"], event["t"]
                session.last_event_t = max(session.last_event_t, t)
                if kind in ("puzzle_complete", "puzzle_skipped"):
                    session.cursor += 1
                    if session.cursor < len(session.order):
                        session.puzzle_started_at[session.order[session.cursor]] = t
                elif kind == "session_end":
                    session.finished = True
            self.sessions[sid] = session


def export_sessions(
    log: EventLog | str | Path,
    condition: Optional[str] = None,
    session_ids: Optional[list[str]] = None,
) -> Iterator[str]:
    """Replay-complete JSONL stream over a log directory, deterministically
    ordered by session creation time then id; lines are emitted verbatim."""
    if not isinstance(log, EventLog):
        log = EventLog(log)
    sessions = []
    for sid in log.session_ids():
        lines = log.read_lines(sid)
        if not lines:
            continue
        head = json.loads(lines[0])
        cond = head.get("payload", {}).get("condition")
        if condition is not None and cond != condition:
            continue
        if session_ids is not None and sid not in session_ids:
            continue
        sessions.append((head.get("t", 0.0), sid, lines))
    for _, _, lines in sorted(sessions, key=lambda item: (item[0], item[1])):
        yield from lines


def import_sessions(lines: Iterator[str] | list[str], data_dir: str | Path) -> int:
    """Write an exported stream back into a data directory, splitting lines
    by session. Returns the number of lines written."""
    log = EventLog(data_dir)
    count = 0
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        event = json.loads(raw)
        log.append(event["session_id"], event)
        count += 1
    return count


def create_app(service: Optional[ExperimentService] = None, static_dir: Optional[str | Path] = None):
    """FastAPI adapter over ExperimentService, versioned under /v1."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse, PlainTextResponse

    svc = service or ExperimentService()
    app = FastAPI(title="lightbot experiment service")
    app.state.service = svc

    @app.exception_handler(ServiceError)
    async def _service_error(_request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    @app.post("/v1/sessions")
    async def create_session(body: dict):
        condition = body.get("condition")
        seed = body.get("seed")
        if not isinstance(condition, str) or not (seed is None or isinstance(seed, int)):
            raise ServiceError(400, "body must include condition (string) and optionally seed (integer)")
        session = svc.create_session(condition, seed)
        return svc.session_info(session.id)

    @app.get("/v1/conditions")
    async def list_conditions():
        return {
            cid: {
                "subprocesses_allowed": c.subprocesses_allowed,
                "counter_visible": c.counter_visible,
                "efficiency_instructions": c.efficiency_instructions,
                "bonus_mode": c.bonus_mode,
            }
            for cid, c in CONDITIONS.items()
        }

    @app.get("/v1/sessions/{session_id}")
    async def session_info(session_id: str):
        return svc.session_info(session_id)

    @app.get("/v1/sessions/{session_id}/puzzle")
    async def current_puzzle(session_id: str):
        return svc.current_puzzle(session_id)

    @app.post("/v1/sessions/{session_id}/submit")
    async def submit(session_id: str, body: dict):
        puzzle_id = body.get("puzzle_id")
        program = body.get("program")
        if not isinstance(puzzle_id, str) or not isinstance(program, dict):
            raise ServiceError(400, "body must include puzzle_id (string) and program (object)")
        return svc.submit_program(session_id, puzzle_id, program)

    @app.post("/v1/sessions/{session_id}/skip")
    async def skip(session_id: str, body: dict):
        puzzle_id = body.get("puzzle_id")
        if not isinstance(puzzle_id, str):
            raise ServiceError(400, "body must include puzzle_id (string)")
        return svc.skip_puzzle(session_id, puzzle_id, float(body.get("client_elapsed_s", 0.0)))

    @app.post("/v1/sessions/{session_id}/events")
    async def log_event(session_id: str, body: dict):
        kind = body.get("kind")
        payload = body.get("payload", {})
        if not isinstance(kind, str) or not isinstance(payload, dict):
            raise ServiceError(400, "body must include kind (string) and payload (object)")
        return svc.log_client_event(session_id, kind, payload)

    @app.get("/v1/export")
    async def export(condition: Optional[str] = None):
        return PlainTextResponse("".join(line + "\n" for line in svc.export(condition=condition)))

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="app")

    return app
