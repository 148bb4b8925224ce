"""Hierarchical program DSL: representation, stored-length accounting,
interpreter, and syntactic flattening.

A program is a main instruction list plus up to four named subprocess lists.
An instruction is either a primitive action or a call to a subprocess; calls
may nest and recurse. Stored length counts every instruction once (a call
costs 1). Flattening unrolls calls into the primitive action sequence the
program generates; execution additionally threads the world state and stops
at the first step that completes the puzzle.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Union

from .conditions import ConditionSpec
from .world import (
    Action,
    Puzzle,
    WorldState,
    initial_state,
    is_complete,
    step,
)

__all__ = [
    "Call",
    "Instruction",
    "Program",
    "ExecutionLimits",
    "ExecutionStatus",
    "ExecutionTrace",
    "DepthLimitError",
    "DanglingCallError",
    "ProgramFormatError",
    "Violation",
    "program_length",
    "flatten",
    "execute",
    "validate_program",
    "parse_program",
    "serialize_program",
    "trace_to_doc",
    "MAX_PROCS",
]

MAX_PROCS = 4


@dataclass(frozen=True)
class Call:
    """Invocation of subprocess `proc` (0-based index into Program.procs)."""

    proc: int

    def __post_init__(self) -> None:
        if self.proc < 0:
            raise ValueError(f"proc index must be >= 0, got {self.proc}")


Instruction = Union[Action, Call]


@dataclass(frozen=True)
class Program:
    """Main instruction list plus subprocess lists. Immutable; no length
    limits are imposed on main or any subprocess."""

    main: tuple[Instruction, ...] = ()
    procs: tuple[tuple[Instruction, ...], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "main", tuple(self.main))
        object.__setattr__(self, "procs", tuple(tuple(p) for p in self.procs))

    def calls(self) -> Iterator[tuple[str, int, Call]]:
        """All Call instructions with their location (frame name, index)."""
        for i, ins in enumerate(self.main):
            if isinstance(ins, Call):
                yield "main", i, ins
        for k, proc in enumerate(self.procs):
            for i, ins in enumerate(proc):
                if isinstance(ins, Call):
                    yield f"proc{k + 1}", i, ins


@dataclass(frozen=True)
class ExecutionLimits:
    """Budget for interpretation: primitive actions emitted and call-stack
    frames. Recursion can diverge, so both bounds are mandatory."""

    max_steps: int = 10_000
    max_depth: int = 1_000

    def __post_init__(self) -> None:
        if self.max_steps < 1 or self.max_depth < 1:
            raise ValueError("limits must be >= 1")


class ExecutionStatus(Enum):
    COMPLETED = "completed"
    PROGRAM_ENDED = "program_ended"
    STEP_BUDGET_EXHAUSTED = "step_budget_exhausted"
    DEPTH_EXCEEDED = "depth_exceeded"


@dataclass(frozen=True)
class ExecutionTrace:
    """Primitive actions taken, the world state before/after each, and why
    execution stopped. len(states) == len(actions) + 1."""

    actions: tuple[Action, ...]
    states: tuple[WorldState, ...]
    status: ExecutionStatus


class DepthLimitError(RuntimeError):
    """Call stack exceeded max_depth before the next primitive."""


class DanglingCallError(ValueError):
    """A Call referenced a subprocess the program does not define."""


class ProgramFormatError(ValueError):
    """Raised for malformed program documents."""


def program_length(program: Program) -> int:
    """Stored instruction count: |main| plus the lengths of all subprocesses.
    A call counts as exactly one instruction; nesting does not multiply."""
    return len(program.main) + sum(len(p) for p in program.procs)


def _unroll(program: Program, max_depth: int) -> Iterator[Action]:
    """Yield the primitive actions the program generates, depth-first.

    Frames exhausted by advancing past their last instruction are popped
    before a call pushes, so tail recursion runs at constant depth. Raises
    DepthLimitError when more than max_depth call transfers happen without a
    primitive in between (runaway non-tail recursion or a pure call cycle).
    """
    stack: list[list] = [[program.main, 0]]
    calls_since_yield = 0
    while stack:
        frame = stack[-1]
        seq, idx = frame
        if idx >= len(seq):
            stack.pop()
            continue
        frame[1] = idx + 1
        ins = seq[idx]
        if isinstance(ins, Call):
            if ins.proc >= len(program.procs):
                raise DanglingCallError(
                    f"call to subprocess {ins.proc + 1} but only {len(program.procs)} defined"
                )
            while stack and stack[-1][1] >= len(stack[-1][0]):
                stack.pop()
            calls_since_yield += 1
            if len(stack) + 1 > max_depth or calls_since_yield > max_depth:
                raise DepthLimitError(f"call stack exceeded {max_depth} frames")
            stack.append([program.procs[ins.proc], 0])
        else:
            calls_since_yield = 0
            yield ins


def flatten(program: Program, limits: ExecutionLimits = ExecutionLimits()) -> tuple[list[Action], bool]:
    """Purely syntactic unrolling of the program into the action sequence it
    generates, independent of any puzzle. Returns at most limits.max_steps
    actions plus a flag that is True iff the full unrolling is longer.
    Raises DepthLimitError for runaway non-tail recursion."""
    actions: list[Action] = []
    for action in _unroll(program, limits.max_depth):
        if len(actions) == limits.max_steps:
            return actions, True
        actions.append(action)
    return actions, False


def execute(puzzle: Puzzle, program: Program, limits: ExecutionLimits = ExecutionLimits()) -> ExecutionTrace:
    """Interpret the program against the puzzle from its start pose.

    Completion is checked after every primitive action, so a recursive
    program halts the moment the last light turns on. Calls cost no budget;
    the step budget counts primitive actions only.
    """
    state = initial_state(puzzle)
    actions: list[Action] = []
    states: list[WorldState] = [state]
    if is_complete(puzzle, state):
        return ExecutionTrace(tuple(actions), tuple(states), ExecutionStatus.COMPLETED)
    status = ExecutionStatus.PROGRAM_ENDED
    try:
        for action in _unroll(program, limits.max_depth):
            if len(actions) == limits.max_steps:
                status = ExecutionStatus.STEP_BUDGET_EXHAUSTED
                break
            state, _ = step(puzzle, state, action)
            actions.append(action)
            states.append(state)
            if is_complete(puzzle, state):
                status = ExecutionStatus.COMPLETED
                break
    except DepthLimitError:
        status = ExecutionStatus.DEPTH_EXCEEDED
    return ExecutionTrace(tuple(actions), tuple(states), status)


@dataclass(frozen=True)
class Violation:
    """One rule the program breaks, anchored to an instruction position.
    frame is "main" or "proc<k>" (1-based); index is -1 for frame-level
    violations such as a non-empty subprocess in a flat condition."""

    code: str
    frame: str
    index: int
    message: str


def validate_program(program: Program, condition: ConditionSpec) -> list[Violation]:
    """Check a program against a condition's affordances. Returns the empty
    list when the program is acceptable.

    Flat conditions permit no subprocess use at all; hierarchy conditions
    permit up to four subprocesses of unlimited length. Calls to undefined
    subprocesses are rejected everywhere.
    """
    violations: list[Violation] = []
    allowed = condition.subprocesses_allowed
    if len(program.procs) > allowed:
        for k in range(allowed, len(program.procs)):
            if condition.is_flat and not program.procs[k]:
                continue  # empty proc lists carry no content in flat mode
            violations.append(
                Violation(
                    code="subprocess_not_permitted" if condition.is_flat else "too_many_subprocesses",
                    frame=f"proc{k + 1}",
                    index=-1,
                    message=(
                        "subprocess use not permitted in this condition"
                        if condition.is_flat
                        else f"at most {allowed} subprocesses allowed"
                    ),
                )
            )
    for frame, index, call in program.calls():
        if condition.is_flat:
            violations.append(
                Violation(
                    code="subprocess_not_permitted",
                    frame=frame,
                    index=index,
                    message="subprocess use not permitted in this condition",
                )
            )
        elif call.proc >= len(program.procs):
            violations.append(
                Violation(
                    code="dangling_call",
                    frame=frame,
                    index=index,
                    message=f"call{call.proc + 1} references an undefined subprocess",
                )
            )
    return violations


_CALL_TOKENS = {f"call{k + 1}": k for k in range(MAX_PROCS)}


def _instruction_from_token(token: object, where: str) -> Instruction:
    if not isinstance(token, str):
        raise ProgramFormatError(f"{where}: instruction must be a string, got {token!r}")
    if token in _CALL_TOKENS:
        return Call(_CALL_TOKENS[token])
    try:
        return Action.from_token(token)
    except ValueError:
        raise ProgramFormatError(f"{where}: unknown instruction token {token!r}") from None


def instruction_token(ins: Instruction) -> str:
    return f"call{ins.proc + 1}" if isinstance(ins, Call) else ins.token


def parse_program(doc: object) -> Program:
    """Build a Program from its wire form {main: [...], procs: [[...], ...]}
    with tokens walk/jump/left/right/light/call1..call4. Accepts a JSON
    object (dict); dangling calls are representable and caught by
    validation, not parsing."""
    if not isinstance(doc, dict):
        raise ProgramFormatError("program document must be an object")
    extra = doc.keys() - {"main", "procs"}
    if extra:
        raise ProgramFormatError(f"unknown fields: {', '.join(sorted(extra))}")
    raw_main = doc.get("main", [])
    raw_procs = doc.get("procs", [])
    if not isinstance(raw_main, list):
        raise ProgramFormatError("main must be an array")
    if not isinstance(raw_procs, list) or not all(isinstance(p, list) for p in raw_procs):
        raise ProgramFormatError("procs must be an array of arrays")
    main = tuple(
        _instruction_from_token(tok, f"main[{i}]") for i, tok in enumerate(raw_main)
    )
    procs = tuple(
        tuple(
            _instruction_from_token(tok, f"proc{k + 1}[{i}]")
            for i, tok in enumerate(raw)
        )
        for k, raw in enumerate(raw_procs)
    )
    return Program(main=main, procs=procs)


def serialize_program(program: Program) -> dict:
    return {
        "main": [instruction_token(i) for i in program.main],
        "procs": [[instruction_token(i) for i in p] for p in program.procs],
    }


def trace_to_doc(trace: ExecutionTrace) -> dict:
    """Wire form of a trace: action tokens, per-state frames, stop status."""
    return {
        "actions": [a.token for a in trace.actions],
        "frames": [
            {"x": s.pose.x, "y": s.pose.y, "dir": s.pose.heading.letter, "lit_bits": s.lit}
            for s in trace.states
        ],
        "status": trace.status.value,
    }
