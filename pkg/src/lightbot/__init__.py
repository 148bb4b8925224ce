"""Lightbot: a hierarchical problem-solving environment.

A deterministic block-world puzzle game, a hierarchical program DSL with an
interpreter and flattening, sequence compression into programs, exact and
RL-based flat-solution solvers, an analysis pipeline for experiment exports,
and the experiment service behind the browser client.
"""

from .world import (
    Action,
    Heading,
    Pose,
    Puzzle,
    PuzzleFormatError,
    StepEvent,
    Tile,
    WorldState,
    encode_state,
    initial_state,
    is_complete,
    parse_puzzle,
    serialize_puzzle,
    step,
)
from .program import (
    Call,
    ExecutionLimits,
    ExecutionStatus,
    ExecutionTrace,
    Program,
    Violation,
    execute,
    flatten,
    parse_program,
    program_length,
    serialize_program,
    validate_program,
)
from .compress import (
    CompressionConfig,
    CompressionResult,
    compress,
    compressibility,
    find_best_candidate,
    recursion_pass,
)
from .conditions import CONDITIONS, ConditionSpec, get_condition
from .solver_exact import bfs_shortest, enumerate_shortest

__version__ = "0.1.0"
