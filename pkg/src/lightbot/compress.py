"""Compression of a flat action sequence into a hierarchical program, and the
compressibility metric derived from it.

The algorithm repeatedly finds the contiguous subsequence of the working
sequence whose extraction into a subprocess saves the most stored
instructions, replaces its (greedy, left-to-right, non-overlapping)
occurrences with a call token, and stops once four subprocesses are stored or
nothing qualifies. A qualifying subsequence has at least two tokens and at
least two non-overlapping occurrences. Later rounds run on a sequence that
already contains call tokens, which is how nested programs arise. A final
pass rewrites a main consisting solely of n >= 2 repeats of one call into a
self-recursive subprocess.

Compressibility of a sequence is (flat length - compressed length) / flat
length, kept exact as a Fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .program import Call, Instruction, Program, program_length

__all__ = [
    "CompressionConfig",
    "Candidate",
    "CompressionResult",
    "find_best_candidate",
    "compress",
    "recursion_pass",
    "compressibility",
]


@dataclass(frozen=True)
class CompressionConfig:
    max_procs: int = 4
    min_len: int = 2
    min_reps: int = 2

    def __post_init__(self) -> None:
        if self.max_procs < 0:
            raise ValueError("max_procs must be >= 0")
        if self.min_len < 2 or self.min_reps < 2:
            raise ValueError("min_len and min_reps must be >= 2")


@dataclass(frozen=True)
class Candidate:
    """A subsequence worth extracting: its greedy non-overlapping occurrence
    count, the stored-instruction savings of extracting it, and where it
    first occurs."""

    subsequence: tuple[Instruction, ...]
    occurrences: int
    savings: int
    first_pos: int


@dataclass(frozen=True)
class CompressionResult:
    program: Program
    flat_length: int
    compressed_length: int
    compressibility: Fraction
    recursion_applied: bool


def _greedy_count(positions: list[int], length: int) -> int:
    """Number of non-overlapping occurrences picked left to right from the
    sorted list of all (possibly overlapping) match positions."""
    count = 0
    cursor = 0
    for p in positions:
        if p >= cursor:
            count += 1
            cursor = p + length
    return count


def find_best_candidate(
    seq: Sequence[Instruction], config: CompressionConfig = CompressionConfig()
) -> Optional[Candidate]:
    """Best extraction candidate in seq, or None if nothing qualifies.

    Savings of extracting an L-token subsequence with k occurrences is
    k*L - (k + L): the occurrences collapse to k call tokens and the
    subsequence is stored once. Ties go to the longer subsequence, then to
    the earlier first occurrence. Zero-savings candidates (k = L = 2) still
    qualify.
    """
    tokens = tuple(seq)
    n = len(tokens)
    best: Optional[Candidate] = None
    best_key: Optional[tuple[int, int, int]] = None
    # If no length-L subsequence repeats, no longer one can: occurrences of
    # an extension are occurrences of its prefix.
    for length in range(config.min_len, n // config.min_reps + 1):
        positions: dict[tuple[Instruction, ...], list[int]] = {}
        for i in range(n - length + 1):
            positions.setdefault(tokens[i : i + length], []).append(i)
        any_repeat = False
        for sub, pos in positions.items():
            count = _greedy_count(pos, length)
            if count < config.min_reps:
                continue
            any_repeat = True
            savings = count * length - (count + length)
            key = (savings, length, -pos[0])
            if best_key is None or key > best_key:
                best_key = key
                best = Candidate(sub, count, savings, pos[0])
        if not any_repeat:
            break
    return best


def _replace_greedy(
    tokens: tuple[Instruction, ...], sub: tuple[Instruction, ...], call: Call
) -> tuple[Instruction, ...]:
    """Replace greedy left-to-right non-overlapping occurrences of sub with
    the call token. Matches the scoring scan exactly."""
    out: list[Instruction] = []
    i = 0
    length = len(sub)
    n = len(tokens)
    while i < n:
        if tokens[i : i + length] == sub:
            out.append(call)
            i += length
        else:
            out.append(tokens[i])
            i += 1
    return tuple(out)


def recursion_pass(program: Program) -> Program:
    """If main is n >= 2 repeats of a single call, append that call to the
    end of its subprocess and shrink main to one call. Otherwise identity."""
    main = program.main
    if len(main) < 2 or not isinstance(main[0], Call):
        return program
    if any(ins != main[0] for ins in main):
        return program
    k = main[0].proc
    procs = list(program.procs)
    procs[k] = procs[k] + (main[0],)
    return Program(main=(main[0],), procs=tuple(procs))


def compress(
    seq: Sequence[Instruction], config: CompressionConfig = CompressionConfig()
) -> CompressionResult:
    """Compress a flat action sequence into a hierarchical program.

    When the recursion pass did not fire, flattening the result reproduces
    the input exactly; when it did, the input is a proper prefix of the
    (unbounded) unrolling and truncating the unrolling at the input length
    reproduces the input.
    """
    work = tuple(seq)
    if not work:
        raise ValueError("cannot compress an empty sequence")
    flat_length = len(work)
    procs: list[tuple[Instruction, ...]] = []
    while len(procs) < config.max_procs:
        candidate = find_best_candidate(work, config)
        if candidate is None:
            break
        call = Call(len(procs))
        procs.append(candidate.subsequence)
        work = _replace_greedy(work, candidate.subsequence, call)
    program = Program(main=work, procs=tuple(procs))
    final = recursion_pass(program)
    compressed_length = program_length(final)
    return CompressionResult(
        program=final,
        flat_length=flat_length,
        compressed_length=compressed_length,
        compressibility=compressibility(flat_length, compressed_length),
        recursion_applied=final is not program,
    )


def compressibility(flat_length: int, compressed_length: int) -> Fraction:
    """Exact stored-length reduction ratio (flat - compressed) / flat."""
    if flat_length <= 0:
        raise ValueError("flat_length must be positive")
    if not 1 <= compressed_length <= flat_length:
        raise ValueError(
            f"compressed_length must be in [1, flat_length], got {compressed_length} vs {flat_length}"
        )
    return Fraction(flat_length - compressed_length, flat_length)
