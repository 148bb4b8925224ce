"""Deterministic Lightbot block world: grid, robot kinematics, and the five
primitive actions.

The world is a rectangular grid of tiles with integer heights; some tiles are
lights. A robot with a position and heading walks, jumps, turns, and switches
lights on. Lights latch: once on they never turn off. All functions here are
pure and all actions are total (blocked moves are no-ops).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional

import numpy as np

__all__ = [
    "Action",
    "Heading",
    "Tile",
    "Pose",
    "Puzzle",
    "WorldState",
    "StepEvent",
    "PuzzleFormatError",
    "step",
    "is_complete",
    "encode_state",
    "initial_state",
    "parse_puzzle",
    "serialize_puzzle",
    "render_ascii",
]


class Heading(Enum):
    """Robot facing direction. Order N,E,S,W is fixed; it drives the one-hot
    encoding and the wire format. y grows southward (origin top-left)."""

    NORTH = 0
    EAST = 1
    SOUTH = 2
    WEST = 3

    @property
    def letter(self) -> str:
        return "NESW"[self.value]

    @classmethod
    def from_letter(cls, letter: str) -> "Heading":
        try:
            return cls("NESW".index(letter))
        except ValueError:
            raise ValueError(f"unknown heading {letter!r}, expected one of N,E,S,W") from None

    def turned_left(self) -> "Heading":
        return Heading((self.value - 1) % 4)

    def turned_right(self) -> "Heading":
        return Heading((self.value + 1) % 4)

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self.value]


# dx, dy per heading; y grows southward, so NORTH is y-1
_DELTAS = ((0, -1), (1, 0), (0, 1), (-1, 0))


class Action(Enum):
    """The five primitive actions. Enum order doubles as the deterministic
    expansion order used by the exact solver."""

    WALK = 0
    JUMP = 1
    TURN_LEFT = 2
    TURN_RIGHT = 3
    LIGHT = 4

    @property
    def token(self) -> str:
        return _ACTION_TOKENS[self.value]

    @classmethod
    def from_token(cls, token: str) -> "Action":
        try:
            return cls(_ACTION_TOKENS.index(token))
        except ValueError:
            raise ValueError(f"unknown action token {token!r}") from None


_ACTION_TOKENS = ("walk", "jump", "left", "right", "light")


@dataclass(frozen=True)
class Tile:
    height: int
    is_light: bool = False

    def __post_init__(self) -> None:
        if self.height < 0:
            raise ValueError(f"tile height must be >= 0, got {self.height}")


@dataclass(frozen=True)
class Pose:
    x: int
    y: int
    heading: Heading


@dataclass(frozen=True)
class WorldState:
    """MDP state: robot pose plus a bitmask over the puzzle's light tiles
    (bit i set iff light i is on)."""

    pose: Pose
    lit: int = 0


@dataclass(frozen=True)
class StepEvent:
    """What a single step did: whether the robot moved, and which light (by
    index into the puzzle's light list) was turned on, if any."""

    moved: bool = False
    light_turned_on: Optional[int] = None


class PuzzleFormatError(ValueError):
    """Raised for malformed or invalid puzzle documents."""


@dataclass(frozen=True)
class Puzzle:
    """Immutable puzzle definition: tile grid (row-major), start pose, name.

    Construction does not require any lights, so tests can build degenerate
    worlds; `parse_puzzle` rejects light-free documents.
    """

    width: int
    height: int
    tiles: tuple[Tile, ...]
    start: Pose
    name: str = ""

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.width}x{self.height}")
        if len(self.tiles) != self.width * self.height:
            raise ValueError(
                f"expected {self.width * self.height} tiles, got {len(self.tiles)}"
            )
        if not self.in_bounds(self.start.x, self.start.y):
            raise ValueError(
                f"start ({self.start.x},{self.start.y}) out of bounds for "
                f"{self.width}x{self.height} grid"
            )

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def tile_at(self, x: int, y: int) -> Tile:
        return self.tiles[y * self.width + x]

    @cached_property
    def light_index(self) -> tuple[tuple[int, int], ...]:
        """Coordinates of all light tiles in row-major order."""
        return tuple(
            (i % self.width, i // self.width)
            for i, t in enumerate(self.tiles)
            if t.is_light
        )

    @cached_property
    def _light_bit(self) -> dict[tuple[int, int], int]:
        return {xy: i for i, xy in enumerate(self.light_index)}

    @cached_property
    def max_height(self) -> int:
        return max(t.height for t in self.tiles)

    @property
    def num_lights(self) -> int:
        return len(self.light_index)

    @property
    def all_lit_mask(self) -> int:
        return (1 << self.num_lights) - 1


def initial_state(puzzle: Puzzle) -> WorldState:
    """Start pose, no lights on."""
    return WorldState(pose=puzzle.start, lit=0)


def step(puzzle: Puzzle, state: WorldState, action: Action) -> tuple[WorldState, StepEvent]:
    """Apply one primitive action. Deterministic and total: an impossible
    move or useless light leaves the state unchanged.

    Walk requires an in-bounds target of equal height. Jump requires a target
    exactly one higher, or lower by any amount. Light turns on the current
    tile's light if there is one and it is off; lights never turn off.
    """
    pose = state.pose
    if action is Action.TURN_LEFT:
        return WorldState(Pose(pose.x, pose.y, pose.heading.turned_left()), state.lit), StepEvent()
    if action is Action.TURN_RIGHT:
        return WorldState(Pose(pose.x, pose.y, pose.heading.turned_right()), state.lit), StepEvent()
    if action is Action.LIGHT:
        bit = puzzle._light_bit.get((pose.x, pose.y))
        if bit is not None and not state.lit >> bit & 1:
            return WorldState(pose, state.lit | 1 << bit), StepEvent(light_turned_on=bit)
        return state, StepEvent()
    # WALK or JUMP
    dx, dy = pose.heading.delta
    tx, ty = pose.x + dx, pose.y + dy
    if not puzzle.in_bounds(tx, ty):
        return state, StepEvent()
    dh = puzzle.tile_at(tx, ty).height - puzzle.tile_at(pose.x, pose.y).height
    ok = dh == 0 if action is Action.WALK else (dh == 1 or dh <= -1)
    if not ok:
        return state, StepEvent()
    return WorldState(Pose(tx, ty, pose.heading), state.lit), StepEvent(moved=True)


def is_complete(puzzle: Puzzle, state: WorldState) -> bool:
    """True iff every light in the puzzle is on."""
    return state.lit == puzzle.all_lit_mask


def encode_state(puzzle: Puzzle, state: WorldState) -> np.ndarray:
    """Binary feature vector: heading one-hot (4), current-tile height one-hot
    (max puzzle height + 1), x one-hot (W), y one-hot (H), then one bit per
    light. Length is constant for a given puzzle."""
    pose = state.pose
    n_h = puzzle.max_height + 1
    vec = np.zeros(4 + n_h + puzzle.width + puzzle.height + puzzle.num_lights)
    vec[pose.heading.value] = 1.0
    off = 4
    vec[off + puzzle.tile_at(pose.x, pose.y).height] = 1.0
    off += n_h
    vec[off + pose.x] = 1.0
    off += puzzle.width
    vec[off + pose.y] = 1.0
    off += puzzle.height
    for i in range(puzzle.num_lights):
        if state.lit >> i & 1:
            vec[off + i] = 1.0
    return vec


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise PuzzleFormatError(message)


def parse_puzzle(text: str) -> Puzzle:
    """Parse the canonical puzzle document (JSON object with keys width,
    height, tiles, start, name). Raises PuzzleFormatError with a precise
    message on any malformed or invalid field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PuzzleFormatError(f"not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "puzzle document must be a JSON object")
    expected = {"width", "height", "tiles", "start", "name"}
    missing = expected - doc.keys()
    _require(not missing, f"missing fields: {', '.join(sorted(missing))}")
    extra = doc.keys() - expected
    _require(not extra, f"unknown fields: {', '.join(sorted(extra))}")

    width, height = doc["width"], doc["height"]
    _require(isinstance(width, int) and width >= 1, f"width must be a positive integer, got {width!r}")
    _require(isinstance(height, int) and height >= 1, f"height must be a positive integer, got {height!r}")
    raw_tiles = doc["tiles"]
    _require(isinstance(raw_tiles, list), "tiles must be an array")
    _require(
        len(raw_tiles) == width * height,
        f"tiles has {len(raw_tiles)} entries, expected width*height = {width * height}",
    )
    tiles = []
    for i, raw in enumerate(raw_tiles):
        x, y = i % width, i // width
        _require(isinstance(raw, dict), f"tile ({x},{y}) must be an object")
        _require(set(raw.keys()) == {"h", "light"}, f"tile ({x},{y}) must have exactly fields h, light")
        h, light = raw["h"], raw["light"]
        _require(isinstance(h, int) and not isinstance(h, bool), f"tile ({x},{y}): h must be an integer")
        _require(h >= 0, f"tile ({x},{y}): negative height {h}")
        _require(isinstance(light, bool), f"tile ({x},{y}): light must be a boolean")
        tiles.append(Tile(height=h, is_light=light))

    raw_start = doc["start"]
    _require(isinstance(raw_start, dict), "start must be an object")
    _require(set(raw_start.keys()) == {"x", "y", "dir"}, "start must have exactly fields x, y, dir")
    sx, sy, sdir = raw_start["x"], raw_start["y"], raw_start["dir"]
    _require(isinstance(sx, int) and not isinstance(sx, bool), "start.x must be an integer")
    _require(isinstance(sy, int) and not isinstance(sy, bool), "start.y must be an integer")
    _require(
        0 <= sx < width and 0 <= sy < height,
        f"start ({sx},{sy}) out of bounds for {width}x{height} grid",
    )
    _require(isinstance(sdir, str) and sdir in "NESW" and len(sdir) == 1, f"start.dir must be one of N,E,S,W, got {sdir!r}")
    _require(isinstance(doc["name"], str), "name must be a string")
    _require(any(t.is_light for t in tiles), "no light tiles")

    return Puzzle(
        width=width,
        height=height,
        tiles=tuple(tiles),
        start=Pose(sx, sy, Heading.from_letter(sdir)),
        name=doc["name"],
    )


def serialize_puzzle(puzzle: Puzzle) -> str:
    """Canonical document: fixed key order, no extra whitespace, LF-terminated."""
    doc = {
        "width": puzzle.width,
        "height": puzzle.height,
        "tiles": [{"h": t.height, "light": t.is_light} for t in puzzle.tiles],
        "start": {"x": puzzle.start.x, "y": puzzle.start.y, "dir": puzzle.start.heading.letter},
        "name": puzzle.name,
    }
    return json.dumps(doc, separators=(",", ":")) + "\n"


def render_ascii(puzzle: Puzzle, state: Optional[WorldState] = None) -> str:
    """Human-readable grid. Each cell shows height plus a light marker:
    '*' lit, 'o' unlit; the robot appears as its heading letter."""
    if state is None:
        state = initial_state(puzzle)
    rows = []
    for y in range(puzzle.height):
        cells = []
        for x in range(puzzle.width):
            tile = puzzle.tile_at(x, y)
            mark = "."
            if tile.is_light:
                bit = puzzle._light_bit[(x, y)]
                mark = "*" if state.lit >> bit & 1 else "o"
            robot = state.pose.heading.letter if (x, y) == (state.pose.x, state.pose.y) else " "
            cells.append(f"{tile.height}{mark}{robot}")
        rows.append(" ".join(cells))
    return "\n".join(rows)
