import pytest

from lightbot.world import Action, Heading, Pose, Puzzle, Tile


def make_puzzle(name, rows, lights, start, heading=Heading.EAST):
    """rows: list of lists of heights; lights: set of (x, y)."""
    height = len(rows)
    width = len(rows[0])
    tiles = tuple(
        Tile(height=rows[y][x], is_light=(x, y) in lights)
        for y in range(height)
        for x in range(width)
    )
    return Puzzle(width=width, height=height, tiles=tiles, start=Pose(*start, heading), name=name)


@pytest.fixture
def mini_1x2():
    """Flat corridor: one walk, one light."""
    return make_puzzle("mini_1x2", [[0, 0]], {(1, 0)}, (0, 0))


@pytest.fixture
def mini_2x2():
    """Flat square with two lights along the east wall."""
    return make_puzzle("mini_2x2", [[0, 0], [0, 0]], {(1, 0), (1, 1)}, (0, 0))


@pytest.fixture
def unlightable():
    """The only light sits on an unreachable pillar."""
    return make_puzzle("unlightable", [[0, 3]], {(1, 0)}, (0, 0))


W, J, L, R, T = Action.WALK, Action.JUMP, Action.TURN_LEFT, Action.TURN_RIGHT, Action.LIGHT
