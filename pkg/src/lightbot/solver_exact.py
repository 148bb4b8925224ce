"""Exact shortest flat solution search over the finite puzzle state space.

`bfs_shortest` is the ground-truth oracle for optimal flat solutions.
`enumerate_shortest` brute-forces the full 5-ary tree of action sequences;
it exists to cross-check the search on small instances and is exact but
exponential.
"""

from __future__ import annotations

from collections import deque
from typing import Optional

from .world import Action, Heading, Pose, Puzzle, WorldState, initial_state, is_complete, step

__all__ = ["ACTION_ORDER", "bfs_shortest", "enumerate_shortest"]

# Fixed expansion order; with a FIFO queue it fully determinizes which of
# several equal-length solutions is returned.
ACTION_ORDER = (
    Action.WALK,
    Action.JUMP,
    Action.TURN_LEFT,
    Action.TURN_RIGHT,
    Action.LIGHT,
)


def bfs_shortest(puzzle: Puzzle) -> Optional[list[Action]]:
    """Minimum-length action sequence that turns on every light, or None if
    no sequence does. Deterministic: ties are resolved by expansion order."""
    start = initial_state(puzzle)
    if is_complete(puzzle, start):
        return []
    visited = {start}
    parent = {}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for action in ACTION_ORDER:
            nxt, _ = step(puzzle, state, action)
            if nxt in visited:
                continue
            visited.add(nxt)
            parent[nxt] = (state, action)
            if is_complete(puzzle, nxt):
                actions = []
                cur = nxt
                while cur != start:
                    cur, act = parent[cur]
                    actions.append(act)
                actions.reverse()
                return actions
            queue.append(nxt)
    return None


def _transition_tables(puzzle: Puzzle) -> tuple[list[int], list[bool], list[int], int]:
    """Dense tables over state ids (((y*W+x)*4+heading) << L | lit):
    successor id per action, completion flag, and an admissible
    remaining-action lower bound (max Manhattan distance to an unlit light
    plus the number of unlit lights)."""
    W, H, L = puzzle.width, puzzle.height, puzzle.num_lights
    full = puzzle.all_lit_mask
    n_pose = W * H * 4
    n_states = n_pose << L
    nxt = [0] * (n_states * 5)
    complete = [False] * n_states
    bound = [0] * n_states
    for y in range(H):
        for x in range(W):
            for h in range(4):
                pose_id = (y * W + x) * 4 + h
                for lit in range(full + 1):
                    sid = pose_id << L | lit
                    state = WorldState(Pose(x, y, Heading(h)), lit)
                    complete[sid] = lit == full
                    unlit = [
                        (lx, ly)
                        for i, (lx, ly) in enumerate(puzzle.light_index)
                        if not lit >> i & 1
                    ]
                    if unlit:
                        bound[sid] = max(abs(lx - x) + abs(ly - y) for lx, ly in unlit) + len(unlit)
                    for a, action in enumerate(ACTION_ORDER):
                        ns, _ = step(puzzle, state, action)
                        ns_id = ((ns.pose.y * W + ns.pose.x) * 4 + ns.pose.heading.value) << L | ns.lit
                        nxt[sid * 5 + a] = ns_id
    start = puzzle.start
    start_id = ((start.y * W + start.x) * 4 + start.heading.value) << L
    return nxt, complete, bound, start_id


def enumerate_shortest(puzzle: Puzzle, max_len: int) -> Optional[tuple[int, int]]:
    """Brute-force every action sequence of length <= max_len. Returns the
    minimal completing length and how many sequences achieve it, or None if
    none completes within max_len.

    Exponential in max_len (feasible up to ~12); branches provably unable to
    complete by the current best are cut, which leaves the result exact.
    """
    nxt, complete, bound, start_id = _transition_tables(puzzle)
    best = max_len + 1
    count = 0

    def explore(sid: int, depth: int) -> None:
        nonlocal best, count
        if complete[sid]:
            if depth < best:
                best, count = depth, 1
            elif depth == best:
                count += 1
            return
        if depth + bound[sid] > best:
            return
        base = sid * 5
        d = depth + 1
        explore(nxt[base], d)
        explore(nxt[base + 1], d)
        explore(nxt[base + 2], d)
        explore(nxt[base + 3], d)
        explore(nxt[base + 4], d)

    explore(start_id, 0)
    if best > max_len:
        return None
    return best, count
