"""Experiment conditions: what program affordances a participant gets and how
bonuses are computed."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["ConditionSpec", "CONDITIONS", "get_condition"]


@dataclass(frozen=True)
class ConditionSpec:
    """One experimental condition.

    subprocesses_allowed is 0 (flat programs only) or 4. counter_visible
    controls whether clients are shown the stored program length.
    bonus_mode is "fixed" (flat amount per completed puzzle) or "linear"
    (decreasing with distance from the pool's shortest solution).
    """

    id: str
    subprocesses_allowed: int
    counter_visible: bool
    efficiency_instructions: bool
    bonus_mode: str

    def __post_init__(self) -> None:
        if self.subprocesses_allowed not in (0, 4):
            raise ValueError("subprocesses_allowed must be 0 or 4")
        if self.bonus_mode not in ("fixed", "linear"):
            raise ValueError("bonus_mode must be 'fixed' or 'linear'")

    @property
    def is_flat(self) -> bool:
        return self.subprocesses_allowed == 0


CONDITIONS: dict[str, ConditionSpec] = {
    c.id: c
    for c in (
        ConditionSpec("efficient_flat", 0, False, True, "linear"),
        ConditionSpec("default_flat", 0, False, False, "fixed"),
        ConditionSpec("efficient_hierarchy", 4, True, True, "linear"),
        ConditionSpec("default_hierarchy", 4, False, False, "fixed"),
    )
}


def get_condition(condition_id: str) -> ConditionSpec:
    try:
        return CONDITIONS[condition_id]
    except KeyError:
        raise KeyError(
            f"unknown condition {condition_id!r}; known: {', '.join(sorted(CONDITIONS))}"
        ) from None
