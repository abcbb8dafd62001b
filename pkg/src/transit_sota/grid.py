"""Discrete time grid shared by every distribution and solve.

All stochastic quantities (waiting times, travel times, budgets) live on a
single grid of fixed-width ticks. Budgets and durations accept strings like
"15s", "2.5m", "1h" anywhere in the public interfaces.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_DURATION_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*(s|sec|m|min|h|hr)?\s*$")

_UNIT_SECONDS = {None: 1.0, "s": 1.0, "sec": 1.0, "m": 60.0, "min": 60.0, "h": 3600.0, "hr": 3600.0}


def parse_duration_seconds(text: str | float | int) -> float:
    """Parse "15s" / "2.5m" / "1h" (bare numbers mean seconds) to seconds."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _DURATION_RE.match(text)
    if not m:
        raise ValueError(f"unparsable duration: {text!r}")
    return float(m.group(1)) * _UNIT_SECONDS[m.group(2)]


@dataclass(frozen=True)
class TimeGrid:
    """Tick width in seconds plus the horizon length in ticks.

    ``budget_ticks`` is the largest time budget any solve on this grid can
    use; probability mass beyond it is tracked as explicit tail mass.
    """

    delta_seconds: float
    budget_ticks: int

    def __post_init__(self) -> None:
        if self.delta_seconds <= 0:
            raise ValueError("delta_seconds must be positive")
        if self.budget_ticks < 1:
            raise ValueError("budget_ticks must be >= 1")

    @classmethod
    def from_durations(cls, delta: str | float, horizon: str | float) -> "TimeGrid":
        d = parse_duration_seconds(delta)
        h = parse_duration_seconds(horizon)
        if d <= 0:
            raise ValueError("grid delta must be positive")
        ticks = int(round(h / d))
        return cls(delta_seconds=d, budget_ticks=max(1, ticks))

    def ticks(self, duration: str | float) -> int:
        """Duration rounded to the nearest whole tick."""
        return int(round(parse_duration_seconds(duration) / self.delta_seconds))

    def ticks_ceil(self, duration: str | float) -> int:
        secs = parse_duration_seconds(duration)
        ticks = int(secs / self.delta_seconds)
        if ticks * self.delta_seconds < secs - 1e-9:
            ticks += 1
        return ticks

    def seconds(self, ticks: float) -> float:
        return ticks * self.delta_seconds

    def compatible(self, other: "TimeGrid") -> bool:
        return (
            abs(self.delta_seconds - other.delta_seconds) < 1e-9
            and self.budget_ticks == other.budget_ticks
        )

    def to_dict(self) -> dict:
        return {"delta_seconds": self.delta_seconds, "budget_ticks": self.budget_ticks}

    @classmethod
    def from_dict(cls, d: dict) -> "TimeGrid":
        return cls(delta_seconds=float(d["delta_seconds"]), budget_ticks=int(d["budget_ticks"]))
