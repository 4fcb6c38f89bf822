from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k T / n`` on ``[0, T]``."""

    horizon: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")

    @cached_property
    def points(self) -> np.ndarray:
        return np.arange(self.steps + 1) * (self.horizon / self.steps)

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    def index(self, t):
        """Largest ``k`` with ``t_k <= t`` (clipped to ``[0, n]``)."""
        k = np.searchsorted(self.points, t, side="right") - 1
        return np.clip(k, 0, self.steps)

    def snap(self, t):
        """The left snap ``eta_n(t) = [n t / T] T / n``; identity on grid points."""
        return self.points[self.index(t)]

    def ceil_index(self, t):
        """First ``k`` with ``t_k >= t``; jumps are applied there."""
        return np.clip(np.searchsorted(self.points, t, side="left"), 0, self.steps)

    def refine(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.horizon, self.steps * factor)

    def as_dict(self) -> dict:
        return {"horizon": self.horizon, "steps": self.steps}
