from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .grid import TimeGrid


class SolverError(RuntimeError):
    """A scheme produced a non-finite value; ``path`` is the first offending path id."""

    def __init__(self, message: str, path: int):
        super().__init__(f"{message} (path {path})")
        self.path = path


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class PathEnsemble:
    """``P`` discretised paths on a shared grid; ``values[p, k]`` holds on ``[t_k, t_{k+1})``.

    ``provenance`` records the root seed, the stream tags consumed and an optional
    spec hash so downstream diagnostics can refuse mismatched inputs.
    """

    values: np.ndarray
    grid: TimeGrid
    path_ids: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3 or v.shape[1] != self.grid.steps + 1:
            raise ValueError(f"values must be (P, {self.grid.steps + 1}, d), got {v.shape}")
        if v.shape[0] != len(self.path_ids):
            raise ValueError("path_ids length does not match values")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "path_ids", np.asarray(self.path_ids, dtype=np.int64))

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def dims(self) -> int:
        return self.values.shape[2]

    @property
    def seed(self):
        return self.provenance.get("seed")

    def at(self, t) -> np.ndarray:
        """Cadlag evaluation: value at the last grid point ``<= t``; shape ``(P, d)``."""
        return self.values[:, int(self.grid.index(t))]

    def upto(self, k: int) -> np.ndarray:
        """Read-only view of steps ``0..k``; the only window non-anticipating callers see."""
        view = self.values[:, : k + 1]
        view.flags.writeable = False
        return view

    def terminal(self) -> np.ndarray:
        return self.values[:, -1]

    def component(self, dims) -> "PathEnsemble":
        dims = np.atleast_1d(dims)
        return replace(self, values=self.values[:, :, dims])

    def coarsen(self, steps: int) -> "PathEnsemble":
        """Subsample onto a coarser grid whose points are a subset of this one."""
        if self.grid.steps % steps:
            raise ValueError(f"{steps} does not divide {self.grid.steps}")
        stride = self.grid.steps // steps
        grid = TimeGrid(self.grid.horizon, steps)
        return replace(self, values=self.values[:, ::stride], grid=grid)

    def with_values(self, values, **prov) -> "PathEnsemble":
        return PathEnsemble(values, self.grid, self.path_ids, {**self.provenance, **prov})

    def check_finite(self, what: str = "ensemble"):
        bad = ~np.isfinite(self.values).all(axis=(1, 2))
        if bad.any():
            raise SolverError(f"non-finite {what}", int(self.path_ids[np.argmax(bad)]))


def stack(*ensembles: PathEnsemble) -> PathEnsemble:
    """Concatenate along the dimension axis (e.g. ``Y = (U, V)``)."""
    first = ensembles[0]
    for e in ensembles[1:]:
        if e.grid != first.grid or not np.array_equal(e.path_ids, first.path_ids):
            raise ValueError("cannot stack ensembles on different grids/paths")
    return first.with_values(np.concatenate([e.values for e in ensembles], axis=2))
