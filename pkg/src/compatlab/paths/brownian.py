from __future__ import annotations

import numpy as np

from . import _kernels
from .ensemble import PathEnsemble
from .grid import TimeGrid
from .streams import Stream, _as_ids


def brownian(grid: TimeGrid, dims: int, paths, stream: Stream) -> PathEnsemble:
    """Standard Brownian paths; draw ``(step, dim)`` of path ``p`` uses counter ``step*dims+dim``."""
    ids = _as_ids(paths)
    z = stream.normals(ids, grid.steps * dims).reshape(len(ids), grid.steps, dims)
    w = np.zeros((len(ids), grid.steps + 1, dims))
    np.cumsum(np.sqrt(grid.dt) * z, axis=1, out=w[:, 1:])
    prov = {"seed": stream.seed, "streams": [stream.tag], "kind": "brownian"}
    return PathEnsemble(w, grid, ids, prov)


class BrownianOracle:
    """Scalar Brownian motion per path, sampled lazily at arbitrary times.

    Queries between cached knots draw from the exact Brownian bridge; queries past
    the last knot extend with an independent increment.  Every answered time is
    cached, so repeating a query returns the identical value.
    """

    def __init__(self, stream: Stream, paths, capacity: int = 64):
        self.stream = stream
        self.path_ids = _as_ids(paths)
        P = len(self.path_ids)
        self._keys = stream.path_keys(self.path_ids)
        self._times = np.zeros((P, capacity))
        self._vals = np.zeros((P, capacity))
        self._counts = np.ones(P, dtype=np.int64)
        self._draws = np.zeros(P, dtype=np.int64)

    @classmethod
    def from_ensemble(cls, ens: PathEnsemble, stream: Stream, dim: int = 0) -> "BrownianOracle":
        """Seed the knot cache with a stored ensemble's grid values."""
        obj = cls(stream, ens.path_ids, capacity=2 * (ens.grid.steps + 1))
        K = ens.grid.steps + 1
        obj._times[:, :K] = ens.grid.points
        obj._vals[:, :K] = ens.values[:, :, dim]
        obj._counts[:] = K
        return obj

    @property
    def n_paths(self) -> int:
        return len(self.path_ids)

    def knots(self, p: int):
        n = self._counts[p]
        return self._times[p, :n].copy(), self._vals[p, :n].copy()

    def _reserve(self):
        if self._counts.max() + 1 > self._times.shape[1]:
            extra = self._times.shape[1]
            self._times = np.concatenate([self._times, np.zeros_like(self._times[:, :extra])], axis=1)
            self._vals = np.concatenate([self._vals, np.zeros_like(self._vals[:, :extra])], axis=1)

    def query(self, t) -> np.ndarray:
        t = np.broadcast_to(np.asarray(t, dtype=np.float64), (self.n_paths,)).copy()
        if (t < 0).any():
            raise ValueError("Brownian query at negative time")
        self._reserve()
        out = np.empty(self.n_paths)
        _kernels.bridge_query(self._times, self._vals, self._counts, self._draws, self._keys, t, out)
        return out

    __call__ = query
