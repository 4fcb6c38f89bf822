from __future__ import annotations

import numpy as np

from .grid import TimeGrid


def _batch(a: np.ndarray) -> np.ndarray:
    if a.ndim == 1:
        return a[None, :, None]
    if a.ndim == 2:
        return a[None]
    return a


def dm_metric(x, y, grid: TimeGrid):
    """``int_0^T |x(s) - y(s)| ^ 1 ds`` for cadlag step paths on ``grid``.

    Takes single paths ``(n+1,)`` / ``(n+1, d)`` (returns a float) or batches
    ``(P, n+1, d)`` (returns ``(P,)``).  A step path's integral is its
    left-endpoint sum, so no quadrature error enters.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"path shapes differ: {x.shape} vs {y.shape}")
    xb, yb = _batch(x), _batch(y)
    if xb.shape[1] != grid.steps + 1:
        raise ValueError(f"paths have {xb.shape[1]} points, grid has {grid.steps + 1}")
    clipped = np.minimum(np.linalg.norm(xb - yb, axis=2), 1.0)
    out = clipped[:, :-1].sum(axis=1) * grid.dt
    return float(out[0]) if x.ndim < 3 else out


def sup_distance(x, y) -> np.ndarray:
    """Per-path ``sup_t |x(t) - y(t)|`` for ``(P, n+1, d)`` arrays."""
    return np.linalg.norm(np.asarray(x) - np.asarray(y), axis=2).max(axis=1)
