from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ensemble import PathEnsemble, SolverError
from .grid import TimeGrid


def _as_matrix(out, P: int, d: int, m: int) -> np.ndarray:
    a = np.asarray(out, dtype=np.float64)
    if a.size == P * d * m:
        return a.reshape(P, d, m)
    if a.size in (1, d * m):
        return np.broadcast_to(a.reshape(1, d, m) if a.size > 1 else a.reshape(1, 1, 1), (P, d, m))
    raise ValueError(f"coefficient of shape {a.shape} cannot be read as ({P}, {d}, {m})")


def _as_vector(out, P: int, d: int) -> np.ndarray:
    a = np.asarray(out, dtype=np.float64)
    if a.size == P * d:
        return a.reshape(P, d)
    if a.size in (1, d):
        return np.broadcast_to(a.reshape(1, -1), (P, d))
    raise ValueError(f"coefficient of shape {a.shape} cannot be read as ({P}, {d})")


def _guard(arr, ids, what):
    bad = ~np.isfinite(arr.reshape(arr.shape[0], -1)).all(axis=1)
    if bad.any():
        raise SolverError(f"non-finite {what}", int(ids[np.argmax(bad)]))


@dataclass(frozen=True)
class ItoModel:
    """``dX = sigma(X) dW + drift(X) dt``; coefficients act on ``(P, d)`` state arrays.

    ``sigma`` returns ``(P, d, m)`` (or ``(P,)`` when ``d = m = 1``), ``drift`` ``(P, d)``.
    """

    sigma: Callable[[np.ndarray], np.ndarray]
    drift: Callable[[np.ndarray], np.ndarray]
    dims: int = 1
    noise_dims: int = 1


def _initial(x0, P, d):
    return np.broadcast_to(np.asarray(x0, dtype=np.float64).reshape(-1, d) if np.ndim(x0) else
                           np.full((1, d), float(x0)), (P, d)).copy()


def euler_ito(model: ItoModel, x0, W: PathEnsemble) -> PathEnsemble:
    """Euler-Maruyama on the grid of ``W``: ``X_{k+1} = X_k + sigma(X_k) dW_k + drift(X_k) dt``."""
    P, n, d, m = W.n_paths, W.grid.steps, model.dims, model.noise_dims
    if W.dims != m:
        raise ValueError(f"driver has {W.dims} dims, model expects {m}")
    X = np.empty((P, n + 1, d))
    start = _initial(x0, P, d)
    X[:, 0] = start
    # X_k = x0 + S_k with S accumulating [b, sigma] . [dt, dW]: the same floating-point
    # order as euler_semimartingale on V = (t, W), so the two schemes agree bit for bit
    dV = np.diff(time_and_driver(W).values, axis=1)
    S = np.zeros((P, d))
    for k in range(n):
        s = _as_matrix(model.sigma(X[:, k]), P, d, m)
        b = _as_vector(model.drift(X[:, k]), P, d)
        _guard(s, W.path_ids, f"diffusion coefficient at step {k}")
        _guard(b, W.path_ids, f"drift at step {k}")
        S = S + np.einsum("pdm,pm->pd", np.concatenate([b[:, :, None], s], axis=2), dV[:, k])
        X[:, k + 1] = start + S
    return PathEnsemble(X, W.grid, W.path_ids, {**W.provenance, "solver": "euler_ito"})


def time_and_driver(W: PathEnsemble) -> PathEnsemble:
    """``V = (t, W)`` so an Ito equation reads as ``dX = H(X) dV`` with ``H = [drift, sigma]``."""
    t = np.broadcast_to(W.grid.points[None, :, None], (W.n_paths, W.grid.steps + 1, 1))
    return W.with_values(np.concatenate([t, W.values], axis=2))


def ito_integrand(model: ItoModel):
    """``H(x, t_k) = [drift(x_k), sigma(x_k)]``; reads only the current state."""
    d, m = model.dims, model.noise_dims

    def H(hist, k, t):
        x = hist[:, -1]
        P = x.shape[0]
        b = _as_vector(model.drift(x), P, d)[:, :, None]
        s = _as_matrix(model.sigma(x), P, d, m)
        return np.concatenate([b, s], axis=2)

    return H


def constant_path(value, like: PathEnsemble, dims: int = 1) -> PathEnsemble:
    vals = np.broadcast_to(np.asarray(value, dtype=np.float64).reshape(1, 1, -1),
                           (like.n_paths, like.grid.steps + 1, dims)).copy()
    return like.with_values(vals)


def euler_semimartingale(H, U: PathEnsemble, V: PathEnsemble, grid: TimeGrid | None = None,
                         dims: int | None = None) -> PathEnsemble:
    """Snapped scheme ``X_n(t) = U_n(t) + sum_k H(X_n, t_k) (V(t_{k+1} ^ t) - V(t_k ^ t))``.

    ``H(hist, k, t_k)`` receives the read-only prefix ``X[:, :k+1]`` and must return
    ``(P, d, m)``.  The output is piecewise constant between grid points and, step by
    step, a function of the driver values up to that step only.
    """
    if grid is not None and grid != U.grid:
        U, V = U.coarsen(grid.steps), V.coarsen(grid.steps)
    if U.grid != V.grid or not np.array_equal(U.path_ids, V.path_ids):
        raise ValueError("U and V must share grid and paths")
    P, n = U.n_paths, U.grid.steps
    d = dims or U.dims
    m = V.dims
    t = U.grid.points
    X = np.empty((P, n + 1, d))
    X[:, 0] = U.values[:, 0]
    S = np.zeros((P, d))
    dV = np.diff(V.values, axis=1)
    for k in range(n):
        hist = X[:, : k + 1]
        hist.flags.writeable = False
        h = _as_matrix(H(hist, k, t[k]), P, d, m)
        _guard(h, U.path_ids, f"integrand at step {k}")
        S = S + np.einsum("pdm,pm->pd", h, dV[:, k])
        X[:, k + 1] = U.values[:, k + 1] + S
    prov = {**V.provenance, "solver": "euler_semimartingale"}
    return PathEnsemble(X, U.grid, U.path_ids, prov)
