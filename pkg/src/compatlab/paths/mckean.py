from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ensemble import PathEnsemble
from .euler import _as_matrix, _as_vector, _guard, _initial
from .grid import TimeGrid
from .streams import Stream


@dataclass(frozen=True)
class McKeanVlasovModel:
    """Coefficients ``sigma(x, particles)`` and ``drift(x, particles)``.

    ``particles`` is the full ``(N, d)`` state at the current step and stands in for
    the law of ``X(t)``; ``x`` is the same array (each particle's own state).
    """

    sigma: Callable[[np.ndarray, np.ndarray], np.ndarray]
    drift: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dims: int = 1
    noise_dims: int = 1


def mckean_vlasov(model: McKeanVlasovModel, x0, n_particles: int, grid: TimeGrid,
                  stream: Stream) -> PathEnsemble:
    """Explicit particle scheme: the law enters only through the current empirical measure."""
    if n_particles < 2:
        raise ValueError("need at least 2 particles")
    N, n, d, m = n_particles, grid.steps, model.dims, model.noise_dims
    ids = np.arange(N)
    dW = np.sqrt(grid.dt) * stream.normals(ids, n * m).reshape(N, n, m)
    X = np.empty((N, n + 1, d))
    X[:, 0] = _initial(x0, N, d)
    for k in range(n):
        xk = X[:, k]
        s = _as_matrix(model.sigma(xk, xk), N, d, m)
        b = _as_vector(model.drift(xk, xk), N, d)
        _guard(s, ids, f"diffusion coefficient at step {k}")
        _guard(b, ids, f"drift at step {k}")
        X[:, k + 1] = xk + np.einsum("pdm,pm->pd", s, dW[:, k]) + b * grid.dt
    prov = {"seed": stream.seed, "streams": [stream.tag], "solver": "mckean_vlasov"}
    return PathEnsemble(X, grid, ids, prov)


def linear_mean_ode(m0: float, a: float, b: float, t):
    """Mean of ``dX = (a X + b E[X]) dt + sigma dW``: ``m(t) = m0 exp((a + b) t)``."""
    return m0 * np.exp((a + b) * np.asarray(t))


def linear_mean_euler_bias(m0: float, a: float, b: float, grid: TimeGrid) -> float:
    """``|m(T) - m0 (1 + (a+b) dt)^n|``, the exact time-discretisation gap of the mean."""
    c = a + b
    return abs(m0 * np.exp(c * grid.horizon) - m0 * (1 + c * grid.dt) ** grid.steps)


def linear_mean_dt_bound(m0: float, a: float, b: float, grid: TimeGrid) -> float:
    """A-priori bound ``|m0| c^2 T dt e^{|c| T} / 2`` on that gap (``c = a + b``)."""
    c = a + b
    T = grid.horizon
    return abs(m0) * c * c * T * grid.dt * np.exp(abs(c) * T) / 2
