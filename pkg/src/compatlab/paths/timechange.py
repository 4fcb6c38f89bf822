from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .brownian import BrownianOracle
from .ensemble import ModelError, PathEnsemble
from .euler import _as_vector, _guard, _initial
from .grid import TimeGrid


@dataclass(frozen=True)
class TimeChangeModel:
    """``X(t) = X(0) + sum_k W_k(int_0^t beta_k(X) ds) zeta_k + int_0^t F(X) ds``.

    ``beta(x)`` maps ``(P, d)`` to ``(P, m)`` nonnegative rates, ``drift(x)`` to ``(P, d)``;
    ``zeta`` is ``(m, d)``.
    """

    beta: Callable[[np.ndarray], np.ndarray]
    zeta: np.ndarray
    drift: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def noise_dims(self) -> int:
        return np.atleast_2d(self.zeta).shape[0]

    @property
    def dims(self) -> int:
        return np.atleast_2d(self.zeta).shape[1]

    def diffusion_matrix(self, x) -> np.ndarray:
        """``a(x) = sum_k beta_k(x) zeta_k zeta_k^T``, shape ``(P, d, d)``."""
        z = np.atleast_2d(self.zeta)
        b = _as_vector(self.beta(x), x.shape[0], self.noise_dims)
        return np.einsum("pk,ki,kj->pij", b, z, z)


@dataclass(frozen=True)
class TimeChangeResult:
    X: PathEnsemble
    tau: np.ndarray    # (P, n+1, m) clocks
    gamma: np.ndarray  # (P, n+1, d) integrated drift


def time_change_euler(model: TimeChangeModel, x0, oracles: Sequence[BrownianOracle],
                      grid: TimeGrid) -> TimeChangeResult:
    """Piecewise-constant solution of the snapped time-change equation.

    Clocks advance by ``beta_k(X(t_j)) dt``; ``W_k`` is read at the new clock from its
    oracle, so the scheme never interpolates Brownian values between grid knots.
    """
    m, d = model.noise_dims, model.dims
    if len(oracles) != m:
        raise ValueError(f"need {m} Brownian oracles, got {len(oracles)}")
    ids = oracles[0].path_ids
    P, n, dt = len(ids), grid.steps, grid.dt
    zeta = np.atleast_2d(np.asarray(model.zeta, dtype=np.float64))
    X = np.empty((P, n + 1, d))
    tau = np.zeros((P, n + 1, m))
    gamma = np.zeros((P, n + 1, d))
    start = _initial(x0, P, d)
    X[:, 0] = start
    for j in range(n):
        b = _as_vector(model.beta(X[:, j]), P, m)
        _guard(b, ids, f"beta at step {j}")
        if (b < 0).any():
            bad = np.argmax((b < 0).any(axis=1))
            raise ModelError(f"beta evaluated negative at step {j} (path {ids[bad]})")
        tau[:, j + 1] = tau[:, j] + b * dt
        if model.drift is not None:
            f = _as_vector(model.drift(X[:, j]), P, d)
            _guard(f, ids, f"drift at step {j}")
            gamma[:, j + 1] = gamma[:, j] + f * dt
        else:
            gamma[:, j + 1] = gamma[:, j]
        w = np.stack([oracles[k].query(tau[:, j + 1, k]) for k in range(m)], axis=1)
        X[:, j + 1] = start + w @ zeta + gamma[:, j + 1]
    prov = {"seed": oracles[0].stream.seed,
            "streams": [o.stream.tag for o in oracles], "solver": "time_change_euler"}
    return TimeChangeResult(PathEnsemble(X, grid, ids, prov), tau, gamma)
