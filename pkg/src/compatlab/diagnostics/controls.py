"""Reference (X, Y) pairs with known compatibility status."""
from __future__ import annotations

import numpy as np

from ..paths import ItoModel, PathEnsemble, Stream, TimeGrid, brownian, euler_ito

LIPSCHITZ = ItoModel(sigma=lambda x: 0.5 + 0.2 * np.sin(x[:, 0]), drift=lambda x: -0.5 * x)


def anticipating_control(grid: TimeGrid, paths, stream: Stream) -> tuple:
    """``Y = W`` and ``X`` the constant path ``W(T)``: X knows Y's future at every time."""
    W = brownian(grid, 1, paths, stream.child("w"))
    X = W.with_values(np.repeat(W.values[:, -1:], grid.steps + 1, axis=1), kind="anticipating")
    return X, W


def adapted_control(grid: TimeGrid, paths, stream: Stream, model: ItoModel = LIPSCHITZ,
                    x0: float = 0.0) -> tuple:
    """``Y = W`` and ``X`` the Euler solution it drives (adapted, hence compatible)."""
    W = brownian(grid, 1, paths, stream.child("w"))
    return euler_ito(model, x0, W), W


def reversed_control(grid: TimeGrid, paths, stream: Stream) -> tuple:
    """``X(t) = W(T) - W(T - t)``: the time-reversed driver, which carries future increments."""
    W = brownian(grid, 1, paths, stream.child("w"))
    v = W.values
    return W.with_values(v[:, -1:] - v[:, ::-1], kind="reversed"), W
