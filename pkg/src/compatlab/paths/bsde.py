"""Backward equation on a finite binary tree driver.

Node ``i`` at level ``k`` has children ``2i`` (down) and ``2i + 1`` (up) at level
``k + 1``.  The leaves under a level-``k`` node form the contiguous block
``[i 2^(N-k), (i+1) 2^(N-k))``, so conditional expectations are block averages.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

MAX_DEPTH = 20


@dataclass(frozen=True)
class TreeDriver:
    depth: int
    horizon: float
    U: Sequence[np.ndarray]       # per level, shape (2**k,)
    V: Sequence[np.ndarray]       # per level, shape (2**k,)
    p_up: Sequence[np.ndarray]    # per level k < depth, P(child 2i+1 | node i)

    def __post_init__(self):
        N = self.depth
        if not 1 <= N <= MAX_DEPTH:
            raise ValueError(f"depth must be in [1, {MAX_DEPTH}]")
        for name, levels, count in (("U", self.U, N + 1), ("V", self.V, N + 1), ("p_up", self.p_up, N)):
            if len(levels) != count:
                raise ValueError(f"{name} needs {count} levels")
            for k, arr in enumerate(levels):
                if np.shape(arr) != (2 ** k,):
                    raise ValueError(f"{name}[{k}] must have shape ({2 ** k},)")
        for p in self.p_up:
            if ((p < 0) | (p > 1)).any():
                raise ValueError("branch probabilities must lie in [0, 1]")

    @classmethod
    def random_walk(cls, depth: int, horizon: float = 1.0, p: float = 0.5, step: float = 1.0,
                    U: Callable | None = None) -> "TreeDriver":
        """``V`` a +-``step`` walk; ``U(t, v)`` optional, default 0."""
        if not 1 <= depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in [1, {MAX_DEPTH}]")
        V = [np.zeros(1)]
        for k in range(1, depth + 1):
            prev = np.repeat(V[-1], 2)
            V.append(prev + np.tile([-step, step], 2 ** (k - 1)))
        dt = horizon / depth
        Ul = [np.asarray(U(k * dt, v), dtype=np.float64) * np.ones_like(v) if U else np.zeros_like(v)
              for k, v in enumerate(V)]
        P = [np.full(2 ** k, float(p)) for k in range(depth)]
        return cls(depth, horizon, Ul, V, P)

    @property
    def dt(self) -> float:
        return self.horizon / self.depth

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.depth + 1) * self.dt

    @property
    def n_leaves(self) -> int:
        return 2 ** self.depth

    def leaf_probs(self) -> np.ndarray:
        w = np.ones(1)
        for p in self.p_up:
            w = np.stack([w * (1 - p), w * p], axis=1).ravel()
        return w

    def node_probs(self, k: int) -> np.ndarray:
        return self.leaf_probs().reshape(2 ** k, -1).sum(axis=1)

    def leaf_paths(self, levels) -> np.ndarray:
        """Expand per-level node values to ``(leaves, depth+1)`` paths."""
        N = self.depth
        leaves = np.arange(self.n_leaves)
        return np.stack([np.asarray(levels[k])[leaves >> (N - k)] for k in range(N + 1)], axis=1)

    def cond_exp(self, leaf_values: np.ndarray, k: int, weights=None) -> np.ndarray:
        """``E[value | F_k]`` as a level-``k`` node array."""
        w = self.leaf_probs() if weights is None else weights
        num = (w * leaf_values).reshape(2 ** k, -1).sum(axis=1)
        den = w.reshape(2 ** k, -1).sum(axis=1)
        return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


@dataclass
class BSDEResult:
    X: list
    Z: list
    iterations: int
    converged: bool
    sup_changes: list = field(default_factory=list)


def bsde_solve(tree: TreeDriver, f: Callable, bound: Callable, tol: float = 1e-12,
               max_iter: int | None = None) -> BSDEResult:
    """Fixed-point iteration ``X = U + E[int_t^T f(s, X(. + dt), V) ds | F_t]``.

    ``f(t_j, x_future, v_path)`` sees the shifted solution only from ``t_j`` on
    (``x_future`` has ``depth + 1 - j`` columns) plus the whole driver path, and
    returns one value per leaf.  ``bound(t_j, v_path)`` must dominate ``|f|``; the
    integral is a left-endpoint sum.  Non-convergence is reported, not raised.
    """
    N, dt = tree.depth, tree.dt
    t = tree.times
    max_iter = N + 5 if max_iter is None else max_iter
    w = tree.leaf_probs()
    Vp = tree.leaf_paths(tree.V)
    Up = tree.leaf_paths(tree.U)
    X = [np.array(u, dtype=np.float64) for u in tree.U]
    Z = [np.zeros_like(u) for u in X]
    changes = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        Xp = tree.leaf_paths(X)
        shifted = np.concatenate([Xp[:, 1:], Up[:, -1:]], axis=1)
        F = np.empty((tree.n_leaves, N))
        for j in range(N):
            fj = np.broadcast_to(np.asarray(f(t[j], shifted[:, j:], Vp), dtype=np.float64),
                                 (tree.n_leaves,))
            gj = np.broadcast_to(np.asarray(bound(t[j], Vp), dtype=np.float64), (tree.n_leaves,))
            if (np.abs(fj) > gj).any():
                raise ValueError(f"|f| exceeds its declared bound at t={t[j]}")
            F[:, j] = fj
        G = np.zeros((tree.n_leaves, N + 1))
        G[:, :N] = np.cumsum((F * dt)[:, ::-1], axis=1)[:, ::-1]
        Z = [tree.cond_exp(G[:, k], k, w) for k in range(N + 1)]
        X_new = [tree.U[k] + Z[k] for k in range(N + 1)]
        change = max(float(np.max(np.abs(a - b))) for a, b in zip(X_new, X))
        changes.append(change)
        X = X_new
        if change < tol:
            converged = True
            break
    return BSDEResult(X, Z, it, converged, changes)


def backward_induction(tree: TreeDriver, terminal: np.ndarray) -> list:
    """``E[terminal | F_k]`` level by level from the leaves up."""
    out = [None] * (tree.depth + 1)
    out[-1] = np.asarray(terminal, dtype=np.float64)
    for k in range(tree.depth - 1, -1, -1):
        child = out[k + 1].reshape(-1, 2)
        p = tree.p_up[k]
        out[k] = (1 - p) * child[:, 0] + p * child[:, 1]
    return out


def conditional_variation(tree: TreeDriver, Z, partition=None) -> float:
    """``E[sum_i |E[Z(t_{i+1}) - Z(t_i) | F_{t_i}]|]`` over a partition of tree levels.

    The default partition uses every level, which is the finest available and hence
    the supremum over partitions on a tree.
    """
    levels = list(range(tree.depth + 1)) if partition is None else sorted(set(partition))
    if levels[0] != 0 or levels[-1] != tree.depth:
        raise ValueError("partition must start at level 0 and end at the last level")
    w = tree.leaf_probs()
    Zp = tree.leaf_paths(Z)
    total = 0.0
    for a, b in zip(levels[:-1], levels[1:]):
        inc = tree.cond_exp(Zp[:, b], a, w) - np.asarray(Z[a])
        total += float(np.sum(tree.node_probs(a) * np.abs(inc)))
    return total


def integrated_bound(tree: TreeDriver, bound: Callable) -> float:
    """``E[sum_j g(t_j, V) dt]``, the left-endpoint value of ``E[int_0^T g(s, V) ds]``."""
    Vp = tree.leaf_paths(tree.V)
    w = tree.leaf_probs()
    acc = np.zeros(tree.n_leaves)
    for j in range(tree.depth):
        acc = acc + np.broadcast_to(np.asarray(bound(tree.times[j], Vp), dtype=np.float64),
                                    (tree.n_leaves,)) * tree.dt
    return float(np.sum(w * acc))
