"""Feature maps from path ensembles.

Every extractor sees only the part of the path its sigma-algebra allows: temporal
features read grid values at times ``<= t``; RC features integrate the step path
over backward windows (X side) or forward windows (Y side).
"""
from __future__ import annotations

from itertools import combinations_with_replacement

import numpy as np

from ..paths import PathEnsemble


def poly_expand(Z: np.ndarray, degree: int) -> np.ndarray:
    """All monomials of the columns of ``Z`` with total degree ``1..degree`` (no constant)."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 1:
        Z = Z[:, None]
    if degree < 1:
        raise ValueError("degree must be >= 1")
    cols = [Z]
    for deg in range(2, degree + 1):
        for combo in combinations_with_replacement(range(Z.shape[1]), deg):
            cols.append(np.prod(Z[:, combo], axis=1, keepdims=True))
    return np.hstack(cols)


def _check_time(ens: PathEnsemble, t: float):
    if t < 0 or t > ens.grid.horizon * (1 + 1e-12):
        raise ValueError(f"t={t} outside [0, {ens.grid.horizon}]")


def temporal_indices(ens: PathEnsemble, t: float, m: int) -> np.ndarray:
    """``m`` grid indices evenly spread over ``(0, k_t]``, always ending at ``k_t``."""
    _check_time(ens, t)
    if m < 1:
        raise ValueError("m must be >= 1")
    kt = int(ens.grid.index(t))
    return np.round(np.linspace(0, kt, m + 1)[1:]).astype(np.int64)


def features_temporal(ens: PathEnsemble, t: float, m: int = 1, degree: int = 1) -> np.ndarray:
    idx = temporal_indices(ens, t, m)
    raw = ens.values[:, idx, :].reshape(ens.n_paths, -1)
    return poly_expand(raw, degree)


def _running_integral(ens: PathEnsemble, u: np.ndarray, g) -> np.ndarray:
    """``int_0^u g(x(r)) dr`` for the step path, extended flat beyond the horizon. Shape (P, len(u), d)."""
    gv = g(ens.values)
    dt = ens.grid.dt
    cum = np.concatenate([np.zeros_like(gv[:, :1]), np.cumsum(gv[:, :-1] * dt, axis=1)], axis=1)
    u = np.asarray(u, dtype=np.float64)
    k = ens.grid.index(u)
    frac = (u - ens.grid.points[k])[None, :, None]
    return cum[:, k] + frac * gv[:, k]


def window_integrals(ens: PathEnsemble, s_values, r: float, side: str, g=None) -> np.ndarray:
    """Backward ``int_{(s-r) v 0}^s`` (side ``"x"``) or forward ``int_s^{s+r}`` (side ``"y"``)."""
    g = g if g is not None else (lambda v: v)
    s = np.atleast_1d(np.asarray(s_values, dtype=np.float64))
    if side == "x":
        lo, hi = np.maximum(s - r, 0.0), s
    elif side == "y":
        lo, hi = s, s + r
    else:
        raise ValueError("side must be 'x' or 'y'")
    out = _running_integral(ens, hi, g) - _running_integral(ens, lo, g)
    return out.reshape(ens.n_paths, -1)


def features_rc(ens: PathEnsemble, t: float, eps: float, r: float, side: str,
                s_values=None, basis=None, degree: int = 1) -> np.ndarray:
    """RC window features at ``s <= t`` (default ``s = t``) for each ``g`` in ``basis``."""
    _check_time(ens, t)
    if not 0 < r < eps:
        raise ValueError(f"window r={r} must satisfy 0 < r < eps={eps}")
    s_values = (t,) if s_values is None else tuple(s_values)
    if any(s > t + 1e-15 for s in s_values):
        raise ValueError("window anchors must not exceed t")
    basis = basis or (None,)
    blocks = [window_integrals(ens, s_values, r, side, g) for g in basis]
    return poly_expand(np.hstack(blocks), degree)
