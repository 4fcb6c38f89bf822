from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _kernels
from .brownian import brownian
from .ensemble import ModelError, PathEnsemble
from .grid import TimeGrid
from .streams import Stream, _as_ids


@dataclass(frozen=True)
class SemimartingaleDecomp:
    """``V = M + A``: ``M`` local martingale with jumps bounded by 1, ``A`` finite variation."""

    M: PathEnsemble
    A: PathEnsemble
    tau: np.ndarray  # (P, len(levels)); inf when the level is never reached
    levels: tuple
    jump_counts: np.ndarray

    def tau_at(self, level: float) -> np.ndarray:
        return self.tau[:, self.levels.index(level)]


def localizing_times(M: PathEnsemble, levels=(1, 2, 3)) -> np.ndarray:
    """``tau_n = inf{t : sup_{s<=t} |M(s)| >= n}`` on the grid, per path and level."""
    levels = np.asarray(sorted(levels), dtype=np.float64)
    absm = np.linalg.norm(M.values, axis=2) if M.dims > 1 else np.abs(M.values[:, :, 0])
    return _kernels.first_passage(np.ascontiguousarray(absm), levels, M.grid.points)


def levy_driver(rate: float, jump_values, jump_probs, drift: float, diffusion: float,
                grid: TimeGrid, paths, stream: Stream, jump_bound: float | None = None,
                levels=(1, 2, 3)):
    """Scalar drift + diffusion + compound-Poisson driver and its ``M + A`` split.

    Jumps occurring in ``(t_k, t_{k+1}]`` are applied at ``t_{k+1}``, the first grid
    point not before the jump time.
    """
    if not (rate >= 0 and np.isfinite(rate)):
        raise ModelError(f"invalid jump rate {rate!r}")
    jv = np.asarray(jump_values, dtype=np.float64)
    jp = np.asarray(jump_probs, dtype=np.float64)
    if jv.shape != jp.shape or jv.ndim != 1 or (jp < 0).any() or not np.isclose(jp.sum(), 1.0):
        raise ModelError("jump law must be matching 1-d value/probability arrays")
    if jump_bound is not None and np.abs(jv).max(initial=0.0) > jump_bound:
        raise ModelError("jump law exceeds its declared bound")
    ids = _as_ids(paths)
    P, n = len(ids), grid.steps
    t = grid.points

    W = brownian(grid, 1, ids, stream.child("levy-w"))
    lam = rate * grid.dt
    counts = np.zeros((P, n), dtype=np.int64)
    jumps_small = np.zeros((P, n))
    jumps_large = np.zeros((P, n))
    if lam > 0:
        cap = int(stats.poisson.isf(1e-16, lam)) + 1
        u = stream.child("levy-count").uniforms(ids, n)
        counts = np.minimum(stats.poisson.ppf(u, lam).astype(np.int64), cap)
        us = stream.child("levy-size").uniforms(ids, n * cap).reshape(P, n, cap)
        cdf = np.cumsum(jp)
        cdf[-1] = 1.0
        sizes = jv[np.searchsorted(cdf, us, side="right").clip(max=len(jv) - 1)]
        live = np.arange(cap)[None, None, :] < counts[:, :, None]
        small = np.abs(sizes) <= 1.0
        jumps_small = np.where(live & small, sizes, 0.0).sum(axis=2)
        jumps_large = np.where(live & ~small, sizes, 0.0).sum(axis=2)

    m_small = float(np.sum(np.where(np.abs(jv) <= 1.0, jv * jp, 0.0)))
    comp = rate * m_small * t

    def cum(x):
        out = np.zeros((P, n + 1))
        np.cumsum(x, axis=1, out=out[:, 1:])
        return out

    M = diffusion * W.values[:, :, 0] + cum(jumps_small) - comp[None, :]
    A = drift * t[None, :] + comp[None, :] + cum(jumps_large)
    V = M + A
    prov = {"seed": stream.seed, "streams": [stream.tag], "kind": "levy",
            "rate": rate, "drift": drift, "diffusion": diffusion}
    Me = PathEnsemble(M, grid, ids, {**prov, "part": "M"})
    Ae = PathEnsemble(A, grid, ids, {**prov, "part": "A"})
    Ve = PathEnsemble(V, grid, ids, prov)
    levels = tuple(sorted(levels))
    decomp = SemimartingaleDecomp(Me, Ae, localizing_times(Me, levels), levels, counts.sum(axis=1))
    return Ve, decomp
