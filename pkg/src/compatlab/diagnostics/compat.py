"""Compatibility test on ensembles: one L2 gap per (alpha, h), Bonferroni across the grid."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..paths import PathEnsemble, Stream
from .features import features_rc, features_temporal
from .gap import TestConfig, bonferroni, l2_gap
from .report import GapReport


class ProvenanceError(ValueError):
    """Ensembles that do not come from the same paths, grid and seed."""


def check_provenance(*ens: PathEnsemble) -> dict:
    first = ens[0]
    for e in ens[1:]:
        if e.grid != first.grid:
            raise ProvenanceError(f"grid mismatch: {e.grid} vs {first.grid}")
        if not np.array_equal(e.path_ids, first.path_ids):
            raise ProvenanceError("ensembles cover different paths")
        if e.seed != first.seed:
            raise ProvenanceError(f"seed mismatch: {e.seed!r} vs {first.seed!r}")
    out = {"seed": first.seed, "grid": first.grid.as_dict(), "paths": first.n_paths}
    hashes = sorted({e.provenance["spec_hash"] for e in ens if "spec_hash" in e.provenance})
    if hashes:
        out["spec_hash"] = hashes
    return out


@dataclass(frozen=True)
class Alpha:
    """One index of the structure: features of X and of Y allowed at this alpha."""

    label: str
    t: float
    x_features: Callable[[PathEnsemble], np.ndarray]
    y_features: Callable[[PathEnsemble], np.ndarray]


@dataclass(frozen=True)
class HFunc:
    h_id: str
    fn: Callable[[PathEnsemble, float], np.ndarray]   # (Y, t) -> (P,)


def temporal_structure(times, m: int = 1, degree: int = 2) -> list:
    """``F_t^X = sigma(X(s), s <= t)``, sampled at ``m`` grid times; same on the Y side."""
    return [Alpha(f"t={t:g}", float(t),
                  lambda e, t=t: features_temporal(e, t, m, degree),
                  lambda e, t=t: features_temporal(e, t, m, degree)) for t in times]


def rc_structure(times, eps: float, r: float, degree: int = 2, basis=None) -> list:
    """Backward windows on X, forward windows on Y, anchored at each ``t``."""
    return [Alpha(f"t={t:g}", float(t),
                  lambda e, t=t: features_rc(e, t, eps, r, "x", basis=basis, degree=degree),
                  lambda e, t=t: features_rc(e, t, eps, r, "y", basis=basis, degree=degree))
            for t in times]


def _increment(Y: PathEnsemble, a: float, b: float, dim: int):
    return Y.at(b)[:, dim] - Y.at(a)[:, dim]


def default_h_set(Y: PathEnsemble, t: float) -> list:
    """Sign and clipped value of the increments of each Y coordinate from ``t`` to the
    midpoint of ``[t, T]`` and to ``T``.  At ``t = T`` the terminal value itself is used."""
    T = Y.grid.horizon
    ends = [u for u in ((t + T) / 2, T) if Y.grid.index(u) > Y.grid.index(t)]
    spans = [(t, u) for u in dict.fromkeys(ends)] or [(0.0, T)]
    out = []
    for j in range(Y.dims):
        for a, b in spans:
            tag = f"y{j}[{a:g},{b:g}]"
            out.append(HFunc(f"sign {tag}", lambda Y, _t, a=a, b=b, j=j: np.sign(_increment(Y, a, b, j))))
            out.append(HFunc(f"clip {tag}",
                             lambda Y, _t, a=a, b=b, j=j: np.clip(_increment(Y, a, b, j), -1.0, 1.0)))
    return out


def _bootstrap_stream(cfg: TestConfig, ens: PathEnsemble, kind: str) -> Stream:
    seed = cfg.seed if cfg.seed is not None else (ens.seed if ens.seed is not None else 0)
    return Stream(int(seed), f"bootstrap/{kind}")


def compat_test(X: PathEnsemble, Y: PathEnsemble, structure, h_set=None,
                cfg: TestConfig | None = None) -> GapReport:
    """Regress each ``h(Y)`` on Y-features and on (Y, X)-features; reject where X helps.

    ``h_set`` is a list of :class:`HFunc` used at every alpha, or ``None`` for the
    per-alpha :func:`default_h_set`.
    """
    cfg = cfg or TestConfig()
    prov = check_provenance(X, Y)
    plan = [(a, h_set if h_set is not None else default_h_set(Y, a.t)) for a in structure]
    n_tests = sum(len(hs) for _, hs in plan)
    if n_tests == 0:
        raise ValueError("no (alpha, h) pairs to test")
    c = bonferroni(cfg.multiplier, n_tests)
    root = _bootstrap_stream(cfg, X, "compat")
    entries = []
    for a, hs in plan:
        fy = a.y_features(Y)
        fxy = np.hstack([fy, a.x_features(X)])
        for h in hs:
            entries.append(l2_gap(h.fn(Y, a.t), fxy, fy, cfg, root.child(f"{a.label}|{h.h_id}"),
                                  a.label, h.h_id, c))
    return GapReport(entries, prov, {**cfg.as_dict(), "bonferroni_multiplier": c, "n_tests": n_tests})

