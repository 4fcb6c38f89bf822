"""Strong-solution copy test, the sign-flip (Tanaka) construction and uniqueness ladders."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..paths import PathEnsemble, Stream, brownian


@dataclass
class CopyReport:
    statistic: float          # E sup_t |X - X'|
    se: float
    disagree_fraction: float  # share of paths where the copies differ at all
    conditional: float        # E[sup |X - X'| | copies differ]; nan if they never do
    n_paths: int

    @property
    def strong(self) -> bool:
        return self.statistic == 0.0

    def as_dict(self) -> dict:
        return dict(vars(self), strong=self.strong)


def copy_distances(X1: PathEnsemble, X2: PathEnsemble) -> np.ndarray:
    """Per-path ``sup_k max_j |X1 - X2|``."""
    return np.abs(X1.values - X2.values).max(axis=(1, 2))


def strong_copy_test(solver, driver: PathEnsemble, stream_a: Stream, stream_b: Stream) -> CopyReport:
    """Run ``solver(driver, stream)`` with two independent auxiliary streams on the same driver."""
    d = copy_distances(solver(driver, stream_a), solver(driver, stream_b))
    differ = d > 0
    P = len(d)
    return CopyReport(float(d.mean()), float(d.std(ddof=1) / np.sqrt(P)) if P > 1 else 0.0,
                      float(differ.mean()), float(d[differ].mean()) if differ.any() else float("nan"), P)


def tanaka_driver(grid, paths, stream: Stream) -> tuple:
    """``B`` and ``Y = sum sgn(B_k) dB_k`` (left points, ``sgn(0) = 1``); returns ``(Y, B)``."""
    B = brownian(grid, 1, paths, stream.child("tanaka-b"))
    b = B.values[:, :, 0]
    sgn = np.where(b[:, :-1] >= 0, 1.0, -1.0)
    y = np.zeros_like(b)
    np.cumsum(sgn * np.diff(b, axis=1), axis=1, out=y[:, 1:])
    return B.with_values(y, kind="tanaka-driver"), B


def reflected(Y: PathEnsemble) -> np.ndarray:
    """Skorokhod reflection ``Y - min(0, min_{s<=t} Y)``: the ``|X|`` every solution shares."""
    y = Y.values
    return y - np.minimum(np.minimum.accumulate(y, axis=1), 0.0)


def tanaka_solver(driver: PathEnsemble, stream: Stream) -> PathEnsemble:
    """``X = coin * reflected(Y)`` with one fair sign per path from the auxiliary stream."""
    coin = np.where(stream.child("coin").uniforms(driver.path_ids, 1)[:, 0] < 0.5, -1.0, 1.0)
    return driver.with_values(coin[:, None, None] * reflected(driver), solver="tanaka")


def sup_abs_oracle(grid, paths, stream: Stream) -> tuple:
    """Monte Carlo ``E sup_t |B(t)|`` on the same grid from an independent stream: (mean, se)."""
    s = np.abs(brownian(grid, 1, paths, stream.child("sup-oracle")).values).max(axis=(1, 2))
    return float(s.mean()), float(s.std(ddof=1) / np.sqrt(len(s)))


def fit_log_slope(ns, errors) -> float:
    """Least-squares slope of ``log(error)`` on ``log(n)``; ``nan`` if any error is not positive."""
    ns = np.asarray(ns, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if len(ns) < 2 or (errors <= 0).any():
        return float("nan")
    return float(np.polyfit(np.log(ns), np.log(errors), 1)[0])


@dataclass
class LadderTable:
    ns: list
    errors: list
    ses: list
    slope: float        # fitted d log(error) / d log(n)

    @property
    def decay_rate(self) -> float:
        return -self.slope

    def rows(self):
        return [{"n": n, "error": e, "se": s} for n, e, s in zip(self.ns, self.errors, self.ses)]


def uniqueness_probe(solver_a, solver_b, driver: PathEnsemble, ladder) -> LadderTable:
    """Per ``n``: mean sup-distance of ``solver_a(driver, n)`` and ``solver_b(driver, n)``,
    both compared on the ``n``-step grid.  Each ``n`` must divide the driver's steps."""
    ladder = [int(n) for n in ladder]
    errs, ses = [], []
    for n in ladder:
        xa = _on_grid(solver_a(driver, n), n)
        xb = _on_grid(solver_b(driver, n), n)
        d = copy_distances(xa, xb)
        errs.append(float(d.mean()))
        ses.append(float(d.std(ddof=1) / np.sqrt(len(d))) if len(d) > 1 else 0.0)
    return LadderTable(ladder, errs, ses, fit_log_slope(ladder, errs))


def _on_grid(X: PathEnsemble, n: int) -> PathEnsemble:
    return X if X.grid.steps == n else X.coarsen(n)
