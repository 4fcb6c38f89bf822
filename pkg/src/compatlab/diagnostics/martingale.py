"""Martingale condition on ensembles: do (X, Y) up to ``s`` predict ``M(t) - M(s)``?"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..paths import PathEnsemble
from .compat import _bootstrap_stream, check_provenance
from .features import features_temporal
from .gap import GapEntry, TestConfig, bonferroni, bootstrap_se, split_rows, RidgeFit
from .report import GapReport

DEFAULT_LEVEL = 3


def stopped(M: PathEnsemble, tau) -> PathEnsemble:
    """``M`` frozen from the grid index of ``tau`` on (``inf`` leaves the path untouched)."""
    tau = np.asarray(tau, dtype=np.float64)
    k = M.grid.ceil_index(tau)
    v = M.values.copy()
    steps = np.arange(v.shape[1])
    frozen = steps[None, :] > k[:, None]
    v[frozen] = np.repeat(v[np.arange(len(k)), k][:, None, :], v.shape[1], axis=1)[frozen]
    return M.with_values(v, stopped=True)


@dataclass
class MartingaleReport(GapReport):
    slopes: dict = field(default_factory=dict)   # regressor -> (coef, se)

    def as_dict(self) -> dict:
        return {**super().as_dict(), "slopes": {k: list(v) for k, v in self.slopes.items()}}


def ols(D: np.ndarray, Z: np.ndarray):
    """Coefficients and classical standard errors of ``D`` on ``[1, Z]``."""
    A = np.hstack([np.ones((len(D), 1)), Z])
    coef, *_ = np.linalg.lstsq(A, D, rcond=None)
    res = D - A @ coef
    dof = max(len(D) - A.shape[1], 1)
    cov = (res @ res / dof) * np.linalg.pinv(A.T @ A)
    return coef, np.sqrt(np.diag(cov))


def martingale_test(M: PathEnsemble, X: PathEnsemble, Y: PathEnsemble, s: float, t: float,
                    cfg: TestConfig | None = None, tau=None, m: int = 1) -> MartingaleReport:
    """Compare ``E[(dM)^2]`` (the zero predictor a martingale allows) with the eval MSE of a
    ridge fit of ``dM = M(t) - M(s)`` on X and Y features at ``s``; reject iff the fit
    explains more than ``multiplier * SE``.  ``tau`` (per path) stops ``M`` first.

    Slopes: OLS of each ``dM`` coordinate on ``X(s)`` and ``Y(s)`` with standard errors.
    """
    if not 0 <= s < t <= M.grid.horizon:
        raise ValueError("need 0 <= s < t <= horizon")
    cfg = cfg or TestConfig()
    prov = check_provenance(M, X, Y)
    if tau is not None:
        M = stopped(M, tau)
        prov["localized"] = True
    F = np.hstack([features_temporal(X, s, m, cfg.degree), features_temporal(Y, s, m, cfg.degree)])
    dM = M.at(t) - M.at(s)
    n_train = split_rows(len(dM), cfg.split)
    c = bonferroni(cfg.multiplier, M.dims)
    root = _bootstrap_stream(cfg, M, "martingale")
    label = f"[{s:g},{t:g}]"
    entries, slopes = [], {}
    Z = np.hstack([X.at(s), Y.at(s)])
    names = [f"x{j}(s)" for j in range(X.dims)] + [f"y{j}(s)" for j in range(Y.dims)]
    for j in range(M.dims):
        D = dM[:, j]
        fit = RidgeFit(F[:n_train], D[:n_train], cfg.ridge)
        r0 = D[n_train:] ** 2
        r1 = (D[n_train:] - fit.predict(F[n_train:])) ** 2
        d = r0 - r1
        gap = float(d.mean())
        se = bootstrap_se(d, cfg.bootstrap, root.child(f"dM{j}"))
        entries.append(GapEntry(label, f"dM{j}", float(r0.mean()), float(r1.mean()), gap, se,
                                gap - c * se, gap + c * se, "reject" if gap > c * se else "pass",
                                c, fit.degenerate))
        coef, ses = ols(D, Z)
        slopes[f"dM{j}:const"] = (float(coef[0]), float(ses[0]))
        for name, b, e in zip(names, coef[1:], ses[1:]):
            slopes[f"dM{j}:{name}"] = (float(b), float(e))
    return MartingaleReport(entries, prov, {**cfg.as_dict(), "bonferroni_multiplier": c},
                            "martingale", slopes)
