"""L2 projection-gap estimator: ``inf_f E(h - f(Y))^2 - inf_f E(h - f(X, Y))^2`` by ridge regression."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import norm

from ..paths import Stream

MIN_EVAL_ROWS = 50


@dataclass(frozen=True)
class TestConfig:
    __test__ = False  # not a pytest class

    ridge: float = 1e-6
    degree: int = 2
    split: float = 0.5
    bootstrap: int = 200
    multiplier: float = 3.0
    seed: int | None = None   # bootstrap seed; None uses the ensemble seed

    def __post_init__(self):
        if not self.ridge > 0:
            raise ValueError("ridge penalty must be positive")
        if not 0 < self.split < 1:
            raise ValueError("split must lie in (0, 1)")
        if self.bootstrap < 100:
            raise ValueError("need at least 100 bootstrap replicates")
        if self.degree < 1 or self.multiplier <= 0:
            raise ValueError("degree >= 1 and multiplier > 0 required")

    def as_dict(self) -> dict:
        return asdict(self)


def bonferroni(multiplier: float, n_tests: int) -> float:
    """One-sided z level keeping the family-wise size of ``n_tests`` at that of ``multiplier``."""
    if n_tests <= 1:
        return float(multiplier)
    return float(norm.isf(norm.sf(multiplier) / n_tests))


@dataclass
class GapEntry:
    alpha: str
    h_id: str
    mse_y: float
    mse_xy: float
    gap: float
    se: float
    ci_lo: float
    ci_hi: float
    decision: str
    multiplier: float
    degenerate: bool = False

    @property
    def rejected(self) -> bool:
        return self.decision == "reject"


class RidgeFit:
    """Ridge on standardised columns with an unpenalised intercept.

    Constant columns are dropped; with none left the fit is the training mean and
    ``degenerate`` is set.
    """

    def __init__(self, F: np.ndarray, y: np.ndarray, lam: float):
        F = np.asarray(F, dtype=np.float64).reshape(len(y), -1)
        self.mean_y = float(np.mean(y))
        mu = F.mean(axis=0)
        sd = F.std(axis=0)
        self.keep = sd > 1e-12 * np.maximum(1.0, np.abs(mu))
        self.degenerate = not self.keep.any()
        if self.degenerate:
            return
        self.mu, self.sd = mu[self.keep], sd[self.keep]
        Z = (F[:, self.keep] - self.mu) / self.sd
        n, p = Z.shape
        A = Z.T @ Z + lam * n * np.eye(p)
        self.beta = np.linalg.solve(A, Z.T @ (y - self.mean_y))

    def predict(self, F: np.ndarray) -> np.ndarray:
        F = np.asarray(F, dtype=np.float64).reshape(F.shape[0], -1)
        if self.degenerate:
            return np.full(F.shape[0], self.mean_y)
        return self.mean_y + ((F[:, self.keep] - self.mu) / self.sd) @ self.beta


def split_rows(n: int, split: float) -> int:
    n_train = int(np.floor(split * n))
    if n - n_train < MIN_EVAL_ROWS:
        raise ValueError(f"split leaves {n - n_train} eval rows; need >= {MIN_EVAL_ROWS}")
    return n_train


def bootstrap_se(d: np.ndarray, B: int, stream: Stream) -> float:
    """SE of ``mean(d)`` from ``B`` resamples of the rows, drawn from ``stream``."""
    n = len(d)
    u = stream.uniforms(B, n)
    idx = np.minimum((u * n).astype(np.int64), n - 1)
    means = d[idx].mean(axis=1)
    return float(np.std(means, ddof=1))


def _fit_mse(F, h, n_train, lam):
    fit = RidgeFit(F[:n_train], h[:n_train], lam)
    res = h[n_train:] - fit.predict(F[n_train:])
    return res ** 2, fit.degenerate


def l2_gap(h, feat_xy, feat_y, cfg: TestConfig, stream: Stream, alpha="", h_id="",
           multiplier: float | None = None) -> GapEntry:
    """One (alpha, h) entry; ``feat_xy`` should contain ``feat_y``'s columns so the fits nest.

    Rows are split in order (paths are exchangeable): the first ``split`` fraction trains
    both fits, the rest gives the MSEs.  Decision: reject iff ``gap > multiplier * se``.
    """
    h = np.asarray(h, dtype=np.float64).ravel()
    n = len(h)
    fy = np.asarray(feat_y, dtype=np.float64).reshape(n, -1)
    fxy = np.asarray(feat_xy, dtype=np.float64).reshape(n, -1)
    n_train = split_rows(n, cfg.split)
    ry2, deg_y = _fit_mse(fy, h, n_train, cfg.ridge)
    rxy2, deg_xy = _fit_mse(fxy, h, n_train, cfg.ridge)
    d = ry2 - rxy2
    gap = float(d.mean())
    se = bootstrap_se(d, cfg.bootstrap, stream)
    c = cfg.multiplier if multiplier is None else multiplier
    return GapEntry(str(alpha), str(h_id), float(ry2.mean()), float(rxy2.mean()), gap, se,
                    gap - c * se, gap + c * se, "reject" if gap > c * se else "pass", c,
                    deg_y or deg_xy)
