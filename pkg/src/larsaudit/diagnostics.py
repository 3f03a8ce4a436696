"""Cp and its allocation to individual cases.

The residual variance always comes from the full model on (1, X). For a path
step with fitted values ``mu`` and subset leverages ``u`` (diagonal of the
projection on the intercept plus active columns), case ``i`` contributes

    C_pi = (yhat_i - mu_i)^2 / s2 + u_i - (h_i - u_i)

where ``yhat`` and ``h`` belong to the full projection. The covariance term
cov(mu_i, y_i) / sigma^2 is replaced by ``u_i``; the Monte Carlo check of that
substitution lives in :mod:`larsaudit.covsim`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, RankError
from .ingest import Dataset
from .numerics import least_squares, numerical_rank, projection_diagonals


@dataclass(frozen=True, eq=False)
class FullModelInfo:
    y: np.ndarray
    y_hat: np.ndarray
    hat_diagonals: np.ndarray
    sigma_hat_sq: float
    m: int
    n: int

    @property
    def residual_df(self) -> int:
        return self.n - self.m - 1


@dataclass(frozen=True)
class CaseCpRecord:
    case_index: int
    fit_term: float
    cov_term: float
    leverage_deficit: float
    c_pi: float


def full_model_info(dataset: Dataset) -> FullModelInfo:
    n, m = dataset.n, dataset.m
    if n - m - 1 < 1:
        raise InputError(f"need n - m - 1 >= 1 residual df, have n={n}, m={m}")
    design = np.column_stack([np.ones(n), dataset.X])
    if numerical_rank(design) < m + 1:
        raise RankError("full model design (1, X) is rank deficient")
    fit = least_squares(design, dataset.y)
    h = projection_diagonals(design)
    rss = float(fit.residuals @ fit.residuals)
    spread = float(np.sum((dataset.y - dataset.y.mean()) ** 2))
    if rss <= 1e-24 * spread:
        rss = 0.0  # response lies in the column space up to rounding
    s2 = rss / (n - m - 1)
    return FullModelInfo(dataset.y, fit.fitted, h, s2, m, n)


def cp_total(mu_hat, df_surrogate: float, info: FullModelInfo) -> float:
    """``||Y - mu||^2 / s2 - n + 2 df``."""
    if not info.sigma_hat_sq > 0:
        raise InputError("sigma_hat_sq is zero; Cp is undefined")
    mu = np.asarray(mu_hat, dtype=float)
    if mu.shape != info.y.shape:
        raise InputError(f"mu_hat has length {mu.size}, expected {info.n}")
    r = info.y - mu
    return float(r @ r) / info.sigma_hat_sq - info.n + 2.0 * df_surrogate


def case_cp_arrays(mu_hat, subset_leverage, info: FullModelInfo):
    """Vectorised ``(fit_term, cov_term, leverage_deficit, c_pi)``."""
    mu = np.asarray(mu_hat, dtype=float)
    u = np.asarray(subset_leverage, dtype=float)
    if mu.shape != (info.n,) or u.shape != (info.n,):
        raise InputError(
            f"step has {mu.size} fitted values / {u.size} leverages, dataset has {info.n} cases"
        )
    if not info.sigma_hat_sq > 0:
        raise InputError("sigma_hat_sq is zero; per-case Cp is undefined")
    fit_term = (info.y_hat - mu) ** 2 / info.sigma_hat_sq
    deficit = info.hat_diagonals - u
    return fit_term, u, deficit, fit_term + u - deficit


def case_cp(step, info: FullModelInfo) -> list[CaseCpRecord]:
    """Per-case Cp records for a path step (anything with ``mu_hat`` and ``subset_leverage``)."""
    fit, cov, deficit, cpi = case_cp_arrays(step.mu_hat, step.subset_leverage, info)
    return [
        CaseCpRecord(i, float(fit[i]), float(cov[i]), float(deficit[i]), float(cpi[i]))
        for i in range(info.n)
    ]
