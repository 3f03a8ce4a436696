"""Least angle regression path (plain and lasso-modified) with Cp per step.

Predictors are centered and scaled to unit length; the response is centered,
so the intercept never enters the path. Each step moves the fit along the
equiangular direction of the active set until an inactive predictor catches
up in absolute correlation (or, in lasso mode, until an active coefficient
hits zero).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg

from .diagnostics import FullModelInfo, cp_total, full_model_info
from .errors import InputError, RankError
from .ingest import Dataset, StandardizedView, standardize
from .numerics import numerical_rank, projection_diagonals

log = logging.getLogger(__name__)

Mode = Literal["plain", "lasso"]

TIE_TOL = 1e-10
GRAM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LarsStep:
    step_index: int
    entered: str | None
    dropped: str | None
    active_set: tuple[str, ...]
    coefficients_std: np.ndarray
    coefficients_orig: np.ndarray
    intercept: float
    mu_hat: np.ndarray
    max_abs_corr: float
    step_length: float
    subset_leverage: np.ndarray
    cp: float
    df_surrogate: float
    # correlations of every standardized predictor with the residual after the step
    correlations: np.ndarray


@dataclass(frozen=True, eq=False)
class LarsPath:
    steps: list[LarsStep]
    mode: Mode
    standardization: StandardizedView
    full_model: FullModelInfo | None
    warnings: tuple[str, ...] = ()

    @property
    def predictor_names(self) -> tuple[str, ...]:
        return self.standardization.base.predictor_names

    @property
    def entry_order(self) -> list[str]:
        return [s.entered for s in self.steps if s.entered is not None]

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True, eq=False)
class SelectionResult:
    selected: tuple[str, ...]
    coefficients: np.ndarray
    intercept: float
    criterion_value: float
    chosen_step: int


def unstandardize(step: LarsStep, view: StandardizedView) -> tuple[np.ndarray, float]:
    """Original-scale slopes and intercept for a step's standardized coefficients."""
    coef = np.asarray(step.coefficients_std) / view.column_scales
    intercept = view.response_mean - float(view.column_means @ coef)
    return coef, intercept


def _make_step(index, entered, dropped, active, beta, view, Xs, c, gamma, full, names):
    coef = beta / view.column_scales
    intercept = view.response_mean - float(view.column_means @ coef)
    mu = view.response_mean + Xs @ beta
    n = Xs.shape[0]
    if active:
        u = projection_diagonals(np.column_stack([np.ones(n), Xs[:, active]]))
    else:
        u = np.full(n, 1.0 / n)
    df = float(len(active) + 1)
    cp = cp_total(mu, df, full) if full is not None and full.sigma_hat_sq > 0 else float("nan")
    return LarsStep(
        step_index=index,
        entered=None if entered is None else names[entered],
        dropped=None if dropped is None else names[dropped],
        active_set=tuple(names[j] for j in active),
        coefficients_std=beta.copy(),
        coefficients_orig=coef,
        intercept=intercept,
        mu_hat=mu,
        max_abs_corr=float(np.max(np.abs(c))) if c.size else 0.0,
        step_length=float(gamma),
        subset_leverage=u,
        cp=cp,
        df_surrogate=df,
        correlations=c.copy(),
    )


def lars_path(dataset: Dataset, mode: Mode = "plain", max_steps: int | None = None) -> LarsPath:
    """Compute the LARS (or lasso-LARS) path over ``dataset``.

    Step 0 is the intercept-only fit. The path stops when every usable
    predictor is active, the centered design's rank is exhausted, or
    ``max_steps`` moves have been made (default ``min(m, n - 2)``; lasso mode
    allows eight times that, since drops add steps).

    A candidate whose admission would make the active Gram matrix singular
    (relative singular value below 1e-10) is skipped for the rest of the path
    and a warning naming it and its collinear partners is recorded.
    """
    if mode not in ("plain", "lasso"):
        raise InputError(f"unknown mode {mode!r}")
    n, m = dataset.n, dataset.m
    if n < 3:
        raise InputError(f"LARS needs at least 3 cases, got {n}")
    if m < 1:
        raise InputError("dataset has no predictors")
    if np.ptp(dataset.y) == 0.0:
        raise InputError("response is constant")
    view = standardize(dataset, "unit-norm")
    Xs = view.X
    yc = view.y_centered
    names = dataset.predictor_names
    if max_steps is None:
        max_steps = min(m, n - 2) * (8 if mode == "lasso" else 1)
    if max_steps < 0:
        raise InputError("max_steps must be nonnegative")

    try:
        full = full_model_info(dataset)
    except (InputError, RankError) as exc:
        log.info("no full-model Cp reference: %s", exc)
        full = None

    warnings: list[str] = []
    beta = np.zeros(m)
    active: list[int] = []
    skipped: set[int] = set()
    c = Xs.T @ yc
    steps = [_make_step(0, None, None, active, beta, view, Xs, c, 0.0, full, names)]

    def admissible(j: int) -> bool:
        sv = scipy.linalg.svd(Xs[:, active + [j]], compute_uv=False)
        # Gram matrix condition: eigenvalues of G are squared singular values
        if sv[-1] ** 2 > GRAM_TOL * sv[0] ** 2:
            return True
        partners = [names[k] for k in active if abs(Xs[:, k] @ Xs[:, j]) > 1e-6] or [
            names[k] for k in active
        ]
        msg = f"skipped {names[j]}: collinear with active set ({', '.join(partners)})"
        warnings.append(msg)
        log.warning(msg)
        skipped.add(j)
        return False

    # first entrant(s): largest absolute correlation, ties by lowest index
    C0 = np.max(np.abs(c))
    entrants = [j for j in range(m) if abs(c[j]) >= C0 - TIE_TOL * C0]
    just_dropped: int | None = None
    rank_limit = min(n - 1, numerical_rank(Xs))

    while len(steps) - 1 < max_steps:
        entered = None
        for j in entrants:
            if j not in active and admissible(j):
                active.append(j)
                if entered is None:
                    entered = j
        entrants = []
        if not active:
            break

        s = np.sign(c[active])
        s[s == 0] = 1.0
        XA = Xs[:, active] * s
        G = XA.T @ XA
        try:
            cf = scipy.linalg.cho_factor(G)
            Ginv1 = scipy.linalg.cho_solve(cf, np.ones(len(active)))
        except np.linalg.LinAlgError:
            raise RankError(
                f"active Gram matrix became singular at step {len(steps)} "
                f"(active: {[names[k] for k in active]})"
            ) from None
        AA = 1.0 / np.sqrt(np.sum(Ginv1))
        w = AA * Ginv1
        u = XA @ w
        a = Xs.T @ u
        C = float(np.max(np.abs(c[active])))

        candidates = [j for j in range(m) if j not in active and j not in skipped]
        gamma_j = {}
        for j in candidates:
            opts = []
            for sgn, num, den in ((1.0, C - c[j], AA - a[j]), (-1.0, C + c[j], AA + a[j])):
                # a just-dropped predictor sits on the tie; its zero-length re-entry is not a move
                if j == just_dropped and sgn == np.sign(c[j]):
                    continue
                if den > 1e-14 * AA:
                    g = num / den
                    if g > 1e-12 * C / AA:
                        opts.append(g)
            if opts:
                gamma_j[j] = min(opts)

        last = len(active) >= rank_limit or not gamma_j
        order = sorted(gamma_j, key=lambda j: (gamma_j[j], j))
        gamma = C / AA
        nxt = None
        if not last:
            for j in order:
                if gamma_j[j] >= C / AA:
                    break
                if admissible(j):
                    nxt = j
                    gamma = gamma_j[j]
                    break
            if nxt is None:
                last = True

        dropped = None
        direction = s * w
        if mode == "lasso":
            with np.errstate(divide="ignore"):
                cross = -beta[active] / direction
            cross[~np.isfinite(cross)] = np.inf
            cross[cross <= 1e-12 * gamma] = np.inf
            k = int(np.argmin(cross))
            if cross[k] < gamma:
                gamma = float(cross[k])
                dropped = active[k]
                nxt = None
                last = False

        beta[active] += gamma * direction
        if dropped is not None:
            beta[dropped] = 0.0
            active.remove(dropped)
        just_dropped = dropped

        c = Xs.T @ (yc - Xs @ beta)
        steps.append(
            _make_step(len(steps), entered, dropped, active, beta, view, Xs, c, gamma, full, names)
        )
        if last:
            break
        if nxt is not None:
            C_new = C - gamma * AA
            entrants = [nxt] + [
                j
                for j in order
                if j != nxt and j not in skipped and abs(c[j]) >= C_new - TIE_TOL * C
            ]
            entrants = sorted(set(entrants))

    return LarsPath(steps, mode, view, full, tuple(warnings))


def select_by_cp(path: LarsPath, reference: FullModelInfo | None = None) -> SelectionResult:
    """Step with the smallest Cp; exact ties go to the smaller active set.

    ``reference`` overrides the path's own full model as the source of the
    residual variance (used when the path's design is rank deficient).
    """
    if not path.steps:
        raise InputError("empty path")
    info = reference if reference is not None else path.full_model
    if info is None:
        raise InputError("path has no full-model reference; Cp needs n - m - 1 >= 1 and full rank")
    if reference is None:
        cps = [s.cp for s in path.steps]
    else:
        cps = [cp_total(s.mu_hat, s.df_surrogate, reference) for s in path.steps]
    k = min(range(len(path.steps)), key=lambda i: (cps[i], len(path.steps[i].active_set), i))
    best = path.steps[k]
    names = path.predictor_names
    idx = [names.index(a) for a in best.active_set]
    return SelectionResult(
        selected=best.active_set,
        coefficients=best.coefficients_orig[idx],
        intercept=best.intercept,
        criterion_value=cps[k],
        chosen_step=best.step_index,
    )
