"""Monte Carlo check of the ``cov(mu_i, y_i) / sigma^2 ~ u_i`` substitution.

X is held fixed and fresh responses ``Y* = mean + sigma * eps`` are drawn.
Replicate ``r`` uses its own generator seeded with ``seed + r``, so results do
not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .diagnostics import full_model_info
from .errors import ConvergenceError, InputError
from .ingest import Dataset
from .lars import Mode, lars_path

Generator = Literal["fixed-beta", "fitted-beta"]

RNG_ALGORITHM = "numpy.random.PCG64/standard_normal"
MAX_EXCLUDED_FRACTION = 0.05


@dataclass(frozen=True, eq=False)
class CovSimulation:
    estimates: np.ndarray
    standard_errors: np.ndarray
    reference_leverage: np.ndarray
    mean_subset_leverage: np.ndarray
    step_count: int
    replicates: int
    replicates_used: int
    excluded: int
    seed: int
    noise_sd: float
    generator: str
    rng_algorithm: str = RNG_ALGORITHM

    def within(self, target, k: float = 3.0) -> np.ndarray:
        """Cases whose estimate is within ``k`` standard errors of ``target``."""
        return np.abs(self.estimates - np.asarray(target)) <= k * self.standard_errors


def mean_function(dataset: Dataset, generator: Generator, beta=None, intercept: float = 0.0):
    if generator == "fitted-beta":
        return full_model_info(dataset).y_hat
    if generator == "fixed-beta":
        if beta is None:
            raise InputError("fixed-beta generator needs a coefficient vector")
        beta = np.asarray(beta, dtype=float)
        if beta.shape != (dataset.m,):
            raise InputError(f"beta has length {beta.size}, dataset has {dataset.m} predictors")
        return intercept + dataset.X @ beta
    raise InputError(f"unknown generator {generator!r}")


def simulate_cov(
    dataset: Dataset,
    generator: Generator,
    noise_sd: float,
    step_count: int,
    replicates: int,
    seed: int,
    beta=None,
    mode: Mode = "plain",
) -> CovSimulation:
    if replicates < 100:
        raise InputError(f"need at least 100 replicates, got {replicates}")
    if not noise_sd > 0:
        raise InputError("noise_sd must be positive")
    if step_count < 0:
        raise InputError("step_count must be nonnegative")
    mean = mean_function(dataset, generator, beta)
    n = dataset.n

    mus = np.empty((replicates, n))
    eps = np.empty((replicates, n))
    leverages = np.empty((replicates, n))
    kept = np.zeros(replicates, dtype=bool)
    for r in range(replicates):
        rng = np.random.default_rng(seed + r)
        e = rng.standard_normal(n)
        ystar = Dataset(dataset.predictor_names, dataset.X, mean + noise_sd * e)
        path = lars_path(ystar, mode, max_steps=step_count)
        if len(path.steps) - 1 < step_count:
            continue
        step = path.steps[step_count]
        mus[r], eps[r], leverages[r] = step.mu_hat, e, step.subset_leverage
        kept[r] = True

    excluded = int(replicates - kept.sum())
    if excluded > MAX_EXCLUDED_FRACTION * replicates:
        raise ConvergenceError(
            f"{excluded} of {replicates} replicates ended before step {step_count}"
        )
    mus, eps, leverages = mus[kept], eps[kept], leverages[kept]
    R = mus.shape[0]
    ys = mean + noise_sd * eps
    products = (mus - mus.mean(axis=0)) * (ys - ys.mean(axis=0))
    estimates = products.sum(axis=0) / (R - 1) / noise_sd**2
    se = products.std(axis=0, ddof=1) / np.sqrt(R) / noise_sd**2

    ref = lars_path(dataset, mode, max_steps=step_count)
    if len(ref.steps) - 1 < step_count:
        raise InputError(f"path on the observed response stops before step {step_count}")
    return CovSimulation(
        estimates=estimates,
        standard_errors=se,
        reference_leverage=ref.steps[step_count].subset_leverage,
        mean_subset_leverage=leverages.mean(axis=0),
        step_count=step_count,
        replicates=replicates,
        replicates_used=R,
        excluded=excluded,
        seed=seed,
        noise_sd=float(noise_sd),
        generator=generator,
    )
