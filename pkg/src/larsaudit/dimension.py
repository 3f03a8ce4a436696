"""Sliced inverse regression and the sequential chi-squared test for d."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InputError
from .ingest import Dataset
from .numerics import symmetric_eig, whiten


@dataclass(frozen=True)
class DimTest:
    d: int
    statistic: float
    degrees_of_freedom: int
    p_value: float


@dataclass(frozen=True, eq=False)
class SirResult:
    eigenvalues: np.ndarray
    directions: np.ndarray
    slice_count: int
    slice_sizes: tuple[int, ...]
    dim_tests: tuple[DimTest, ...]
    estimated_d: int
    level: float


def chi_sq_upper_tail(statistic: float, df: int) -> float:
    """P(chi2_df > statistic), via the regularized upper incomplete gamma."""
    if df < 1:
        raise InputError(f"degrees of freedom must be >= 1, got {df}")
    if statistic < 0:
        raise InputError(f"statistic must be nonnegative, got {statistic}")
    if statistic == 0:
        return 1.0
    return float(min(1.0, max(0.0, special.gammaincc(df / 2.0, statistic / 2.0))))


def slice_response(y, slices: int) -> np.ndarray:
    """Slice label per case; slices are contiguous in sorted ``y`` and never split ties.

    Each tie group goes to the slice containing the midpoint of its ranks, so
    slice sizes stay as equal as the ties allow. Empty slices are dropped and
    labels renumbered from 0.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    values, inverse, counts = np.unique(y, return_inverse=True, return_counts=True)
    if slices > values.size:
        raise InputError(f"{slices} slices requested but response has {values.size} distinct values")
    start = np.concatenate([[0], np.cumsum(counts)[:-1]])
    mid = start + counts / 2.0
    group_slice = np.minimum((mid * slices / n).astype(int), slices - 1)
    _, group_slice = np.unique(group_slice, return_inverse=True)
    return group_slice[inverse]


def sir(dataset: Dataset, slices: int = 10, level: float = 0.05) -> SirResult:
    """Estimate the structural dimension and directions by sliced inverse regression.

    For each d the statistic ``n * sum(eigenvalues[d:])`` is referred to a
    chi-squared distribution with ``(m - d)(H - d - 1)`` degrees of freedom,
    ``H`` being the number of nonempty slices. The estimate is the smallest d
    that is not rejected at ``level``.
    """
    if slices < 2:
        raise InputError("need at least 2 slices")
    if not 0 < level < 1:
        raise InputError(f"level must lie in (0, 1), got {level}")
    n, m = dataset.n, dataset.m
    if n < 2 * slices:
        raise InputError(f"n = {n} is too small for {slices} slices")
    Z, transform = whiten(dataset.X)
    labels = slice_response(dataset.y, slices)
    H = int(labels.max()) + 1
    sizes = np.bincount(labels, minlength=H)

    M = np.zeros((m, m))
    for h in range(H):
        zbar = Z[labels == h].mean(axis=0)
        M += (sizes[h] / n) * np.outer(zbar, zbar)
    vals, vecs = symmetric_eig(M)
    vals = np.clip(vals, 0.0, None)

    directions = transform @ vecs
    directions /= np.linalg.norm(directions, axis=0)
    # sign convention: largest-magnitude loading positive
    flip = np.sign(directions[np.argmax(np.abs(directions), axis=0), np.arange(m)])
    directions *= np.where(flip == 0, 1.0, flip)

    tests = []
    for d in range(min(m, H - 1)):
        stat = float(n * vals[d:].sum())
        df = (m - d) * (H - d - 1)
        tests.append(DimTest(d, stat, df, chi_sq_upper_tail(stat, df)))
    estimated = next((t.d for t in tests if t.p_value >= level), min(m, H - 1))
    return SirResult(vals, directions, H, tuple(int(s) for s in sizes), tuple(tests), estimated, level)
