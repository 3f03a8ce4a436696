"""Dense linear algebra kernel.

Everything here works on plain 2-D float arrays. Non-finite input is rejected
on entry; nothing downstream ever sees a NaN produced by bad data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InputError, RankError

RANK_TOL = 1e-10
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class LeastSquaresFit:
    coefficients: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    rank: int


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise InputError(f"{name} must have at least one row")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def as_vector(a, name: str = "vector") -> np.ndarray:
    arr = np.asarray(a, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def numerical_rank(design: np.ndarray, tol: float = RANK_TOL) -> int:
    """Count singular values above ``tol`` times the largest one."""
    if design.shape[1] == 0:
        return 0
    s = scipy.linalg.svd(design, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def least_squares(design, response) -> LeastSquaresFit:
    """Minimise ``||response - design @ b||``.

    Full-rank designs are solved through a Householder QR factorisation.
    Rank-deficient designs fall back to the SVD and return the minimum-norm
    solution.
    """
    X = as_matrix(design, "design")
    y = as_vector(response, "response")
    n, p = X.shape
    if y.shape[0] != n:
        raise InputError(f"design has {n} rows but response has {y.shape[0]} entries")
    if p == 0:
        return LeastSquaresFit(np.zeros(0), np.zeros(n), y.copy(), 0)

    rank = numerical_rank(X)
    if rank == p and n >= p:
        Q, R = scipy.linalg.qr(X, mode="economic")
        coef = scipy.linalg.solve_triangular(R, Q.T @ y)
    else:
        coef, _, rank, _ = scipy.linalg.lstsq(X, y, cond=RANK_TOL, lapack_driver="gelsd")
    fitted = X @ coef
    return LeastSquaresFit(coef, fitted, y - fitted, int(rank))


def orthonormal_basis(design) -> np.ndarray:
    """Q factor of a full-column-rank design (economic Householder QR)."""
    X = as_matrix(design, "design")
    n, p = X.shape
    if p == 0:
        return np.zeros((n, 0))
    s = scipy.linalg.svd(X, compute_uv=False)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s[0] > 0 else 0
    if rank < p:
        raise RankError(
            f"design has rank {rank} < {p} columns at relative tolerance {RANK_TOL:g}"
        )
    Q, _ = scipy.linalg.qr(X, mode="economic")
    return Q


def projection_diagonals(design) -> np.ndarray:
    """Diagonal of the orthogonal projection onto the design's column space."""
    Q = orthonormal_basis(design)
    h = np.einsum("ij,ij->i", Q, Q)
    return np.clip(h, 0.0, 1.0)


def symmetric_eig(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix."""
    M = as_matrix(matrix, "matrix")
    if M.shape[0] != M.shape[1]:
        raise InputError(f"matrix must be square, got {M.shape}")
    scale = max(np.max(np.abs(M)), 1.0)
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > SYMMETRY_TOL * scale:
        raise InputError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def sample_covariance(data: np.ndarray) -> np.ndarray:
    centered = data - data.mean(axis=0)
    return centered.T @ centered / (data.shape[0] - 1)


def whiten(data) -> tuple[np.ndarray, np.ndarray]:
    """Center and whiten the columns of ``data``.

    Returns ``(whitened, transform)`` with
    ``whitened = (data - data.mean(0)) @ transform`` and ``transform`` the
    symmetric inverse square root of the sample covariance (n - 1 divisor).
    """
    X = as_matrix(data, "data")
    n, p = X.shape
    if n < 2:
        raise InputError("whitening needs at least two rows")
    sd = X.std(axis=0, ddof=1)
    if np.any(sd == 0.0):
        bad = [int(j) for j in np.flatnonzero(sd == 0.0)]
        raise RankError(f"constant column(s) {bad}; covariance is singular")
    cov = sample_covariance(X)
    vals, vecs = symmetric_eig(cov)
    if vals[-1] <= RANK_TOL * vals[0]:
        raise RankError(
            f"sample covariance is singular (eigenvalue ratio {vals[-1] / vals[0]:.3g})"
        )
    transform = (vecs / np.sqrt(vals)) @ vecs.T
    transform = 0.5 * (transform + transform.T)
    whitened = (X - X.mean(axis=0)) @ transform
    return whitened, transform
