"""Input validation helpers.

All array-accepting functions in the package funnel their inputs through
these checks so error messages stay uniform and arrays come out as
read-only float64, safe to share across threads.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError

SIMPLEX_TOL = 1e-9


def as_readonly(a: np.ndarray) -> np.ndarray:
    """Return a read-only float64 view/copy of `a`."""
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


def check_series(x, min_length: int = 1, name: str = "series") -> np.ndarray:
    """Validate a finite 1-D float series and return it read-only."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DataError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size < min_length:
        raise DataError(f"{name} needs at least {min_length} points, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return as_readonly(arr)


def check_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate a finite 2-D float matrix and return it read-only."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise DataError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return as_readonly(arr)


def check_square(a, n: int | None = None, name: str = "matrix") -> np.ndarray:
    arr = check_matrix(a, name=name)
    if arr.shape[0] != arr.shape[1]:
        raise DataError(f"{name} must be square, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DataError(f"{name} must be {n}x{n}, got shape {arr.shape}")
    return arr


def weight_array(w, n: int | None = None) -> np.ndarray:
    """Coerce a WeightVector or array-like to a validated weight array.

    Entries must be nonnegative (within SIMPLEX_TOL) and sum to one
    within SIMPLEX_TOL.
    """
    arr = np.asarray(getattr(w, "weights", w), dtype=float)
    if arr.ndim != 1:
        raise DataError(f"weights must be 1-D, got shape {arr.shape}")
    if n is not None and arr.size != n:
        raise DataError(f"dimension mismatch: expected {n} weights, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DataError("weights contain non-finite values")
    if np.any(arr < -SIMPLEX_TOL):
        raise DataError(f"negative weight {arr.min():.3e} below tolerance -{SIMPLEX_TOL:g}")
    total = float(arr.sum())
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise DataError(f"weights sum to {total!r}, not 1 within {SIMPLEX_TOL:g}")
    return as_readonly(arr)


def point_array(w, n: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float vector without simplex constraints.

    Geometry helpers use this for points that may legitimately lie
    outside the simplex (e.g. extrapolations tested for membership).
    """
    arr = np.asarray(getattr(w, "weights", w), dtype=float)
    if arr.ndim != 1:
        raise DataError(f"point must be 1-D, got shape {arr.shape}")
    if n is not None and arr.size != n:
        raise DataError(f"dimension mismatch: expected {n} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DataError("point contains non-finite values")
    return as_readonly(arr)


def check_symmetric_psd(c, tol: float = 1e-10, name: str = "covariance") -> np.ndarray:
    """Validate a symmetric positive semi-definite matrix.

    Symmetry is required exactly; eigenvalues may dip to -`tol` to allow
    for round-off in estimated covariances.
    """
    arr = check_square(c, name=name)
    if np.max(np.abs(arr - arr.T)) != 0.0:
        raise DataError(f"{name} is not exactly symmetric")
    if arr.shape[0] > 0:
        min_eig = float(np.linalg.eigvalsh(arr)[0])
        if min_eig < -tol:
            raise DataError(f"{name} is not PSD: min eigenvalue {min_eig:.3e}")
    return arr


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return (a + a.T)/2, which is exactly symmetric in floating point."""
    return (a + a.T) / 2.0
