"""Input validation helpers used throughout the package.

Matrices are plain complex ndarrays; occupations are tuples of non-negative
ints. These helpers coerce and check, raising package exceptions on bad input.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionError, NotSubunitaryError

UNITARY_TOL = 1e-10


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


def check_occupation(occ, m: int | None = None, name: str = "occupation") -> tuple:
    """Coerce to a tuple of non-negative ints, optionally of length ``m``."""
    try:
        counts = tuple(int(c) for c in occ)
    except (TypeError, ValueError) as exc:
        raise DimensionError(f"{name} must be a sequence of ints") from exc
    if any(c < 0 for c in counts):
        raise DimensionError(f"{name} entries must be non-negative: {counts}")
    if m is not None and len(counts) != m:
        raise DimensionError(
            f"{name} has length {len(counts)}, expected {m}"
        )
    return counts


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = as_complex_matrix(u)
    return bool(
        np.allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=tol, rtol=0.0)
    )


def check_subunitary(lam, tol: float = UNITARY_TOL) -> np.ndarray:
    """Validate that the largest singular value is at most 1 + tol."""
    lam = as_complex_matrix(lam)
    smax = np.linalg.norm(lam, 2)
    if smax > 1.0 + tol:
        raise NotSubunitaryError(
            f"largest singular value {smax:.6g} exceeds 1: not a lossy channel"
        )
    return lam
