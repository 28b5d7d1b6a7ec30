"""Matrix permanent kernels and the determinant contrast.

``permanent_ryser`` is the production kernel: inclusion-exclusion over column
subsets walked in Gray-code order, so each step updates the running row sums
with a single column add or subtract (O(2^n * n) arithmetic overall). A
compiled version handles large n; ``permanent_ryser_reference`` is the pure
Python walk and also reports its arithmetic operation count.
``permanent_naive`` sums over all n! permutations and serves as the
brute-force oracle.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from itertools import islice, permutations

import numpy as np

from .exceptions import MatrixTooLargeError
from .validation import as_complex_matrix

try:
    from numba import njit as _njit
except ImportError:  # pragma: no cover
    _njit = None

NAIVE_MAX = 11
RYSER_MAX = 30

_NAIVE_CACHE_MAX = 9  # permutation index arrays cached up to this size
_NAIVE_CHUNK = 200_000


@lru_cache(maxsize=None)
def _permutation_indices(n: int) -> np.ndarray:
    return np.array(list(permutations(range(n))), dtype=np.intp)


def permanent_naive(a) -> complex:
    """Permanent by direct summation over all n! permutations (n <= 11)."""
    a = as_complex_matrix(a)
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    if n > NAIVE_MAX:
        raise MatrixTooLargeError(
            f"permanent_naive limited to n <= {NAIVE_MAX}, got n={n}"
        )
    rows = np.arange(n)
    if n <= _NAIVE_CACHE_MAX:
        perms = _permutation_indices(n)
        return complex(np.prod(a[rows, perms], axis=1).sum())
    total = 0 + 0j
    it = permutations(range(n))
    while True:
        chunk = np.array(list(islice(it, _NAIVE_CHUNK)), dtype=np.intp)
        if chunk.size == 0:
            break
        total += np.prod(a[rows, chunk], axis=1).sum()
    return complex(total)


if _njit is not None:

    @_njit(cache=True, nogil=True)
    def _ryser_compiled(a):  # pragma: no cover - exercised via wrapper
        n = a.shape[0]
        row = np.zeros(n, dtype=np.complex128)
        total = 0.0 + 0.0j
        ones = 0
        for k in range(1, 1 << n):
            # Gray code g = k ^ (k >> 1); the bit flipped at step k is the
            # number of trailing zeros of k.
            j = 0
            kk = k
            while kk & 1 == 0:
                kk >>= 1
                j += 1
            g = k ^ (k >> 1)
            if (g >> j) & 1:
                ones += 1
                for i in range(n):
                    row[i] += a[i, j]
            else:
                ones -= 1
                for i in range(n):
                    row[i] -= a[i, j]
            prod = 1.0 + 0.0j
            for i in range(n):
                prod *= row[i]
            if ones & 1:
                total -= prod
            else:
                total += prod
        if n & 1:
            return -total
        return total

else:  # pragma: no cover
    _ryser_compiled = None


def permanent_ryser_reference(a) -> tuple[complex, int]:
    """Pure Python Gray-code Ryser walk.

    Returns ``(value, ops)`` where ``ops`` counts complex additions and
    multiplications, so the O(2^n * n) incremental-update claim can be
    checked directly.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    if n == 0:
        return 1 + 0j, 0
    rows = [a[:, j].copy() for j in range(n)]
    row = np.zeros(n, dtype=np.complex128)
    total = 0.0 + 0.0j
    ones = 0
    ops = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        g = k ^ (k >> 1)
        if (g >> j) & 1:
            ones += 1
            row += rows[j]
        else:
            ones -= 1
            row -= rows[j]
        ops += n  # one add/subtract per row sum entry
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= row[i]
        ops += n
        if ones & 1:
            total -= prod
        else:
            total += prod
        ops += 1
    if n & 1:
        total = -total
    return complex(total), ops


def permanent_ryser(a) -> complex:
    """Permanent via Ryser's inclusion-exclusion formula (n <= 30).

    Convention: value = (-1)^n * sum over non-empty column subsets Q of
    (-1)^|Q| * prod_i sum_{j in Q} a[i, j]; the empty matrix has permanent 1.
    """
    a = as_complex_matrix(a)
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    if n > RYSER_MAX:
        raise MatrixTooLargeError(
            f"permanent_ryser limited to n <= {RYSER_MAX}, got n={n}"
        )
    if _ryser_compiled is not None:
        return complex(_ryser_compiled(np.ascontiguousarray(a)))
    return permanent_ryser_reference(a)[0]


def determinant(a) -> complex:
    """Determinant via LU elimination with partial pivoting.

    Only used for the boson/fermion contrast; singular matrices return 0.
    """
    a = as_complex_matrix(a)
    if a.shape[0] == 0:
        return 1 + 0j
    return complex(np.linalg.det(a))


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("BOSONSIM_THREADS", "1")))
    except ValueError:
        return 1


def permanent_batch(matrices) -> list[complex]:
    """Element-wise ``permanent_ryser``; output order matches input order.

    Evaluates concurrently when BOSONSIM_THREADS > 1. Guard failures are
    re-raised with the offending index.
    """
    mats = list(matrices)

    def one(idx_mat):
        idx, mat = idx_mat
        try:
            return permanent_ryser(mat)
        except MatrixTooLargeError as exc:
            raise MatrixTooLargeError(f"matrix {idx}: {exc}") from exc

    threads = _thread_count()
    if threads > 1 and len(mats) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, enumerate(mats)))
    return [one(im) for im in enumerate(mats)]
