"""Combinatorics of bosonic occupation states.

Occupations are tuples of non-negative ints, one entry per mode. The outcome
enumeration is lexicographically descending on the counts vector so output
tables are reproducible across runs.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .exceptions import DimensionError, PhotonNumberMismatchError
from .validation import as_complex_matrix, check_occupation


def total(occ) -> int:
    """Photon number of an occupation vector."""
    return sum(check_occupation(occ))


def enumerate_outcomes(m: int, n: int, collision_free: bool = False) -> list[tuple]:
    """All occupations of ``n`` photons in ``m`` modes.

    With ``collision_free`` only 0/1 occupations are returned (C(m, n) of
    them); otherwise all C(m+n-1, n) compositions. Order is lexicographically
    descending on the counts vector.
    """
    if m < 1:
        raise DimensionError(f"need at least one mode, got m={m}")
    if n < 0:
        raise DimensionError(f"photon number must be non-negative, got n={n}")
    if collision_free:
        if n > m:
            raise DimensionError(
                f"collision-free enumeration needs n <= m, got n={n}, m={m}"
            )
        out = []
        for positions in combinations(range(m), n):
            occ = [0] * m
            for p in positions:
                occ[p] = 1
            out.append(tuple(occ))
        return out
    return [occ for occ in _compositions(m, n)]


def _compositions(m, n):
    if m == 1:
        yield (n,)
        return
    for k in range(n, -1, -1):
        for rest in _compositions(m - 1, n - k):
            yield (k,) + rest


def submatrix(lam, s, t) -> np.ndarray:
    """The N x N matrix built by repeating row i of ``lam`` t_i times and
    column j s_j times (rows index input modes, columns output modes).

    Repeated rows/columns are placed adjacently in index order; any
    consistent choice gives the same permanent.
    """
    lam = as_complex_matrix(lam)
    m = lam.shape[0]
    s = check_occupation(s, m, "output occupation")
    t = check_occupation(t, m, "input occupation")
    if sum(s) != sum(t):
        raise PhotonNumberMismatchError(
            f"photon numbers differ: output {sum(s)}, input {sum(t)}"
        )
    rows = np.repeat(lam, t, axis=0)
    return np.repeat(rows, s, axis=1)


def multiplicity_factor(s, t) -> int:
    """Product of factorials of all occupation entries of ``s`` and ``t``."""
    s = check_occupation(s, name="output occupation")
    t = check_occupation(t, name="input occupation")
    if sum(s) != sum(t):
        raise PhotonNumberMismatchError(
            f"photon numbers differ: output {sum(s)}, input {sum(t)}"
        )
    result = 1
    for c in s:
        result *= math.factorial(c)
    for c in t:
        result *= math.factorial(c)
    return result
