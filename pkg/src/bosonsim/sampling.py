"""Exact output distributions, samplers, and distribution distances.

The probability of detecting occupation S given input T through a transfer
matrix L is |Per(L^(S,T))|^2 / (prod_j S_j! prod_i T_i!). With the
``renormalize`` flag the weights are divided by their sum over the outcome
set (post-selected relative frequencies); otherwise raw weights are returned,
which sum to at most 1 for a sub-unitary matrix.

Sampling uses numpy's PCG64 generator (seedable, counter-based jumps via
SeedSequence), drawing by inverse CDF over the deterministic outcome order,
so sample streams are reproducible across platforms for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fock
from .exceptions import DimensionError, EmptyDistributionError
from .permanent import determinant, permanent_ryser
from .validation import as_complex_matrix, check_occupation

PROB_CLAMP = 1e-300  # entries below this are treated as exact zeros


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """A normalized (or raw) probability table over occupations or click
    patterns, in a fixed outcome order."""

    outcomes: tuple
    probs: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(tuple(o) for o in self.outcomes))
        probs = np.asarray(self.probs, dtype=float)
        if len(self.outcomes) != probs.shape[0]:
            raise DimensionError("outcomes and probs lengths differ")
        if np.any(probs < 0):
            raise DimensionError("negative probability entry")
        object.__setattr__(self, "probs", probs)

    def __len__(self):
        return len(self.outcomes)

    def prob_of(self, outcome) -> float:
        return self.as_dict().get(tuple(outcome), 0.0)

    def as_dict(self) -> dict:
        return dict(zip(self.outcomes, self.probs.tolist()))

    def total(self) -> float:
        return float(self.probs.sum())

    def renormalized(self) -> "OutcomeDistribution":
        s = self.total()
        if s <= 0:
            raise EmptyDistributionError("all weights vanish; cannot renormalize")
        return OutcomeDistribution(self.outcomes, self.probs / s, dict(self.metadata))


@dataclass(frozen=True)
class SampleRecord:
    """Counts per outcome from repeated independent draws."""

    counts: dict
    total: int
    seed: object

    def __post_init__(self):
        if self.total != sum(self.counts.values()):
            raise DimensionError("total does not match summed counts")


def _clamp(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    w[w < PROB_CLAMP] = 0.0
    return w


def distribution(lam, t, outcomes=None, renormalize=True,
                 collision_free=False) -> OutcomeDistribution:
    """Exact output distribution for input occupation ``t``.

    ``outcomes`` defaults to the full enumeration at the input photon number
    (collision-free only when requested).
    """
    lam = as_complex_matrix(lam)
    m = lam.shape[0]
    t = check_occupation(t, m, "input occupation")
    n = sum(t)
    if outcomes is None:
        outcomes = fock.enumerate_outcomes(m, n, collision_free=collision_free)
    outcomes = [check_occupation(s, m, "outcome") for s in outcomes]
    if not outcomes:
        raise EmptyDistributionError("empty outcome set")
    weights = np.empty(len(outcomes))
    for i, s in enumerate(outcomes):
        per = permanent_ryser(fock.submatrix(lam, s, t))
        weights[i] = abs(per) ** 2 / fock.multiplicity_factor(s, t)
    weights = _clamp(weights)
    meta = {"input": t, "renormalized": bool(renormalize)}
    dist = OutcomeDistribution(tuple(outcomes), weights, meta)
    return dist.renormalized() if renormalize else dist


def fermionic_distribution(lam, t, outcomes=None,
                           renormalize=False) -> OutcomeDistribution:
    """Determinant-based analogue of :func:`distribution` for identical
    fermions; input and outcomes must be collision-free."""
    lam = as_complex_matrix(lam)
    m = lam.shape[0]
    t = check_occupation(t, m, "input occupation")
    if any(c > 1 for c in t):
        raise DimensionError("fermionic input must be collision-free")
    n = sum(t)
    if outcomes is None:
        outcomes = fock.enumerate_outcomes(m, n, collision_free=True)
    outcomes = [check_occupation(s, m, "outcome") for s in outcomes]
    weights = np.empty(len(outcomes))
    for i, s in enumerate(outcomes):
        if any(c > 1 for c in s):
            raise DimensionError("fermionic outcomes must be collision-free")
        weights[i] = abs(determinant(fock.submatrix(lam, s, t))) ** 2
    weights = _clamp(weights)
    meta = {"input": t, "statistics": "fermion"}
    dist = OutcomeDistribution(tuple(outcomes), weights, meta)
    return dist.renormalized() if renormalize else dist


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def sample(dist: OutcomeDistribution, n_samples: int, seed) -> SampleRecord:
    """Draw i.i.d. outcomes by inverse CDF; reproducible for a fixed seed.

    ``seed`` may be an int, a tuple of ints, or a SeedSequence.
    """
    if n_samples < 0:
        raise DimensionError("n_samples must be non-negative")
    probs = dist.probs / dist.probs.sum()
    if n_samples == 0:
        return SampleRecord({}, 0, seed)
    rng = _generator(seed)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(n_samples), side="right")
    binned = np.bincount(idx, minlength=len(dist))
    counts = {o: int(c) for o, c in zip(dist.outcomes, binned) if c > 0}
    return SampleRecord(counts, int(n_samples), seed)


def empirical_distribution(record: SampleRecord,
                           dist: OutcomeDistribution) -> OutcomeDistribution:
    """Maximum-likelihood relative frequencies on ``dist``'s outcome order."""
    if record.total == 0:
        raise EmptyDistributionError("empty sample record")
    freqs = np.array([record.counts.get(o, 0) for o in dist.outcomes], float)
    return OutcomeDistribution(dist.outcomes, freqs / record.total,
                               {"n_samples": record.total})


def l1_distance(p1: OutcomeDistribution, p2: OutcomeDistribution) -> float:
    """Half the summed absolute probability difference; 0 for identical and
    1 for disjoint-support distributions."""
    d1, d2 = p1.as_dict(), p2.as_dict()
    if set(d1) != set(d2):
        raise DimensionError("distributions have different outcome sets")
    return 0.5 * sum(abs(d1[o] - d2[o]) for o in d1)


def finite_sample_curve(dist: OutcomeDistribution, sample_sizes,
                        replicates: int, seed) -> list[tuple[int, float, float]]:
    """Mean and standard deviation of the L1 distance between empirical and
    exact distributions, per sample size.

    Each replicate uses a seed derived from (seed, size-index, replicate).
    """
    if replicates < 1:
        raise DimensionError("replicates must be >= 1")
    rows = []
    for si, n in enumerate(sample_sizes):
        ds = np.empty(replicates)
        for r in range(replicates):
            rec = sample(dist, n, np.random.SeedSequence((seed, si, r)))
            ds[r] = l1_distance(empirical_distribution(rec, dist), dist)
        rows.append((int(n), float(ds.mean()), float(ds.std())))
    return rows
