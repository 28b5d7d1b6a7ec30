"""Transfer-matrix reconstruction from one- and two-photon data.

Magnitudes come from single-photon transmission frequencies (each row
rescaled so its maximum is 1; only ratios matter after post-selection).
Phases come from two-photon interference visibilities

    V = -2 t11 t12 t21 t22 / ((t11 t22)^2 + (t12 t21)^2)
        * cos(phi_11 + phi_22 - phi_12 - phi_21)

(indices abbreviating the (input, output) pairs involved; the sign makes
V > 0 a coincidence dip), fitted by weighted
least squares in the gauge where the first row and first column of phases are
zero. Visibilities only constrain cosines, so the reconstruction is defined
up to complex conjugation, which leaves every output distribution unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator

from .exceptions import (DimensionError, EmptyDistributionError,
                         UndefinedVisibilityError,
                         UnderdeterminedPhaseSystemError)
from .sampling import OutcomeDistribution, distribution
from .validation import as_complex_matrix, check_occupation


@dataclass(frozen=True)
class OnePhotonData:
    """Relative single-photon detection frequencies; ``freq[i, j]`` is the
    frequency of output j for input i."""

    freq: np.ndarray
    variance: np.ndarray = None

    def __post_init__(self):
        freq = np.asarray(self.freq, dtype=float)
        if freq.ndim != 2:
            raise DimensionError("one-photon table must be 2-D")
        if np.any(freq < 0):
            raise DimensionError("negative one-photon frequency")
        if not np.all(freq.max(axis=1) > 0):
            raise DimensionError("every input row needs a nonzero entry")
        var = self.variance
        var = np.zeros_like(freq) if var is None else np.asarray(var, float)
        if var.shape != freq.shape or np.any(var < 0):
            raise DimensionError("variance table malformed")
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "variance", var)


@dataclass(frozen=True)
class VisibilityRecord:
    i1: int
    i2: int
    j1: int
    j2: int
    visibility: float
    variance: float = 0.0

    def __post_init__(self):
        if self.i1 == self.i2 or self.j1 == self.j2:
            raise DimensionError("two-photon record needs distinct modes")
        if not math.isfinite(self.visibility):
            raise DimensionError("visibility must be finite")


@dataclass(frozen=True)
class TwoPhotonData:
    records: tuple

    def __post_init__(self):
        recs = tuple(
            r if isinstance(r, VisibilityRecord) else VisibilityRecord(*r)
            for r in self.records
        )
        object.__setattr__(self, "records", recs)


def simulate_one_photon(lam, shots: int | None = None, seed=0) -> OnePhotonData:
    """Exact |entries|^2 table, or multinomially resampled relative
    frequencies at ``shots`` counts per input with variance estimates."""
    lam = as_complex_matrix(lam)
    p = np.abs(lam) ** 2
    if shots is None:
        return OnePhotonData(p, np.zeros_like(p))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    freq = np.empty_like(p)
    var = np.empty_like(p)
    for i in range(p.shape[0]):
        row = p[i] / p[i].sum()
        counts = rng.multinomial(shots, row)
        freq[i] = counts / shots
        var[i] = np.maximum(freq[i] * (1 - freq[i]), 1.0 / shots) / shots
    return OnePhotonData(freq, var)


def simulate_two_photon(lam, i1: int, i2: int, j1: int,
                        j2: int) -> tuple[float, float, float]:
    """Coincidence probabilities for indistinguishable and distinguishable
    photon pairs, and the interference visibility
    V = (P_dist - P_indist) / P_dist."""
    lam = as_complex_matrix(lam)
    if i1 == i2 or j1 == j2:
        raise DimensionError("two-photon interference needs distinct modes")
    a = lam[i1, j1] * lam[i2, j2]
    b = lam[i1, j2] * lam[i2, j1]
    p_ind = abs(a + b) ** 2
    p_dist = abs(a) ** 2 + abs(b) ** 2
    if p_dist == 0.0:
        raise UndefinedVisibilityError(
            f"distinguishable coincidence probability vanishes for "
            f"inputs ({i1}, {i2}) outputs ({j1}, {j2})"
        )
    return float(p_ind), float(p_dist), float((p_dist - p_ind) / p_dist)


def simulate_two_photon_data(lam, pairs=None) -> TwoPhotonData:
    """Visibility records for all (or the given) input/output mode pairs;
    pairs with vanishing coincidence probability are skipped."""
    lam = as_complex_matrix(lam)
    m = lam.shape[0]
    if pairs is None:
        pairs = [
            (i1, i2, j1, j2)
            for i1 in range(m) for i2 in range(i1 + 1, m)
            for j1 in range(m) for j2 in range(j1 + 1, m)
        ]
    records = []
    for i1, i2, j1, j2 in pairs:
        try:
            _, _, v = simulate_two_photon(lam, i1, i2, j1, j2)
        except UndefinedVisibilityError:
            continue
        records.append(VisibilityRecord(i1, i2, j1, j2, v))
    return TwoPhotonData(tuple(records))


def recover_magnitudes(data: OnePhotonData) -> np.ndarray:
    """Magnitude table tau with each row rescaled to maximum 1."""
    freq = data.freq
    return np.sqrt(freq / freq.max(axis=1, keepdims=True))


@dataclass(frozen=True)
class PhaseFit:
    phases: np.ndarray
    residual: float
    n_free: int


def _phase_indices(m: int, mask: np.ndarray) -> list[tuple[int, int]]:
    # Gauge: first row and first column fixed to zero.
    return [(i, j) for i in range(1, m) for j in range(1, m) if mask[i, j]]


def _visibility_model(tau, i1, i2, j1, j2):
    a = tau[i1, j1] * tau[i2, j2]
    b = tau[i1, j2] * tau[i2, j1]
    denom = a * a + b * b
    amp = 2 * a * b / denom if denom > 0 else 0.0
    return amp, denom


def recover_phases(tau, data: TwoPhotonData, mask=None, n_starts: int = 32,
                   seed: int = 0) -> PhaseFit:
    """Weighted least-squares phase recovery in the row-1/column-1 zero
    gauge.

    ``mask`` marks entries allowed a non-zero phase (a topology may force
    several to zero). Raises UnderdeterminedPhaseSystemError when the records
    do not pin down every free phase.
    """
    tau = np.asarray(tau, dtype=float)
    m = tau.shape[0]
    mask = np.ones((m, m), bool) if mask is None else np.asarray(mask, bool)
    mask = mask & (tau > 0)
    free = _phase_indices(m, mask)
    index_of = {ij: k for k, ij in enumerate(free)}
    n_free = len(free)

    usable = []
    coeffs = []
    for rec in data.records:
        amp, denom = _visibility_model(tau, rec.i1, rec.i2, rec.j1, rec.j2)
        if denom == 0 or amp == 0:
            continue
        row = np.zeros(n_free)
        for (i, j), sign in (((rec.i1, rec.j1), 1.0), ((rec.i2, rec.j2), 1.0),
                             ((rec.i1, rec.j2), -1.0), ((rec.i2, rec.j1), -1.0)):
            if (i, j) in index_of:
                row[index_of[(i, j)]] += sign
        usable.append((rec, amp, row))
        coeffs.append(row)
    if n_free > 0:
        rank = np.linalg.matrix_rank(np.array(coeffs)) if coeffs else 0
        if rank < n_free:
            raise UnderdeterminedPhaseSystemError(n_free, rank)

    weights = np.array([
        1.0 / math.sqrt(rec.variance) if rec.variance > 0 else 1.0
        for rec, _, _ in usable
    ])
    vis = np.array([rec.visibility for rec, _, _ in usable])
    amps = np.array([amp for _, amp, _ in usable])
    rows = np.array([row for _, _, row in usable])

    def residuals(phi):
        return weights * (-amps * np.cos(rows @ phi) - vis)

    def fit_from(phi0):
        res = least_squares(residuals, phi0, method="lm", max_nfev=2000)
        return res.x, float(np.sum(res.fun**2))

    starts = [_propagation_initial(tau, data, mask, m, free)]
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    best_phi, best_cost = None, np.inf
    for attempt in range(max(1, n_starts)):
        if attempt < len(starts):
            phi0 = starts[attempt]
        else:
            phi0 = rng.uniform(-np.pi, np.pi, n_free)
        phi, cost = fit_from(phi0) if n_free else (np.zeros(0), float(
            np.sum((weights * (-amps - vis)) ** 2)))
        if cost < best_cost:
            best_phi, best_cost = phi, cost
        if best_cost < 1e-16:
            break

    phases = np.zeros((m, m))
    for (i, j), val in zip(free, best_phi):
        phases[i, j] = _wrap_phase(val)
    return PhaseFit(phases, best_cost, n_free)


def _wrap_phase(phi: float) -> float:
    phi = (phi + np.pi) % (2 * np.pi) - np.pi
    return np.pi if np.isclose(phi, -np.pi) else float(phi)


def _propagation_initial(tau, data, mask, m, free) -> np.ndarray:
    """Deterministic starting point: take arccos of gauge-fixed phase
    combinations from the records referencing row/column 0, then propagate
    sign choices through the interior.

    Falls back to zeros for entries the record set does not cover.
    """
    cos_of = {}
    for rec in data.records:
        amp, denom = _visibility_model(tau, rec.i1, rec.i2, rec.j1, rec.j2)
        if denom == 0 or amp == 0:
            continue
        key = (tuple(sorted((rec.i1, rec.i2))), tuple(sorted((rec.j1, rec.j2))))
        cos_of[key] = float(np.clip(-rec.visibility / amp, -1.0, 1.0))

    def lookup(i1, i2, j1, j2):
        return cos_of.get((tuple(sorted((i1, i2))), tuple(sorted((j1, j2)))))

    phi = np.zeros((m, m))
    known = np.zeros((m, m), bool)
    known[0, :] = known[:, 0] = True
    # Magnitudes |phi_ij| from records against row/column 0.
    mag = np.full((m, m), np.nan)
    for i in range(1, m):
        for j in range(1, m):
            c = lookup(0, i, 0, j)
            if c is not None:
                mag[i, j] = math.acos(c)
    order = [(1, 1)] + [(i, 1) for i in range(2, m)] + \
        [(1, j) for j in range(2, m)] + \
        [(i, j) for i in range(2, m) for j in range(2, m)]
    for i, j in order:
        if not mask[i, j] or np.isnan(mag[i, j]):
            continue
        if (i, j) == (1, 1):
            phi[1, 1] = mag[1, 1]  # global conjugation freedom
            known[1, 1] = True
            continue
        if j == 1:
            c = lookup(1, i, 0, 1)  # combination phi_i1 - phi_11
            ref, need = phi[1, 1], known[1, 1]
        elif i == 1:
            c = lookup(0, 1, 1, j)  # combination phi_1j - phi_11
            ref, need = phi[1, 1], known[1, 1]
        else:
            c = lookup(1, i, 1, j)  # phi_11 + phi_ij - phi_1j - phi_i1
            ref = phi[i, 1] + phi[1, j] - phi[1, 1]
            need = known[i, 1] and known[1, j] and known[1, 1]
        if c is None or not need:
            phi[i, j] = mag[i, j]
            known[i, j] = True
            continue
        plus = abs(math.cos(mag[i, j] - ref) - c)
        minus = abs(math.cos(-mag[i, j] - ref) - c)
        phi[i, j] = mag[i, j] if plus <= minus else -mag[i, j]
        known[i, j] = True
    return np.array([phi[ij] for ij in free])


def assemble_transfer_matrix(tau, phases) -> np.ndarray:
    return np.asarray(tau, float) * np.exp(1j * np.asarray(phases, float))


def resample_lambda(tau, phases, tau_variance=None, phase_variance=None,
                    n_draws: int = 1, seed: int = 0) -> np.ndarray:
    """Monte Carlo ensemble of transfer matrices with independent normal
    perturbations on magnitudes and phases; downstream error bars are the
    per-outcome standard deviation across the ensemble."""
    if n_draws < 1:
        raise DimensionError("n_draws must be >= 1")
    tau = np.asarray(tau, float)
    phases = np.asarray(phases, float)
    tau_variance = np.zeros_like(tau) if tau_variance is None else \
        np.asarray(tau_variance, float)
    phase_variance = np.zeros_like(phases) if phase_variance is None else \
        np.asarray(phase_variance, float)
    if np.any(tau_variance < 0) or np.any(phase_variance < 0):
        raise DimensionError("variances must be non-negative")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    draws = np.empty((n_draws,) + tau.shape, dtype=np.complex128)
    for k in range(n_draws):
        t = np.clip(tau + rng.normal(0, np.sqrt(tau_variance)), 0.0, None)
        p = phases + rng.normal(0, np.sqrt(phase_variance))
        draws[k] = assemble_transfer_matrix(t, p)
    return draws


class TransferMatrixEstimator(BaseEstimator):
    """Reconstruct a transfer matrix from one- and two-photon data.

    Follows the scikit-learn estimator protocol: configure in ``__init__``,
    learn with ``fit``, then query fitted attributes (``transfer_matrix_``,
    ``tau_``, ``phases_``, ``residual_``) or call ``predict_distribution``.
    """

    def __init__(self, phase_mask=None, n_starts=32, seed=0):
        self.phase_mask = phase_mask
        self.n_starts = n_starts
        self.seed = seed

    def fit(self, one_photon: OnePhotonData, two_photon: TwoPhotonData):
        self.tau_ = recover_magnitudes(one_photon)
        fit = recover_phases(self.tau_, two_photon, mask=self.phase_mask,
                             n_starts=self.n_starts, seed=self.seed)
        self.phases_ = fit.phases
        self.residual_ = fit.residual
        self.n_free_phases_ = fit.n_free
        self.transfer_matrix_ = assemble_transfer_matrix(self.tau_, self.phases_)
        return self

    def predict_distribution(self, input_occupation, outcomes=None,
                             collision_free=False) -> OutcomeDistribution:
        if not hasattr(self, "transfer_matrix_"):
            raise EmptyDistributionError("estimator is not fitted")
        t = check_occupation(input_occupation, self.transfer_matrix_.shape[0])
        return distribution(self.transfer_matrix_, t, outcomes=outcomes,
                            renormalize=True, collision_free=collision_free)
