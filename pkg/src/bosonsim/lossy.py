"""Lossy circuits: beam-splitter topologies, unitary dilation of sub-unitary
transfer matrices, and loss-budget fitting.

Loss anywhere in a circuit acts like a beam splitter coupling an accessible
mode to an inaccessible one. A sub-unitary M x M transfer matrix embeds as
the top-left block of a 2M x 2M unitary built from its SVD defect; computing
the full distribution under that unitary and post-selecting on no photon
reaching the environment modes reproduces the sub-unitary permanent formula
exactly.

Beam-splitter convention: an element with reflectivity r and phase theta maps
its two modes by [[sqrt(r), i*sqrt(1-r)], [i*sqrt(1-r), sqrt(r)]] followed by
a phase e^{i*theta} on the second arm. Renormalized distributions are
independent of this choice up to relabeling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import differential_evolution, least_squares

from . import fock
from .exceptions import ConvergenceError, DimensionError
from .sampling import OutcomeDistribution, distribution
from .validation import (UNITARY_TOL, as_complex_matrix, check_occupation,
                         check_subunitary, is_unitary)


@dataclass(frozen=True)
class BeamSplitterElement:
    mode_a: int
    mode_b: int
    reflectivity: float
    phase: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.reflectivity <= 1.0:
            raise DimensionError(
                f"reflectivity must be in [0, 1], got {self.reflectivity}"
            )


@dataclass(frozen=True)
class CircuitTopology:
    """Layered beam-splitter network over ``modes`` total modes, of which
    ``accessible`` (sorted mode indices) are observable."""

    modes: int
    elements: tuple
    accessible: tuple = None

    def __post_init__(self):
        elements = tuple(
            e if isinstance(e, BeamSplitterElement) else BeamSplitterElement(*e)
            for e in self.elements
        )
        object.__setattr__(self, "elements", elements)
        for e in elements:
            if e.mode_a == e.mode_b:
                raise DimensionError("beam splitter needs two distinct modes")
            if not (0 <= e.mode_a < self.modes and 0 <= e.mode_b < self.modes):
                raise DimensionError(
                    f"element modes ({e.mode_a}, {e.mode_b}) out of range"
                )
        acc = self.accessible
        acc = tuple(range(self.modes)) if acc is None else tuple(sorted(acc))
        if any(not 0 <= a < self.modes for a in acc):
            raise DimensionError("accessible indices out of range")
        object.__setattr__(self, "accessible", acc)


@dataclass(frozen=True)
class DilationUnitary:
    """Unitary over accessible plus environment modes whose top-left block is
    the target transfer matrix."""

    unitary: np.ndarray
    m_accessible: int

    def __post_init__(self):
        u = as_complex_matrix(self.unitary)
        if not is_unitary(u):
            raise DimensionError("dilation matrix is not unitary")
        object.__setattr__(self, "unitary", u)

    @property
    def modes(self) -> int:
        return self.unitary.shape[0]

    @property
    def transfer_block(self) -> np.ndarray:
        m = self.m_accessible
        return self.unitary[:m, :m]


def dilate(lam) -> DilationUnitary:
    """Embed a sub-unitary M x M matrix as the top-left block of a 2M x 2M
    unitary, using the SVD defect blocks."""
    lam = check_subunitary(lam)
    m = lam.shape[0]
    w, sing, vh = np.linalg.svd(lam)
    sing = np.clip(sing, 0.0, 1.0)
    defect = np.sqrt(1.0 - sing**2)
    core = np.block([
        [np.diag(sing), np.diag(defect)],
        [np.diag(defect), -np.diag(sing)],
    ])
    left = np.block([
        [w, np.zeros((m, m))],
        [np.zeros((m, m)), np.eye(m)],
    ])
    right = np.block([
        [vh, np.zeros((m, m))],
        [np.zeros((m, m)), np.eye(m)],
    ])
    u = left @ core @ right
    u[:m, :m] = lam  # exact block, not subject to SVD round-off
    if not is_unitary(u, tol=UNITARY_TOL * max(1, m)):
        raise ConvergenceError("dilation failed unitarity check")
    return DilationUnitary(u, m)


def postselected_distribution(dil: DilationUnitary, t,
                              outcomes=None) -> OutcomeDistribution:
    """Distribution over accessible outcomes after evolving under the full
    dilation unitary and post-selecting on no photon in the environment."""
    m = dil.m_accessible
    ell = dil.modes
    t = check_occupation(t, m, "input occupation")
    n = sum(t)
    t_full = t + (0,) * (ell - m)
    full = distribution(dil.unitary, t_full, renormalize=False)
    kept = {}
    for occ, p in zip(full.outcomes, full.probs):
        if sum(occ[:m]) == n:
            kept[occ[:m]] = kept.get(occ[:m], 0.0) + p
    if outcomes is None:
        outcomes = fock.enumerate_outcomes(m, n)
    probs = np.array([kept.get(tuple(o), 0.0) for o in outcomes])
    dist = OutcomeDistribution(tuple(tuple(o) for o in outcomes), probs,
                               {"input": t, "postselected": True})
    return dist.renormalized()


def accessible_marginal(dil: DilationUnitary, t_accessible,
                        n_detected: int) -> OutcomeDistribution:
    """Raw (unnormalized) distribution over accessible occupations with
    exactly ``n_detected`` photons detected, environment modes traced out.

    The input occupation is given on the accessible modes only.
    """
    m = dil.m_accessible
    ell = dil.modes
    t = check_occupation(t_accessible, m, "input occupation")
    n = sum(t)
    if n_detected > n:
        raise DimensionError("cannot detect more photons than were injected")
    t_full = t + (0,) * (ell - m)
    full = distribution(dil.unitary, t_full, renormalize=False)
    kept = {}
    for occ, p in zip(full.outcomes, full.probs):
        acc = occ[:m]
        if sum(acc) == n_detected:
            kept[acc] = kept.get(acc, 0.0) + p
    outcomes = sorted(kept, reverse=True)
    probs = np.array([kept[o] for o in outcomes])
    return OutcomeDistribution(tuple(outcomes), probs,
                               {"input": t, "n_detected": n_detected})


def survival_probability(lam, t) -> float:
    """Probability that no photon is lost: the sum of raw weights over all
    accessible outcomes."""
    lam = check_subunitary(lam)
    t = check_occupation(t, lam.shape[0], "input occupation")
    raw = distribution(lam, t, renormalize=False)
    return min(1.0, float(raw.total()))


def _element_matrix(e: BeamSplitterElement, modes: int) -> np.ndarray:
    u = np.eye(modes, dtype=np.complex128)
    c = np.sqrt(e.reflectivity)
    s = 1j * np.sqrt(1.0 - e.reflectivity)
    ph = np.exp(1j * e.phase)
    a, b = e.mode_a, e.mode_b
    u[a, a], u[a, b] = c, s * ph
    u[b, a], u[b, b] = s, c * ph
    return u


def topology_unitary(topo: CircuitTopology) -> np.ndarray:
    """Full unitary over all modes: product of element embeddings in listed
    order (first element nearest the inputs)."""
    u = np.eye(topo.modes, dtype=np.complex128)
    for e in topo.elements:
        u = u @ _element_matrix(e, topo.modes)
    return u


def topology_to_matrix(topo: CircuitTopology) -> np.ndarray:
    """Transfer matrix restricted to accessible rows and columns
    (sub-unitary when inaccessible modes exist)."""
    u = topology_unitary(topo)
    idx = np.array(topo.accessible)
    return u[np.ix_(idx, idx)]


@dataclass(frozen=True)
class LossFitConfig:
    seed: int = 0
    maxiter: int = 400
    popsize: int = 24
    residual_tol: float = 1e-6


@dataclass(frozen=True)
class LossBudget:
    """Fitted amplitude transmissions grouped as per-input (source),
    per-output (detector), and a common circuit scale."""

    source: np.ndarray
    detector: np.ndarray
    circuit: float
    residual: float

    def apply(self, lam) -> np.ndarray:
        lam = as_complex_matrix(lam)
        return np.diag(self.source) @ lam @ np.diag(self.detector) * self.circuit


def fit_loss_budget(topo_lossless: CircuitTopology, lam_target,
                    config: LossFitConfig = LossFitConfig()) -> LossBudget:
    """Fit relative losses so the lossless topology's transfer matrix,
    dressed with source/circuit/detector transmissions, reproduces the
    magnitudes of a characterized target matrix.

    Phases are untouched: losses are real couplings, so only |entries| are
    matched (Frobenius distance). Raises ConvergenceError when the residual
    stays above ``config.residual_tol``.
    """
    base = np.abs(topology_to_matrix(topo_lossless))
    target = np.abs(as_complex_matrix(lam_target))
    m = base.shape[0]
    if target.shape != base.shape:
        raise DimensionError("target size does not match topology")

    def model(x):
        return np.outer(x[:m], x[m:2 * m]) * base * x[2 * m]

    def cost(x):
        return float(np.linalg.norm(model(x) - target))

    bounds = [(0.0, 1.0)] * (2 * m + 1)
    result = differential_evolution(
        cost, bounds, seed=config.seed, maxiter=config.maxiter,
        popsize=config.popsize, tol=1e-12, polish=True,
    )
    refined = least_squares(
        lambda x: (model(x) - target).ravel(), result.x,
        bounds=(0.0, 1.0), xtol=1e-15, ftol=1e-15, gtol=1e-15,
    )
    result.x = refined.x
    residual = float(cost(result.x))
    if residual > config.residual_tol:
        raise ConvergenceError(
            f"loss fit residual {residual:.3g} above tolerance "
            f"{config.residual_tol:.3g}"
        )
    x = result.x
    return LossBudget(x[:m].copy(), x[m:2 * m].copy(), float(x[2 * m]), residual)
