"""Realistic-machine model: multi-pair emission, partial distinguishability,
threshold-click detection, and dark counts.

Pair sources emit a two-mode squeezed state, so each source contributes a
next-order term (one extra pair) with relative probability weight lambda^2.
Partial distinguishability mixes in the distributions obtained when one
photon is distinguishable from the rest; two-or-more distinguishable photons
are neglected. Threshold detectors collapse occupations to click patterns
(modes with at least one photon) and the machine post-selects on the
intended number of clicks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fock
from .exceptions import DimensionError, EmptyDistributionError
from .lossy import DilationUnitary, accessible_marginal, dilate
from .permanent import permanent_ryser
from .sampling import OutcomeDistribution, distribution
from .validation import as_complex_matrix, check_occupation


@dataclass(frozen=True)
class PdcSource:
    """Pair source feeding one photon per pair into each listed circuit
    mode; ``lambda2`` is the relative weight of the next-order emission."""

    lambda2: float
    modes: tuple
    truncation: int = 2

    def __post_init__(self):
        if not 0.0 <= self.lambda2 < 1.0:
            raise DimensionError("lambda^2 must be in [0, 1)")
        if self.truncation < 1:
            raise DimensionError("truncation must be >= 1")
        object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))


@dataclass(frozen=True)
class NoiseParams:
    sources: tuple = ()
    alpha: float = 1.0
    dark_rate: float = 0.0
    postselect_n: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if not 0.0 <= self.alpha <= 1.0:
            raise DimensionError("alpha must be in [0, 1]")
        if not 0.0 <= self.dark_rate < 1.0:
            raise DimensionError("dark rate must be in [0, 1)")


def click_pattern(occupation) -> tuple:
    """Threshold-detector view of an occupation: 1 where >= 1 photon."""
    return tuple(1 if c > 0 else 0 for c in occupation)


def click_distribution(occ_dist: OutcomeDistribution, n_clicks: int,
                       renormalize: bool = True) -> OutcomeDistribution:
    """Aggregate occupations into click patterns, keeping patterns with
    exactly ``n_clicks`` detectors firing."""
    agg = {}
    for occ, p in zip(occ_dist.outcomes, occ_dist.probs):
        pat = click_pattern(occ)
        agg[pat] = agg.get(pat, 0.0) + p
    kept = {pat: p for pat, p in agg.items() if sum(pat) == n_clicks}
    if not kept:
        raise EmptyDistributionError(
            f"no pattern survives post-selection at {n_clicks} clicks"
        )
    patterns = sorted(kept, reverse=True)
    probs = np.array([kept[p] for p in patterns])
    meta = dict(occ_dist.metadata)
    meta["n_clicks"] = n_clicks
    dist = OutcomeDistribution(tuple(patterns), probs, meta)
    return dist.renormalized() if renormalize else dist


def _raw_click_component(dil: DilationUnitary, t, n_clicks: int) -> dict:
    """Raw click-pattern weights at ``n_clicks`` from input ``t`` through
    the dilation, photons in environment modes traced out."""
    m = dil.m_accessible
    n_in = sum(t)
    agg = {}
    # A pattern of k clicks needs at least k detected photons.
    for n_detected in range(n_clicks, n_in + 1):
        marg = accessible_marginal(dil, t, n_detected)
        for occ, p in zip(marg.outcomes, marg.probs):
            pat = click_pattern(occ)
            if sum(pat) == n_clicks:
                agg[pat] = agg.get(pat, 0.0) + p
    return agg


def _with_extra_pair(base_t, source: PdcSource, m: int) -> tuple:
    t = list(base_t)
    for mode in source.modes:
        if not 0 <= mode < m:
            raise DimensionError(f"source mode {mode} out of range")
        if base_t[mode] < 1:
            raise DimensionError(
                f"source feeds mode {mode} but the base input is empty there"
            )
        t[mode] += 1
    return tuple(t)


def higher_order_mixture(lam, base_t, sources, postselect_n: int,
                         alpha: float = 1.0) -> OutcomeDistribution:
    """Click distribution including each source's next-order emission term.

    The single-pair base term carries weight 1 and each source's extra-pair
    term weight lambda^2; components are propagated through the (dilated)
    lossy circuit, thresholded, post-selected at ``postselect_n`` clicks, and
    the weighted raw mixture is renormalized. ``alpha`` < 1 applies partial
    distinguishability to the dominant base term only.
    """
    lam = as_complex_matrix(lam)
    m = lam.shape[0]
    base_t = check_occupation(base_t, m, "base input")
    if postselect_n > sum(base_t):
        raise DimensionError(
            "source truncation too low for the requested click post-selection"
        )
    dil = dilate(lam)
    base_raw = _raw_click_component(dil, base_t, postselect_n)
    if alpha < 1.0:
        base_raw = _distinguishability_dressed(lam, base_t, alpha,
                                               postselect_n, base_raw)
    components = [(1.0, base_raw)]
    weights = [1.0]
    for src in sources:
        t_hi = _with_extra_pair(base_t, src, m)
        components.append((src.lambda2, _raw_click_component(dil, t_hi,
                                                             postselect_n)))
        weights.append(src.lambda2)
    mixed = {}
    for w, comp in components:
        for pat, p in comp.items():
            mixed[pat] = mixed.get(pat, 0.0) + w * p
    patterns = sorted(mixed, reverse=True)
    probs = np.array([mixed[p] for p in patterns])
    dist = OutcomeDistribution(tuple(patterns), probs, {
        "input": base_t,
        "component_weights": tuple(weights),
        "n_clicks": postselect_n,
    })
    return dist.renormalized()


def _distinguishability_dressed(lam, base_t, alpha, n_clicks,
                                base_raw: dict) -> dict:
    """Replace the base component's shape with the partial-distinguishability
    mixture, keeping the base component's raw total weight."""
    total = sum(base_raw.values())
    if total <= 0:
        return base_raw
    mix = partial_distinguishability_mixture(lam, base_t, alpha)
    return {click_pattern(occ): total * p
            for occ, p in zip(mix.outcomes, mix.probs)}


def distinguishable_distribution(lam, t, which: int,
                                 outcomes=None) -> OutcomeDistribution:
    """Distribution when the photon entering mode ``which`` is
    distinguishable from the rest: an incoherent sum over the output slot it
    occupies, with the remaining photons interfering as usual.

    Outcomes are restricted to collision-free occupations (threshold-click
    post-selection at the full photon number).
    """
    lam = as_complex_matrix(lam)
    m = lam.shape[0]
    t = check_occupation(t, m, "input occupation")
    if t[which] != 1:
        raise DimensionError(
            f"distinguishable photon's input mode {which} must hold exactly "
            f"one photon"
        )
    n = sum(t)
    if outcomes is None:
        outcomes = fock.enumerate_outcomes(m, n, collision_free=True)
    t_rest = list(t)
    t_rest[which] = 0
    t_rest = tuple(t_rest)
    weights = np.empty(len(outcomes))
    for k, s in enumerate(outcomes):
        s = check_occupation(s, m, "outcome")
        if any(c > 1 for c in s):
            raise DimensionError("distinguishable outcomes must be collision-free")
        w = 0.0
        for slot in range(m):
            if s[slot] == 0:
                continue
            s_rest = list(s)
            s_rest[slot] = 0
            per = permanent_ryser(fock.submatrix(lam, tuple(s_rest), t_rest))
            w += (abs(lam[which, slot]) ** 2 * abs(per) ** 2
                  / fock.multiplicity_factor(tuple(s_rest), t_rest))
        weights[k] = w
    dist = OutcomeDistribution(tuple(tuple(o) for o in outcomes), weights,
                               {"input": t, "distinguishable_input": which})
    return dist.renormalized()


def partial_distinguishability_mixture(lam, t, alpha: float,
                                       outcomes=None) -> OutcomeDistribution:
    """Convex mixture of the ideal distribution (weight alpha^(2N)) with the
    N one-distinguishable-photon distributions, each weighted by
    alpha^(2(N-1)) * (1 - alpha^2); two-or-more distinguishable photons are
    neglected, and the truncated mixture is renormalized.
    """
    lam = as_complex_matrix(lam)
    m = lam.shape[0]
    t = check_occupation(t, m, "input occupation")
    n = sum(t)
    if not 0.0 <= alpha <= 1.0:
        raise DimensionError("alpha must be in [0, 1]")
    if outcomes is None:
        outcomes = fock.enumerate_outcomes(m, n, collision_free=True)
    ideal = distribution(lam, t, outcomes=outcomes, renormalize=True)
    if alpha == 1.0:
        return ideal
    w_ideal = alpha ** (2 * n)
    w_dist = alpha ** (2 * (n - 1)) * (1.0 - alpha ** 2)
    mix = w_ideal * ideal.probs.copy()
    inputs = [i for i in range(m) for _ in range(t[i])]
    for i in inputs:
        comp = distinguishable_distribution(lam, t, i, outcomes=outcomes)
        mix += w_dist * comp.probs
    meta = {"input": t, "alpha": alpha,
            "weights": (w_ideal,) + (w_dist,) * n}
    return OutcomeDistribution(ideal.outcomes, mix, meta).renormalized()


def _dark_contribution(lower: OutcomeDistribution, dark_rate: float,
                       m: int) -> dict:
    """First-order weight of (N-1)-click events promoted to N clicks by a
    single dark count in an idle mode."""
    contrib = {}
    for pat, p in zip(lower.outcomes, lower.probs):
        for mode in range(m):
            if pat[mode]:
                continue
            promoted = tuple(1 if k == mode else c for k, c in enumerate(pat))
            contrib[promoted] = contrib.get(promoted, 0.0) + p * dark_rate
    return contrib


def dark_count_adjust(dist: OutcomeDistribution, dark_rate: float,
                      lower: OutcomeDistribution,
                      mode: str = "add") -> OutcomeDistribution:
    """Mix in ("add") or remove ("subtract") the first-order background of
    (N-1)-click events plus one accidental click.

    ``lower`` is the normalized click distribution one click below. The two
    modes are exact inverses at first order. Subtraction that drives any
    probability below -1e-9 signals an inconsistent model.
    """
    if mode not in ("add", "subtract"):
        raise DimensionError(f"unknown adjustment mode {mode!r}")
    if dark_rate < 0:
        raise DimensionError("dark rate must be non-negative")
    m = len(dist.outcomes[0])
    contrib = _dark_contribution(lower, dark_rate, m)
    w = sum(contrib.values())
    base = dist.as_dict()
    patterns = sorted(set(base) | set(contrib), reverse=True)
    if mode == "add":
        probs = np.array([
            (base.get(p, 0.0) + contrib.get(p, 0.0)) / (1.0 + w)
            for p in patterns
        ])
    else:
        probs = np.array([
            base.get(p, 0.0) * (1.0 + w) - contrib.get(p, 0.0)
            for p in patterns
        ])
        if np.any(probs < -1e-9):
            raise DimensionError(
                "background subtraction drove a probability negative: "
                "dark model inconsistent with the data"
            )
        probs = np.clip(probs, 0.0, None)
    meta = dict(dist.metadata)
    meta["dark_adjustment"] = mode
    meta["background_fraction"] = w / (1.0 + w)
    out = OutcomeDistribution(tuple(patterns), probs, meta)
    return out.renormalized()


def build_p_mod(params: NoiseParams, lam, base_t) -> OutcomeDistribution:
    """Full model distribution: multi-pair emission and partial
    distinguishability, plus optional dark counts, post-selected at
    ``params.postselect_n`` clicks."""
    lam = as_complex_matrix(lam)
    base_t = check_occupation(base_t, lam.shape[0], "base input")
    n = params.postselect_n or sum(base_t)
    dist = higher_order_mixture(lam, base_t, params.sources, n,
                                alpha=params.alpha)
    if params.dark_rate > 0 and n >= 1:
        dil = dilate(lam)
        lower_raw = _raw_click_component(dil, base_t, n - 1)
        patterns = sorted(lower_raw, reverse=True)
        lower = OutcomeDistribution(
            tuple(patterns), np.array([lower_raw[p] for p in patterns])
        ).renormalized()
        dist = dark_count_adjust(dist, params.dark_rate, lower, "add")
    return dist


def ideal_click_distribution(lam, base_t, n_clicks: int) -> OutcomeDistribution:
    """The noise-free reference: collision-free post-selected distribution
    viewed as click patterns."""
    ideal = distribution(lam, base_t, renormalize=True, collision_free=True)
    return click_distribution(ideal, n_clicks)
