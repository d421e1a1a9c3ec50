"""Count-rate observables and the estimators that turn them into figures of merit.

The output beam is split 50/50 onto two bucket detectors behind a net
transmission ``eta``.  For a per-period output distribution with one- and
two-photon probabilities P1, P2 (higher orders neglected) the singles and
coincidence rates are

    S_i = P1 R eta / 2 + P2 R (eta / 2 + eta (2 - eta) / 4)
    C   = P2 R eta^2 / 2

and inverting them gives the single-photon probability estimator

    P1_est = (1 / (R eta)) (S1 + S2 - C (4 / eta - 1)).

The autocorrelation estimate comes in two normalisations: per repetition
period (``estimate_g2``) and gated on the heralding signal
(``estimate_g2_heralded``).  They coincide when every period heralds; for a
heralded source only the gated form is independent of the heralding
probability, which is what makes the measured value flat versus the number
of multiplexed bins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .photon_stats import PhotonNumberDistribution


class EstimatorError(ValueError):
    """Raised for invalid count-rate inputs."""


_REL_SLACK = 1e-9


@dataclass(frozen=True)
class CountRates:
    """Detector-level observables, all in Hz.

    s1_hz/s2_hz: singles rates at the two measurement detectors;
    c_hz: coincidence rate between them; h_hz: heralding signal rate;
    r_hz: repetition rate of the multiplexing process.
    """

    s1_hz: float
    s2_hz: float
    c_hz: float
    h_hz: float
    r_hz: float

    def __post_init__(self):
        for name in ("s1_hz", "s2_hz", "c_hz", "h_hz", "r_hz"):
            if getattr(self, name) < 0.0:
                raise EstimatorError(f"{name} must be >= 0, got {getattr(self, name)}")
        cap = min(self.s1_hz, self.s2_hz)
        if self.c_hz > cap * (1.0 + _REL_SLACK) + 1e-30:
            raise EstimatorError(
                f"c_hz={self.c_hz} exceeds min singles rate {cap}"
            )
        if self.h_hz > self.r_hz * (1.0 + _REL_SLACK):
            raise EstimatorError(f"h_hz={self.h_hz} exceeds r_hz={self.r_hz}")


class P1Estimate(NamedTuple):
    """Raw estimator value plus the value clamped to [0, 1].

    Noisy counts can push the raw value outside [0, 1]; both are reported so
    the clamping is never silent.
    """

    raw: float
    clamped: float


def bucket_single_prob(m, eta: float):
    """P(one bucket detector clicks | m photons at the 50/50 splitter)."""
    m = np.asarray(m)
    return 1.0 - (1.0 - eta / 2.0) ** m


def bucket_coincidence_prob(m, eta: float):
    """P(both bucket detectors click | m photons at the 50/50 splitter)."""
    m = np.asarray(m)
    return 1.0 - 2.0 * (1.0 - eta / 2.0) ** m + (1.0 - eta) ** m


def predict_counts(
    p1: float, p2: float, r_hz: float, eta: float, p_h: float = 1.0
) -> CountRates:
    """Expected count rates from (P1, P2) alone, photon numbers >= 3 neglected."""
    for name, v in (("p1", p1), ("p2", p2), ("eta", eta), ("p_h", p_h)):
        if not 0.0 <= v <= 1.0:
            raise EstimatorError(f"{name} must lie in [0, 1], got {v}")
    if r_hz < 0:
        raise EstimatorError(f"r_hz must be >= 0, got {r_hz}")
    s = p1 * r_hz * eta / 2.0 + p2 * r_hz * (eta / 2.0 + eta * (2.0 - eta) / 4.0)
    c = p2 * r_hz * eta ** 2 / 2.0
    return CountRates(s1_hz=s, s2_hz=s, c_hz=c, h_hz=p_h * r_hz, r_hz=r_hz)


def expected_counts(
    dist: PhotonNumberDistribution, r_hz: float, eta: float, p_h: float = 1.0
) -> CountRates:
    """Exact expected count rates for a full per-period output distribution.

    Unlike :func:`predict_counts` this keeps every photon-number order, so it
    doubles as the all-orders oracle for the truncated formulas.
    """
    m = np.arange(dist.k_max + 1)
    s = float((dist.probs * bucket_single_prob(m, eta)).sum()) * r_hz
    c = float((dist.probs * bucket_coincidence_prob(m, eta)).sum()) * r_hz
    return CountRates(s1_hz=s, s2_hz=s, c_hz=c, h_hz=p_h * r_hz, r_hz=r_hz)


def estimate_p1(counts: CountRates, eta: float) -> P1Estimate:
    """Single-photon probability from measured rates (exact inverse for k <= 2)."""
    if not 0.0 < eta <= 1.0:
        raise EstimatorError(f"eta must lie in (0, 1], got {eta}")
    if counts.r_hz <= 0.0:
        raise EstimatorError("r_hz must be > 0 to normalise counts")
    raw = (
        counts.s1_hz + counts.s2_hz - counts.c_hz * (4.0 / eta - 1.0)
    ) / (counts.r_hz * eta)
    return P1Estimate(raw=raw, clamped=min(1.0, max(0.0, raw)))


def estimate_g2(counts: CountRates) -> float:
    """Autocorrelation estimate normalised per repetition period: C R / (S1 S2)."""
    if counts.s1_hz <= 0.0 or counts.s2_hz <= 0.0:
        return float("nan")
    return counts.c_hz * counts.r_hz / (counts.s1_hz * counts.s2_hz)


def estimate_g2_heralded(counts: CountRates) -> float:
    """Autocorrelation estimate gated on heralds: C H / (S1 S2).

    Equals :func:`estimate_g2` when every period heralds (H = R); for a
    partially heralded source this is the quantity that stays put as the
    heralding probability changes.
    """
    if counts.s1_hz <= 0.0 or counts.s2_hz <= 0.0:
        return float("nan")
    return counts.c_hz * counts.h_hz / (counts.s1_hz * counts.s2_hz)


def estimate_ph(counts: CountRates) -> float:
    """Multiplexed heralding probability H / R."""
    if counts.r_hz <= 0.0:
        raise EstimatorError("r_hz must be > 0")
    return counts.h_hz / counts.r_hz


def accidental_subtract(raw_coincidences: float, accidental_estimate: float) -> float:
    """Background-corrected coincidence rate, floored at zero."""
    if raw_coincidences < 0 or accidental_estimate < 0:
        raise EstimatorError("rates must be >= 0")
    return max(0.0, raw_coincidences - accidental_estimate)
