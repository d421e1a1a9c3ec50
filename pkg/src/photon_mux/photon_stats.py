"""Photon-number distributions and the elementary channels acting on them.

The photon-pair source emits a thermal (geometric) number of pairs per pump
pulse; every efficiency in the apparatus acts on a photon-number distribution
as binomial thinning, and the 50/50 measurement splitter as a balanced
binomial split.  Everything downstream of the source works in terms of the
truncated probability vector defined here.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

# Pre-truncation tail mass allowed before the truncation bound is rejected.
TAIL_TOLERANCE = 1e-10
# Normalisation slack accepted when constructing a distribution.
NORMALISATION_TOLERANCE = 1e-9

DEFAULT_K_MAX = 12


class PhotonStatsError(ValueError):
    """Raised for invalid distribution parameters."""


@dataclass(frozen=True)
class PhotonNumberDistribution:
    """Probability vector over photon number k = 0..k_max.

    The vector must be normalised to 1 within ``NORMALISATION_TOLERANCE``
    and every entry must lie in [0, 1].
    """

    probs: np.ndarray = field()

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.size < 1:
            raise PhotonStatsError("probs must be a non-empty 1-d vector")
        if np.any(probs < -1e-15) or np.any(probs > 1 + 1e-12):
            raise PhotonStatsError("probs entries must lie in [0, 1]")
        total = probs.sum()
        if abs(total - 1.0) > NORMALISATION_TOLERANCE:
            raise PhotonStatsError(
                f"probs must sum to 1 within {NORMALISATION_TOLERANCE}, got {total!r}"
            )

    @property
    def k_max(self) -> int:
        return self.probs.size - 1

    def __len__(self):
        return self.probs.size

    def __getitem__(self, k):
        return self.probs[k]


def min_k_max(mu: float, tol: float = TAIL_TOLERANCE) -> int:
    """Smallest truncation bound whose thermal tail mass stays below ``tol``.

    Never below ``DEFAULT_K_MAX``; for mu <= 1 the result is at most 34.
    """
    if mu < 0:
        raise PhotonStatsError(f"mu must be >= 0, got {mu}")
    k = DEFAULT_K_MAX
    q = mu / (1.0 + mu)
    if q <= 0.0:
        return k
    while q ** (k + 1) >= tol:
        k += 1
    return k


def thermal_tail_mass(mu: float, k_max: int) -> float:
    """Analytic pre-truncation mass of the thermal law beyond ``k_max``."""
    if mu <= 0:
        return 0.0
    return (mu / (1.0 + mu)) ** (k_max + 1)


def thermal_pmf(mu: float, k_max: int | None = None) -> PhotonNumberDistribution:
    """Thermal pair-number law p(k) = mu^k / (mu + 1)^(k + 1), truncated.

    With ``k_max=None`` the bound is chosen automatically so the discarded
    tail stays below ``TAIL_TOLERANCE``.  An explicit bound that leaves more
    tail mass than that is rejected.  The kept entries are renormalised and
    the discarded mass is logged.
    """
    if mu < 0:
        raise PhotonStatsError(f"mu must be >= 0, got {mu}")
    if k_max is None:
        k_max = min_k_max(mu)
    if k_max < 1:
        raise PhotonStatsError(f"k_max must be >= 1, got {k_max}")
    tail = thermal_tail_mass(mu, k_max)
    if tail >= TAIL_TOLERANCE:
        raise PhotonStatsError(
            f"k_max={k_max} leaves tail mass {tail:.3e} >= {TAIL_TOLERANCE} "
            f"for mu={mu}; increase k_max"
        )
    k = np.arange(k_max + 1)
    probs = mu ** k / (1.0 + mu) ** (k + 1.0)
    if tail > 0.0:
        logger.debug("thermal_pmf(mu=%g, k_max=%d): discarding tail %.3e", mu, k_max, tail)
    return PhotonNumberDistribution(probs / probs.sum())


def vacuum(k_max: int = DEFAULT_K_MAX) -> PhotonNumberDistribution:
    probs = np.zeros(k_max + 1)
    probs[0] = 1.0
    return PhotonNumberDistribution(probs)


def fock(k: int, k_max: int | None = None) -> PhotonNumberDistribution:
    """Point distribution at photon number ``k`` (test and HOM convenience)."""
    if k_max is None:
        k_max = max(k, DEFAULT_K_MAX)
    probs = np.zeros(k_max + 1)
    probs[k] = 1.0
    return PhotonNumberDistribution(probs)


def _comb_table(k_max: int) -> np.ndarray:
    table = _COMB_CACHE.get(k_max)
    if table is None:
        table = np.zeros((k_max + 1, k_max + 1))
        for k in range(k_max + 1):
            for m in range(k + 1):
                table[m, k] = math.comb(k, m)
        _COMB_CACHE[k_max] = table
    return table


_COMB_CACHE: dict[int, np.ndarray] = {}


def loss_matrix(eta: float, k_max: int) -> np.ndarray:
    """Binomial-thinning matrix L[m, k] = C(k, m) eta^m (1-eta)^(k-m)."""
    if not 0.0 <= eta <= 1.0:
        raise PhotonStatsError(f"eta must lie in [0, 1], got {eta}")
    m = np.arange(k_max + 1)[:, None]
    k = np.arange(k_max + 1)[None, :]
    with np.errstate(invalid="ignore"):
        mat = _comb_table(k_max) * eta ** m * (1.0 - eta) ** np.maximum(k - m, 0)
    return np.where(m <= k, mat, 0.0)


def apply_loss(dist: PhotonNumberDistribution, eta: float) -> PhotonNumberDistribution:
    """Transmit each photon independently with probability ``eta``."""
    out = loss_matrix(eta, dist.k_max) @ dist.probs
    return PhotonNumberDistribution(out / out.sum())


def split_balanced(dist: PhotonNumberDistribution) -> np.ndarray:
    """Joint law over (transmitted, reflected) counts at a 50/50 splitter.

    Returns joint[m, j] = p(m + j) C(m + j, m) / 2^(m + j); both marginals
    equal ``apply_loss(dist, 0.5)``.
    """
    K = dist.k_max
    joint = np.zeros((K + 1, K + 1))
    for k in range(K + 1):
        pk = dist.probs[k]
        if pk == 0.0:
            continue
        for m in range(k + 1):
            joint[m, k - m] += pk * math.comb(k, m) * 0.5 ** k
    return joint


def mean_and_g2(dist: PhotonNumberDistribution) -> tuple[float, float]:
    """Mean photon number and the true zero-delay autocorrelation.

    g2 = sum k(k-1) p(k) / (sum k p(k))^2; undefined (NaN) for zero mean.
    """
    k = np.arange(dist.k_max + 1, dtype=float)
    mean = float((k * dist.probs).sum())
    if mean <= 0.0:
        return mean, float("nan")
    fact2 = float((k * (k - 1.0) * dist.probs).sum())
    return mean, fact2 / mean ** 2


def convolve(a: PhotonNumberDistribution, b: PhotonNumberDistribution) -> PhotonNumberDistribution:
    """Distribution of the photon-number sum of two independent sources."""
    return PhotonNumberDistribution(np.convolve(a.probs, b.probs))
