"""Bucket detectors, the trigger cascade, and heralding decision policies.

Idler photons are detected by a cascade of avalanche photodiodes: each photon
survives the idler path with probability ``eta_idler``, is routed uniformly
to one of ``cascade_size`` detectors, and registers there with probability
``eta_det``.  A detector clicks when at least one of its photons registers,
so the whole cascade under an any-click rule is equivalent to a single bucket
detector of efficiency ``eta_idler * eta_det``, while the clicked-detector
count gives coarse photon-number resolution used by the exactly-one policy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .photon_stats import PhotonNumberDistribution


class DetectorError(ValueError):
    """Raised for invalid detector parameters."""


class HeraldPolicy(enum.Enum):
    ANY_CLICK = "any_click"
    EXACTLY_ONE = "exactly_one"


@dataclass(frozen=True)
class TriggerConfig:
    """Idler-arm trigger: detector cascade plus heralding policy."""

    cascade_size: int = 4
    eta_det: float = 0.62
    eta_idler: float = 0.84
    policy: HeraldPolicy = HeraldPolicy.ANY_CLICK
    dark_count_prob_per_bin: float = 0.0

    def __post_init__(self):
        if self.cascade_size < 1:
            raise DetectorError(f"cascade_size must be >= 1, got {self.cascade_size}")
        for name in ("eta_det", "eta_idler", "dark_count_prob_per_bin"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DetectorError(f"{name} must lie in [0, 1], got {v}")
        if not isinstance(self.policy, HeraldPolicy):
            raise DetectorError(f"policy must be a HeraldPolicy, got {self.policy!r}")

    @property
    def eta_trigger(self) -> float:
        """Effective bucket efficiency of the whole trigger system."""
        return self.eta_idler * self.eta_det


@dataclass(frozen=True)
class MeasurementConfig:
    """Transmission from the second collection fiber to the two SPDs.

    ``eta_meas`` is the net figure with the SPD efficiency already folded in
    (bucket model); ``eta_det_meas`` is an extra multiplicative knob left at 1
    when the net figure is used directly.
    """

    eta_meas: float = 0.426
    eta_det_meas: float = 1.0

    def __post_init__(self):
        for name in ("eta_meas", "eta_det_meas"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DetectorError(f"{name} must lie in [0, 1], got {v}")

    @property
    def eta_effective(self) -> float:
        return self.eta_meas * self.eta_det_meas


def bucket_click_prob(dist: PhotonNumberDistribution, eta: float) -> float:
    """Click probability of a zero-vs-some bucket detector of efficiency eta."""
    if not 0.0 <= eta <= 1.0:
        raise DetectorError(f"eta must lie in [0, 1], got {eta}")
    k = np.arange(dist.k_max + 1)
    return float(1.0 - (dist.probs * (1.0 - eta) ** k).sum())


@lru_cache(maxsize=None)
def _occupancy_table(n_det: int, d_max: int) -> np.ndarray:
    """P(c occupied detectors | d photons routed uniformly among n_det).

    Surjection counting: P(c | d) = C(n, c) sum_i (-1)^i C(c, i) (c - i)^d / n^d.
    """
    table = np.zeros((d_max + 1, n_det + 1))
    table[0, 0] = 1.0
    for d in range(1, d_max + 1):
        for c in range(1, min(d, n_det) + 1):
            surj = sum(
                (-1) ** i * math.comb(c, i) * (c - i) ** d for i in range(c + 1)
            )
            table[d, c] = math.comb(n_det, c) * surj / n_det ** d
    return table


def click_count_pmf(k_photons: int, cfg: TriggerConfig) -> np.ndarray:
    """Exact distribution of the clicked-detector count for k idler photons.

    Photons register independently with probability ``eta_trigger``; clicked
    detectors are the occupied ones plus independent dark clicks on the rest.
    """
    if k_photons < 0:
        raise DetectorError(f"k_photons must be >= 0, got {k_photons}")
    n = cfg.cascade_size
    eta = cfg.eta_trigger
    occ_table = _occupancy_table(n, max(k_photons, 1))
    pmf = np.zeros(n + 1)
    for d in range(k_photons + 1):
        p_d = math.comb(k_photons, d) * eta ** d * (1.0 - eta) ** (k_photons - d)
        pmf += p_d * occ_table[d]
    dc = cfg.dark_count_prob_per_bin
    if dc > 0.0:
        out = np.zeros(n + 1)
        for c0 in range(n + 1):
            if pmf[c0] == 0.0:
                continue
            spare = n - c0
            for extra in range(spare + 1):
                out[c0 + extra] += pmf[c0] * (
                    math.comb(spare, extra) * dc ** extra * (1.0 - dc) ** (spare - extra)
                )
        pmf = out
    return pmf


def herald(clicks: int, policy: HeraldPolicy) -> bool:
    """Heralding decision from the clicked-detector count."""
    if clicks < 0:
        raise DetectorError(f"clicks must be >= 0, got {clicks}")
    if policy is HeraldPolicy.ANY_CLICK:
        return clicks >= 1
    return clicks == 1


def herald_prob_given_pairs(k_photons: int, cfg: TriggerConfig) -> float:
    """P(herald | k idler photons) under the configured policy."""
    pmf = click_count_pmf(k_photons, cfg)
    if cfg.policy is HeraldPolicy.ANY_CLICK:
        return float(pmf[1:].sum())
    return float(pmf[1])


def cascade_click_distribution(
    k_photons: int,
    cfg: TriggerConfig,
    rng: np.random.Generator,
    size: int | None = None,
) -> int | np.ndarray:
    """Monte Carlo draw of the clicked-detector count for k idler photons.

    Each photon independently survives the idler path, registers at its
    detector, and photons are routed uniformly; dark counts add clicks on
    otherwise silent detectors.
    """
    if k_photons < 0:
        raise DetectorError(f"k_photons must be >= 0, got {k_photons}")
    n_draws = 1 if size is None else size
    n = cfg.cascade_size
    clicks = np.zeros(n_draws, dtype=np.int64)
    if k_photons > 0:
        registered = rng.random((n_draws, k_photons)) < cfg.eta_trigger
        dets = rng.integers(0, n, size=(n_draws, k_photons))
        occupied = np.zeros((n_draws, n), dtype=bool)
        draw_idx, photon_idx = np.nonzero(registered)
        occupied[draw_idx, dets[draw_idx, photon_idx]] = True
        clicks = occupied.sum(axis=1)
    dc = cfg.dark_count_prob_per_bin
    if dc > 0.0:
        clicks = clicks + rng.binomial(n - clicks, dc)
    if size is None:
        return int(clicks[0])
    return clicks
