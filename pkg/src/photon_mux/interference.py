"""Two-source Hong-Ou-Mandel model for the multiplexed output.

The multiplexed photon meets a weak reference heralded photon on a 50/50
splitter behind the measurement optics.  Losses commute with a balanced
splitter, so the net measurement transmission is folded into each input
distribution first; the enumeration then runs over the photon numbers
actually arriving at the splitter.  Only the (1, 1) arrival component
interferes: its coincidence probability is (1 - I_eff) / 2 against the
classical 1/2, where I_eff combines the spectral indistinguishability with
the temporal wave-packet overlap at the scanned delay.  Components with
three or more photons pass the splitter classically; at the operating mean
photon numbers their interference corrections are absorbed by the stated
visibility tolerance.

Background ("accidental") coincidences are everything not coming from the
interfering (1, 1) arrival pair; subtracting them recovers the bare
indistinguishability as the corrected visibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .estimators import accidental_subtract
from .mux import ExperimentConfig, conditional_output_analytic
from .photon_stats import PhotonNumberDistribution, apply_loss


class InterferenceError(ValueError):
    """Raised for invalid interference parameters."""


FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class HomConfig:
    """Inputs of a HOM delay scan between two heralded sources.

    ``dist_a``/``dist_b`` are fiber-coupled output distributions conditioned
    on each source heralding (the scan is gated on synchronized photons).
    ``pulse_sigma_ps`` carries the quoted single-photon duration; it is
    interpreted as the intensity FWHM unless ``sigma_is_fwhm`` is cleared.
    ``drift_ps`` is the accumulated cycle-length mismatch applied as a
    constant timing offset, and the stored photon picks up
    ``gvd_cycles * gvd_ps2_per_cycle`` of dispersion.
    """

    dist_a: PhotonNumberDistribution
    dist_b: PhotonNumberDistribution
    indistinguishability: float = 0.91
    delay_scan_ps: np.ndarray = field(
        default_factory=lambda: np.linspace(-30.0, 30.0, 61)
    )
    pulse_sigma_ps: float = 6.1
    sigma_is_fwhm: bool = True
    drift_ps: float = 0.01
    gvd_ps2_per_cycle: float = 1.2e-3
    gvd_cycles: int = 40
    eta_meas: float = 0.426

    def __post_init__(self):
        if not 0.0 <= self.indistinguishability <= 1.0:
            raise InterferenceError(
                f"indistinguishability must lie in [0, 1], got {self.indistinguishability}"
            )
        if self.pulse_sigma_ps <= 0:
            raise InterferenceError(
                f"pulse_sigma_ps must be > 0, got {self.pulse_sigma_ps}"
            )
        if not 0.0 <= self.eta_meas <= 1.0:
            raise InterferenceError(f"eta_meas must lie in [0, 1], got {self.eta_meas}")
        object.__setattr__(
            self, "delay_scan_ps", np.asarray(self.delay_scan_ps, dtype=float)
        )


@dataclass(frozen=True)
class HomResult:
    """Coincidence scan plus raw and background-subtracted visibilities."""

    delays_ps: np.ndarray
    coincidences: np.ndarray
    coincidences_subtracted: np.ndarray
    v_raw: float
    v_sub: float
    c_far: float
    c_background: float


def _intensity_sigma(pulse_sigma_ps: float, sigma_is_fwhm: bool) -> float:
    return pulse_sigma_ps * FWHM_TO_SIGMA if sigma_is_fwhm else pulse_sigma_ps


def temporal_overlap(
    delay_ps: float,
    extra_drift_ps: float = 0.0,
    cycles: int = 0,
    gvd_ps2_per_cycle: float = 0.0,
    pulse_sigma_ps: float = 6.1,
    sigma_is_fwhm: bool = True,
) -> float:
    """Squared wave-packet overlap of two transform-limited Gaussian pulses.

    One packet is delayed by ``delay_ps + extra_drift_ps`` and carries the
    group-velocity dispersion accumulated over ``cycles`` storage cycles.
    Returns |<a|b>|^2 in [0, 1].
    """
    if pulse_sigma_ps <= 0:
        raise InterferenceError(f"pulse_sigma_ps must be > 0, got {pulse_sigma_ps}")
    sigma = _intensity_sigma(pulse_sigma_ps, sigma_is_fwhm)
    delta = delay_ps + extra_drift_ps
    # field E(t) ~ exp(-t^2 / (4 beta)); dispersion D adds -i D / 2 to beta
    beta_a = complex(sigma ** 2, -0.5 * cycles * gvd_ps2_per_cycle)
    beta_b = complex(sigma ** 2, 0.0)
    a = 1.0 / (4.0 * np.conj(beta_a))
    b = 1.0 / (4.0 * beta_b)
    integral = np.sqrt(np.pi / (a + b)) * np.exp(-a * b * delta ** 2 / (a + b))
    norm_a = math.sqrt(np.pi / (2.0 * (1.0 / (4.0 * beta_a)).real))
    norm_b = math.sqrt(np.pi / (2.0 * (1.0 / (4.0 * beta_b)).real))
    return float(min(1.0, abs(integral) ** 2 / (norm_a * norm_b)))


def _classical_coincidence(m: np.ndarray) -> np.ndarray:
    """P(both output detectors see light | m distinguishable photons)."""
    out = 1.0 - 2.0 * 0.5 ** m.astype(float)
    out[m < 2] = 0.0
    return out


def coincidence_components(
    dist_a: PhotonNumberDistribution,
    dist_b: PhotonNumberDistribution,
    eta_meas: float,
) -> tuple[float, float]:
    """(classical far-delay coincidence probability, interfering (1,1) weight).

    Measurement loss is applied to each input before the splitter; detectors
    after the splitter are then ideal buckets.
    """
    a = apply_loss(dist_a, eta_meas).probs
    b = apply_loss(dist_b, eta_meas).probs
    ma = np.arange(a.size)
    mb = np.arange(b.size)
    total = ma[:, None] + mb[None, :]
    weights = a[:, None] * b[None, :]
    c_far = float((weights * _classical_coincidence(total)).sum())
    c11 = float(a[1] * b[1] * 0.5)
    return c_far, c11


def hom_scan(cfg: HomConfig) -> HomResult:
    """Coincidence probability versus relative delay, with visibilities.

    The raw visibility compares the deepest scanned point against the
    infinite-delay (non-interfering) level; the subtracted visibility removes
    the delay-independent multi-photon background first.
    """
    c_far, c11 = coincidence_components(cfg.dist_a, cfg.dist_b, cfg.eta_meas)
    if c_far <= 0.0:
        nan = float("nan")
        flat = np.zeros_like(cfg.delay_scan_ps)
        return HomResult(cfg.delay_scan_ps, flat, flat, nan, nan, 0.0, 0.0)
    overlaps = np.array(
        [
            temporal_overlap(
                d,
                extra_drift_ps=cfg.drift_ps,
                cycles=cfg.gvd_cycles,
                gvd_ps2_per_cycle=cfg.gvd_ps2_per_cycle,
                pulse_sigma_ps=cfg.pulse_sigma_ps,
                sigma_is_fwhm=cfg.sigma_is_fwhm,
            )
            for d in cfg.delay_scan_ps
        ]
    )
    i_eff = cfg.indistinguishability * overlaps
    coincidences = c_far - i_eff * c11
    background = c_far - c11
    subtracted = np.array(
        [accidental_subtract(c, background) for c in coincidences]
    )
    c_dip = float(coincidences.min())
    v_raw = (c_far - c_dip) / c_far
    if c11 > 0.0:
        v_sub = (c11 - (c_dip - background)) / c11
    else:
        v_sub = float("nan")
    return HomResult(
        delays_ps=cfg.delay_scan_ps,
        coincidences=coincidences,
        coincidences_subtracted=subtracted,
        v_raw=float(v_raw),
        v_sub=float(v_sub),
        c_far=c_far,
        c_background=background,
    )


def reference_source_distribution(
    mu_ref: float, template: ExperimentConfig
) -> PhotonNumberDistribution:
    """Heralded output of the non-multiplexed reference source.

    Same trigger and static couplings as the multiplexed source, but no
    storage loop.
    """
    cfg = replace(
        template, mu=mu_ref, n_bins=1, loop_loss_per_cycle=0.0, cycle_offset=0,
        k_max=None,
    )
    _, cond = conditional_output_analytic(cfg)
    return cond


def multiplexed_source_distribution(cfg: ExperimentConfig) -> PhotonNumberDistribution:
    """Herald-conditioned output distribution of the multiplexed source."""
    _, cond = conditional_output_analytic(cfg)
    return cond


def hom_config_for(
    cfg: ExperimentConfig,
    mu_ref: float = 0.008,
    **overrides,
) -> HomConfig:
    """Assemble a HOM scan between a multiplexed source and its reference."""
    dist_a = multiplexed_source_distribution(cfg)
    dist_b = reference_source_distribution(mu_ref, cfg)
    kwargs = dict(
        dist_a=dist_a,
        dist_b=dist_b,
        eta_meas=cfg.meas.eta_effective,
        gvd_cycles=cfg.n_bins,
    )
    kwargs.update(overrides)
    return HomConfig(**kwargs)


def visibility_vs_mu(
    configs: list[ExperimentConfig],
    mu_ref: float = 0.008,
    **overrides,
) -> list[dict]:
    """Raw and background-subtracted visibility for each source setting."""
    if not configs:
        raise InterferenceError("need at least one scenario")
    rows = []
    for cfg in configs:
        res = hom_scan(hom_config_for(cfg, mu_ref=mu_ref, **overrides))
        rows.append({"mu": cfg.mu, "v_raw": res.v_raw, "v_sub": res.v_sub})
    return rows
