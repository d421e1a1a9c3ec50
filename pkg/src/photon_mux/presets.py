"""Named parameter presets and the frozen path calibration.

The delay-path budget published for the source pins the first-fiber coupling
(0.88), the loop loss (1.2 % per cycle) and the measurement transmission
(0.426), but not the fixed pre-delay fiber, loop injection, or output
shutter.  Those are identifiable only as a product, calibrated once so the
mu = 0.18, N = 40 configuration reproduces a fiber-coupled single-photon
probability of 0.667, and then frozen for every other scenario.  The frozen
value lives in ``CALIBRATED_DELAY_PRODUCT``; ``eta_predelay`` carries it and
``eta_shutter_out`` stays at 1.

Heralding in the paper-matched presets uses the exactly-one-click rule of
the four-detector cascade: the any-click rule cannot reproduce the measured
g2 levels or visibilities at any physical calibration (it also pushes the
calibrated product above 1).
"""

from __future__ import annotations

from .detectors import HeraldPolicy, MeasurementConfig, TriggerConfig
from .mux import ConfigError, ExperimentConfig, calibrate_delay_product

# Product eta_predelay * eta_shutter_out solving P1(mu=0.18, N=40) = 0.667
# under the frozen trigger budget 0.84 * 0.62.  Recompute with
# ``recalibrate()``; tests assert the frozen value still solves the target.
CALIBRATED_DELAY_PRODUCT = 0.9707453534363805

CALIBRATION_MU = 0.18
CALIBRATION_N_BINS = 40
CALIBRATION_TARGET_P1 = 0.667


def _paper_trigger() -> dict:
    return {
        "trigger.cascade_size": 4,
        "trigger.eta_det": 0.62,
        "trigger.eta_idler": 0.84,
        "trigger.policy": "exactly_one",
        "trigger.dark_count_prob_per_bin": 0.0,
    }


def _paper_common() -> dict:
    common = {
        "n_bins": 40,
        "tau_ns": 10.0,
        "rep_rate_hz": 5e5,
        "eta_signal_coupling": 0.88,
        "eta_predelay": CALIBRATED_DELAY_PRODUCT,
        "eta_shutter_out": 1.0,
        "loop_loss_per_cycle": 0.012,
        "cycle_offset": 0,
        "k_max": "auto",
        "meas.eta_meas": 0.426,
        "meas.eta_det_meas": 1.0,
        "hom.mu_ref": 0.008,
        "hom.indistinguishability": 0.91,
        "hom.pulse_sigma_ps": 6.1,
        "hom.gvd_ps2_per_cycle": 1.2e-3,
        "hom.drift_ps": 0.01,
        "hom.delay_min_ps": -30.0,
        "hom.delay_max_ps": 30.0,
        "hom.delay_points": 61,
    }
    common.update(_paper_trigger())
    return common


def _preset_mu(mu: float) -> dict:
    d = _paper_common()
    d["mu"] = mu
    return d


def _preset_improvement() -> dict:
    """Upgraded-hardware scenario: faster repetition, near-unit trigger
    detectors, halved loop loss.  Lands near P1 = 0.75 with g2 = 0.05."""
    d = _paper_common()
    d.update(
        {
            "mu": 0.07,
            "rep_rate_hz": 5e6,
            "trigger.eta_det": 0.95,
            "trigger.eta_idler": 0.95,
            "eta_signal_coupling": 0.93,
            "eta_predelay": 0.96,
            "loop_loss_per_cycle": 0.005,
            "hom.indistinguishability": 0.98,
        }
    )
    return d


def preset(name: str) -> dict:
    """Flat key table for a named preset."""
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(_PRESETS))}"
        ) from None
    return factory()


_PRESETS = {
    "mu018": lambda: _preset_mu(0.18),
    "mu005": lambda: _preset_mu(0.05),
    "mu0004": lambda: _preset_mu(0.004),
    "improvement": _preset_improvement,
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def recalibrate() -> float:
    """Re-derive the frozen delay product from scratch."""
    template = ExperimentConfig(
        mu=CALIBRATION_MU,
        n_bins=CALIBRATION_N_BINS,
        trigger=TriggerConfig(policy=HeraldPolicy.EXACTLY_ONE),
        meas=MeasurementConfig(),
    )
    return calibrate_delay_product(template, target_p1=CALIBRATION_TARGET_P1)
