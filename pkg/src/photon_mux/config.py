"""Flat key-value configuration: parsing, validation, and hashing.

Config files are plain ``key = value`` lines with ``#`` comments; nested
structure is spelled with dotted namespaces (``trigger.eta_det``) so files
stay diff-friendly.  Every key is validated against the table below; unknown
keys are errors, not warnings.  Rates are always Hz and times carry their
unit in the key suffix -- no implicit conversion anywhere.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .detectors import HeraldPolicy, MeasurementConfig, TriggerConfig
from .mux import ConfigError, ExperimentConfig
from .presets import PRESET_NAMES, preset


@dataclass(frozen=True)
class HomSettings:
    """Interference-scan parameters carried alongside the experiment config."""

    mu_ref: float = 0.008
    indistinguishability: float = 0.91
    pulse_sigma_ps: float = 6.1
    gvd_ps2_per_cycle: float = 1.2e-3
    drift_ps: float = 0.01
    delay_min_ps: float = -30.0
    delay_max_ps: float = 30.0
    delay_points: int = 61

    def delay_scan(self) -> np.ndarray:
        return np.linspace(self.delay_min_ps, self.delay_max_ps, self.delay_points)


def _parse_policy(raw: str):
    try:
        return HeraldPolicy(raw)
    except ValueError:
        valid = ", ".join(p.value for p in HeraldPolicy)
        raise ConfigError(f"trigger.policy must be one of {valid}, got {raw!r}") from None


def _parse_k_max(raw):
    if isinstance(raw, str) and raw.strip().lower() == "auto":
        return None
    return int(raw)


def _in_unit(lo=0.0, hi=1.0):
    def check(key, v):
        if not lo <= v <= hi:
            raise ConfigError(f"{key} must lie in [{lo}, {hi}], got {v}")

    return check


def _positive(key, v):
    if v <= 0:
        raise ConfigError(f"{key} must be > 0, got {v}")


def _non_negative(key, v):
    if v < 0:
        raise ConfigError(f"{key} must be >= 0, got {v}")


def _at_least_one(key, v):
    if v < 1:
        raise ConfigError(f"{key} must be >= 1, got {v}")


def _no_check(key, v):
    return None


# key -> (parser, range check)
KEY_SPECS = {
    "mu": (float, _non_negative),
    "n_bins": (int, _at_least_one),
    "tau_ns": (float, _positive),
    "rep_rate_hz": (float, _positive),
    "eta_signal_coupling": (float, _in_unit()),
    "eta_predelay": (float, _in_unit()),
    "eta_shutter_out": (float, _in_unit()),
    "loop_loss_per_cycle": (float, _in_unit(0.0, 0.999999)),
    "cycle_offset": (int, _non_negative),
    "k_max": (_parse_k_max, _no_check),
    "trigger.cascade_size": (int, _at_least_one),
    "trigger.eta_det": (float, _in_unit()),
    "trigger.eta_idler": (float, _in_unit()),
    "trigger.policy": (_parse_policy, _no_check),
    "trigger.dark_count_prob_per_bin": (float, _in_unit()),
    "meas.eta_meas": (float, _in_unit()),
    "meas.eta_det_meas": (float, _in_unit()),
    "hom.mu_ref": (float, _non_negative),
    "hom.indistinguishability": (float, _in_unit()),
    "hom.pulse_sigma_ps": (float, _positive),
    "hom.gvd_ps2_per_cycle": (float, _non_negative),
    "hom.drift_ps": (float, _no_check),
    "hom.delay_min_ps": (float, _no_check),
    "hom.delay_max_ps": (float, _no_check),
    "hom.delay_points": (int, _at_least_one),
}

SWEEPABLE_KEYS = (
    "n_bins",
    "mu",
    "loop_loss_per_cycle",
    "eta_signal_coupling",
    "eta_predelay",
    "eta_shutter_out",
    "cycle_offset",
    "rep_rate_hz",
    "trigger.eta_det",
    "trigger.eta_idler",
    "meas.eta_meas",
)


def _coerce(key: str, raw) -> object:
    try:
        parser, check = KEY_SPECS[key]
    except KeyError:
        raise ConfigError(f"unknown config key {key!r}") from None
    if isinstance(raw, str):
        raw = raw.strip()
    try:
        value = parser(raw)
    except ConfigError:
        raise
    except (TypeError, ValueError):
        raise ConfigError(f"could not parse value {raw!r} for key {key!r}") from None
    check(key, value)
    return value


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; comments and blank lines are skipped."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        values[key] = _coerce(key, raw)
    return values


def library_defaults() -> dict:
    """Default value for every config key (the dataclass defaults)."""
    exp = ExperimentConfig()
    hom = HomSettings()
    return {
        "mu": exp.mu,
        "n_bins": exp.n_bins,
        "tau_ns": exp.tau_ns,
        "rep_rate_hz": exp.rep_rate_hz,
        "eta_signal_coupling": exp.eta_signal_coupling,
        "eta_predelay": exp.eta_predelay,
        "eta_shutter_out": exp.eta_shutter_out,
        "loop_loss_per_cycle": exp.loop_loss_per_cycle,
        "cycle_offset": exp.cycle_offset,
        "k_max": exp.k_max,
        "trigger.cascade_size": exp.trigger.cascade_size,
        "trigger.eta_det": exp.trigger.eta_det,
        "trigger.eta_idler": exp.trigger.eta_idler,
        "trigger.policy": exp.trigger.policy,
        "trigger.dark_count_prob_per_bin": exp.trigger.dark_count_prob_per_bin,
        "meas.eta_meas": exp.meas.eta_meas,
        "meas.eta_det_meas": exp.meas.eta_det_meas,
        "hom.mu_ref": hom.mu_ref,
        "hom.indistinguishability": hom.indistinguishability,
        "hom.pulse_sigma_ps": hom.pulse_sigma_ps,
        "hom.gvd_ps2_per_cycle": hom.gvd_ps2_per_cycle,
        "hom.drift_ps": hom.drift_ps,
        "hom.delay_min_ps": hom.delay_min_ps,
        "hom.delay_max_ps": hom.delay_max_ps,
        "hom.delay_points": hom.delay_points,
    }


def load_config(path_or_preset: str, overrides: list[str] | None = None) -> dict:
    """Effective flat config from a preset name or file, plus overrides.

    Missing keys take the library defaults; overrides are ``key=value``
    strings applied last.
    """
    if path_or_preset in PRESET_NAMES:
        values = {k: _coerce(k, v) for k, v in preset(path_or_preset).items()}
    else:
        try:
            with open(path_or_preset, "r") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(
                f"config {path_or_preset!r} is neither a preset "
                f"({', '.join(PRESET_NAMES)}) nor a readable file: {exc}"
            ) from None
        values = parse_config_text(text)
    base = library_defaults()
    base.update(values)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, raw = (part.strip() for part in item.split("=", 1))
        base[key] = _coerce(key, raw)
    return base


def to_experiment_config(values: dict) -> ExperimentConfig:
    trigger = TriggerConfig(
        cascade_size=values["trigger.cascade_size"],
        eta_det=values["trigger.eta_det"],
        eta_idler=values["trigger.eta_idler"],
        policy=values["trigger.policy"],
        dark_count_prob_per_bin=values["trigger.dark_count_prob_per_bin"],
    )
    meas = MeasurementConfig(
        eta_meas=values["meas.eta_meas"],
        eta_det_meas=values["meas.eta_det_meas"],
    )
    return ExperimentConfig(
        mu=values["mu"],
        n_bins=values["n_bins"],
        tau_ns=values["tau_ns"],
        rep_rate_hz=values["rep_rate_hz"],
        trigger=trigger,
        eta_signal_coupling=values["eta_signal_coupling"],
        eta_predelay=values["eta_predelay"],
        loop_loss_per_cycle=values["loop_loss_per_cycle"],
        eta_shutter_out=values["eta_shutter_out"],
        meas=meas,
        cycle_offset=values["cycle_offset"],
        k_max=values["k_max"],
    )


def to_hom_settings(values: dict) -> HomSettings:
    return HomSettings(
        mu_ref=values["hom.mu_ref"],
        indistinguishability=values["hom.indistinguishability"],
        pulse_sigma_ps=values["hom.pulse_sigma_ps"],
        gvd_ps2_per_cycle=values["hom.gvd_ps2_per_cycle"],
        drift_ps=values["hom.drift_ps"],
        delay_min_ps=values["hom.delay_min_ps"],
        delay_max_ps=values["hom.delay_max_ps"],
        delay_points=values["hom.delay_points"],
    )


def _canonical_value(value) -> str:
    if isinstance(value, HeraldPolicy):
        return value.value
    if value is None:
        return "auto"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_hash(values: dict) -> str:
    """Stable hash of the effective parameters; changes iff any value does."""
    lines = "\n".join(
        f"{key}={_canonical_value(values[key])}" for key in sorted(values)
    )
    return hashlib.sha256(lines.encode()).hexdigest()[:16]
