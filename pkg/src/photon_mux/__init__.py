"""Simulator and analysis library for time-multiplexed heralded single-photon
sources: heralding probability, fiber-coupled single-photon probability,
multi-photon contamination, and two-photon interference visibility from a
physical parameter budget."""

__version__ = "0.1.0"

from .detectors import (
    HeraldPolicy,
    MeasurementConfig,
    TriggerConfig,
    bucket_click_prob,
    cascade_click_distribution,
    click_count_pmf,
    herald,
)
from .estimators import (
    CountRates,
    accidental_subtract,
    estimate_g2,
    estimate_g2_heralded,
    estimate_p1,
    estimate_ph,
    expected_counts,
    predict_counts,
)
from .interference import (
    HomConfig,
    HomResult,
    hom_config_for,
    hom_scan,
    temporal_overlap,
    visibility_vs_mu,
)
from .mux import (
    ConfigError,
    ExperimentConfig,
    SimResult,
    TrialRecord,
    analyze,
    calibrate_delay_product,
    loop_lifetime_cycles,
    multiplexed_heralding_prob,
    output_distribution_analytic,
    per_bin_herald_prob,
    simulate_trials,
)
from .photon_stats import (
    PhotonNumberDistribution,
    apply_loss,
    mean_and_g2,
    split_balanced,
    thermal_pmf,
)
from .predictor import (
    OptimizeResult,
    SourceFigures,
    build_comparison_table,
    coincidence_rate,
    load_reference_sources,
    optimize_mu_n,
    this_work_figures,
)
from .presets import CALIBRATED_DELAY_PRODUCT, PRESET_NAMES, preset, recalibrate
from .temporal_checks import DelayLineSpec, dispersion_broadening, health_report, survival_after_cycles

__all__ = [
    "CALIBRATED_DELAY_PRODUCT",
    "ConfigError",
    "CountRates",
    "DelayLineSpec",
    "ExperimentConfig",
    "HeraldPolicy",
    "HomConfig",
    "HomResult",
    "MeasurementConfig",
    "OptimizeResult",
    "PhotonNumberDistribution",
    "PRESET_NAMES",
    "SimResult",
    "SourceFigures",
    "TriggerConfig",
    "TrialRecord",
    "accidental_subtract",
    "analyze",
    "apply_loss",
    "bucket_click_prob",
    "build_comparison_table",
    "calibrate_delay_product",
    "cascade_click_distribution",
    "click_count_pmf",
    "coincidence_rate",
    "dispersion_broadening",
    "estimate_g2",
    "estimate_g2_heralded",
    "estimate_p1",
    "estimate_ph",
    "expected_counts",
    "health_report",
    "herald",
    "hom_config_for",
    "hom_scan",
    "load_reference_sources",
    "loop_lifetime_cycles",
    "mean_and_g2",
    "multiplexed_heralding_prob",
    "optimize_mu_n",
    "output_distribution_analytic",
    "per_bin_herald_prob",
    "predict_counts",
    "preset",
    "recalibrate",
    "simulate_trials",
    "split_balanced",
    "survival_after_cycles",
    "temporal_overlap",
    "thermal_pmf",
    "this_work_figures",
    "visibility_vs_mu",
]
