import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from photon_mux.estimators import expected_counts
from photon_mux.interference import (
    FWHM_TO_SIGMA,
    HomConfig,
    InterferenceError,
    coincidence_components,
    hom_config_for,
    hom_scan,
    multiplexed_source_distribution,
    reference_source_distribution,
    temporal_overlap,
    visibility_vs_mu,
)
from photon_mux.photon_stats import convolve, fock, vacuum


def overlap_by_quadrature(delay, cycles, gvd, sigma_fwhm):
    """Numerical wave-packet overlap for dispersed Gaussian fields."""
    sigma = sigma_fwhm * FWHM_TO_SIGMA
    beta_a = complex(sigma ** 2, -0.5 * cycles * gvd)
    beta_b = complex(sigma ** 2, 0.0)

    def field(t, beta, shift=0.0):
        return np.exp(-((t - shift) ** 2) / (4.0 * beta))

    span = 60.0 * sigma
    re = quad(lambda t: (np.conj(field(t, beta_a)) * field(t, beta_b, delay)).real,
              -span, span, limit=400)[0]
    im = quad(lambda t: (np.conj(field(t, beta_a)) * field(t, beta_b, delay)).imag,
              -span, span, limit=400)[0]
    na = quad(lambda t: abs(field(t, beta_a)) ** 2, -span, span, limit=400)[0]
    nb = quad(lambda t: abs(field(t, beta_b)) ** 2, -span, span, limit=400)[0]
    return (re ** 2 + im ** 2) / (na * nb)


class TestTemporalOverlap:
    def test_identical_packets(self):
        assert temporal_overlap(0.0, 0.0, 0, 0.0, 6.1) == pytest.approx(1.0, abs=1e-12)

    def test_large_delay_vanishes(self):
        assert temporal_overlap(1e4, pulse_sigma_ps=6.1) < 1e-12

    def test_published_drift_is_negligible(self):
        # 0.01 ps offset against a 6.1 ps pulse with 40 cycles of dispersion
        ov = temporal_overlap(
            0.01, cycles=40, gvd_ps2_per_cycle=1.2e-3, pulse_sigma_ps=6.1
        )
        assert ov > 0.999

    @pytest.mark.parametrize(
        "delay,cycles,gvd",
        [(0.0, 0, 0.0), (2.0, 0, 0.0), (1.0, 40, 1.2e-3), (5.0, 83, 1.2e-3),
         (0.3, 40, 0.5)],
    )
    def test_closed_form_matches_quadrature(self, delay, cycles, gvd):
        closed = temporal_overlap(
            delay, cycles=cycles, gvd_ps2_per_cycle=gvd, pulse_sigma_ps=6.1
        )
        numeric = overlap_by_quadrature(delay, cycles, gvd, 6.1)
        assert closed == pytest.approx(numeric, abs=1e-9)

    def test_gaussian_delay_law_without_dispersion(self):
        sigma = 6.1 * FWHM_TO_SIGMA
        for delay in (0.5, 2.0, 7.0):
            expected = math.exp(-(delay ** 2) / (4.0 * sigma ** 2))
            assert temporal_overlap(delay, pulse_sigma_ps=6.1) == pytest.approx(
                expected, rel=1e-12
            )

    def test_invalid_sigma_rejected(self):
        with pytest.raises(InterferenceError):
            temporal_overlap(0.0, pulse_sigma_ps=0.0)


class TestHomScan:
    def test_ideal_single_photons_full_dip(self):
        cfg = HomConfig(
            dist_a=fock(1), dist_b=fock(1), indistinguishability=1.0,
            drift_ps=0.0, gvd_cycles=0, eta_meas=1.0,
        )
        res = hom_scan(cfg)
        assert res.v_raw == pytest.approx(1.0, abs=1e-9)
        assert min(res.coincidences) == pytest.approx(0.0, abs=1e-12)

    def test_fully_distinguishable_flat(self):
        cfg = HomConfig(
            dist_a=fock(1), dist_b=fock(1), indistinguishability=0.0,
            drift_ps=0.0, eta_meas=1.0,
        )
        res = hom_scan(cfg)
        assert res.v_raw == pytest.approx(0.0, abs=1e-12)

    def test_vacuum_partner_gives_flat_scan(self, cfg_mu018):
        dist_a = multiplexed_source_distribution(cfg_mu018)
        cfg = HomConfig(dist_a=dist_a, dist_b=vacuum(dist_a.k_max))
        res = hom_scan(cfg)
        assert np.ptp(res.coincidences) == pytest.approx(0.0, abs=1e-15)
        assert res.v_raw == pytest.approx(0.0, abs=1e-12)

    def test_all_vacuum_inputs_undefined(self):
        res = hom_scan(HomConfig(dist_a=vacuum(), dist_b=vacuum()))
        assert math.isnan(res.v_raw)
        assert math.isnan(res.v_sub)

    def test_far_point_consistent_with_count_model(self, cfg_mu018):
        # classical (non-interfering) coincidence level must equal the
        # splitter count model applied to the merged distribution
        dist_a = multiplexed_source_distribution(cfg_mu018)
        dist_b = reference_source_distribution(0.008, cfg_mu018)
        eta = cfg_mu018.meas.eta_effective
        c_far, _ = coincidence_components(dist_a, dist_b, eta)
        merged = convolve(dist_a, dist_b)
        counts = expected_counts(merged, 1.0, eta)
        assert c_far == pytest.approx(counts.c_hz, abs=1e-9)

    def test_subtraction_recovers_indistinguishability(self, cfg_mu018):
        res = hom_scan(hom_config_for(cfg_mu018))
        assert res.v_sub == pytest.approx(
            0.91 * temporal_overlap(0.0, 0.01, 40, 1.2e-3, 6.1), abs=1e-9
        )

    def test_raw_visibility_bounded_by_indistinguishability(self, preset_cfgs):
        for cfg in preset_cfgs.values():
            res = hom_scan(hom_config_for(cfg))
            assert res.v_raw <= 0.91 + 1e-12

    def test_subtracted_never_below_raw(self, preset_cfgs):
        for cfg in preset_cfgs.values():
            res = hom_scan(hom_config_for(cfg))
            assert res.v_sub >= res.v_raw - 1e-12


class TestVisibilityVsMu:
    def test_monotone_decrease_with_mu(self, cfg_mu018):
        mus = [0.004, 0.02, 0.05, 0.1, 0.18, 0.3]
        rows = visibility_vs_mu([replace(cfg_mu018, mu=m) for m in mus])
        v = [row["v_raw"] for row in rows]
        assert all(a >= b - 1e-12 for a, b in zip(v, v[1:]))

    def test_monotone_in_reference_mu(self, cfg_mu018):
        v = []
        for mu_ref in (0.001, 0.008, 0.05):
            res = hom_scan(hom_config_for(cfg_mu018, mu_ref=mu_ref))
            v.append(res.v_raw)
        assert all(a >= b - 1e-12 for a, b in zip(v, v[1:]))

    def test_low_mu_limit_approaches_indistinguishability(self, cfg_mu018):
        # both sources pushed to vanishing pair number
        cfg = replace(cfg_mu018, mu=1e-6)
        res = hom_scan(hom_config_for(cfg, mu_ref=1e-6))
        assert res.v_raw == pytest.approx(0.91, abs=0.005)

    def test_empty_scenarios_rejected(self):
        with pytest.raises(InterferenceError):
            visibility_vs_mu([])
