import itertools
import math

import numpy as np
import pytest

from photon_mux.detectors import (
    DetectorError,
    HeraldPolicy,
    MeasurementConfig,
    TriggerConfig,
    bucket_click_prob,
    cascade_click_distribution,
    click_count_pmf,
    herald,
)
from photon_mux.photon_stats import fock, thermal_pmf, vacuum


def brute_force_click_pmf(k, cfg):
    """Enumerate every routing and detection outcome of k idler photons.

    Each photon is registered (passes the idler path and fires its detector)
    with probability eta_idler * eta_det and lands on one of the cascade
    detectors uniformly; a detector clicks when it holds a registered photon.
    """
    n = cfg.cascade_size
    eta = cfg.eta_idler * cfg.eta_det
    pmf = np.zeros(n + 1)
    for registered in itertools.product([0, 1], repeat=k):
        p_reg = math.prod(eta if r else 1 - eta for r in registered)
        live = sum(registered)
        for routing in itertools.product(range(n), repeat=live):
            pmf[len(set(routing))] += p_reg / n ** live
    return pmf


class TestBucketClickProb:
    def test_vacuum_never_clicks(self):
        assert bucket_click_prob(vacuum(), 0.9) == 0.0

    def test_single_photon(self):
        assert bucket_click_prob(fock(1), 0.62) == pytest.approx(0.62)

    @pytest.mark.parametrize("mu,eta", [(0.18, 0.52), (0.05, 0.9), (0.7, 0.3)])
    def test_thermal_geometric_closed_form(self, mu, eta):
        # direct summation oracle against mu*eta / (1 + mu*eta)
        direct = bucket_click_prob(thermal_pmf(mu), eta)
        assert direct == pytest.approx(mu * eta / (1 + mu * eta), abs=1e-9)

    def test_paper_scale_value(self):
        assert bucket_click_prob(thermal_pmf(0.18), 0.52) == pytest.approx(
            0.0856, abs=1e-4
        )


class TestClickCountPmf:
    @pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
    def test_matches_exhaustive_enumeration(self, k):
        cfg = TriggerConfig()
        np.testing.assert_allclose(
            click_count_pmf(k, cfg), brute_force_click_pmf(k, cfg), atol=1e-12
        )

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_matches_enumeration_small_cascade(self, k):
        cfg = TriggerConfig(cascade_size=2, eta_det=0.8, eta_idler=0.7)
        np.testing.assert_allclose(
            click_count_pmf(k, cfg), brute_force_click_pmf(k, cfg), atol=1e-12
        )

    def test_two_photon_double_click(self):
        # both photons register (0.62^2) and land on distinct detectors (3/4)
        cfg = TriggerConfig(eta_idler=1.0)
        assert click_count_pmf(2, cfg)[2] == pytest.approx(0.75 * 0.62 ** 2, abs=1e-12)
        assert click_count_pmf(2, cfg)[2] == pytest.approx(0.288, abs=5e-4)

    def test_exactly_one_closed_form(self):
        # independent route: P(all registered photons share a detector)
        #   = n [(1 - eta (n-1)/n)^k - (1 - eta)^k]
        cfg = TriggerConfig()
        eta, n = cfg.eta_trigger, cfg.cascade_size
        for k in range(8):
            expected = n * ((1 - eta * (n - 1) / n) ** k - (1 - eta) ** k)
            assert click_count_pmf(k, cfg)[1] == pytest.approx(expected, abs=1e-12)

    def test_dark_counts_shift_distribution(self):
        cfg = TriggerConfig(dark_count_prob_per_bin=0.05)
        pmf = click_count_pmf(0, cfg)
        # with no photons the click count is Binomial(4, 0.05)
        for c in range(5):
            assert pmf[c] == pytest.approx(
                math.comb(4, c) * 0.05 ** c * 0.95 ** (4 - c), abs=1e-12
            )


class TestCascadeMonteCarlo:
    def test_zero_photons_zero_clicks(self):
        rng = np.random.default_rng(0)
        assert cascade_click_distribution(0, TriggerConfig(), rng) == 0

    def test_single_photon_click_rate(self):
        cfg = TriggerConfig(eta_idler=1.0)
        rng = np.random.default_rng(1)
        draws = cascade_click_distribution(1, cfg, rng, size=200_000)
        rate = (draws == 1).mean()
        se = math.sqrt(0.62 * 0.38 / draws.size)
        assert abs(rate - 0.62) < 3 * se

    @pytest.mark.parametrize("k", [1, 2, 4])
    def test_draws_match_exact_pmf(self, k):
        cfg = TriggerConfig()
        rng = np.random.default_rng(2)
        draws = cascade_click_distribution(k, cfg, rng, size=300_000)
        pmf = click_count_pmf(k, cfg)
        for c in range(cfg.cascade_size + 1):
            p = pmf[c]
            se = math.sqrt(max(p * (1 - p), 1e-12) / draws.size)
            assert abs((draws == c).mean() - p) < 4 * se

    def test_clicks_bounded_by_photons_and_detectors(self):
        cfg = TriggerConfig()
        rng = np.random.default_rng(3)
        for k in (0, 1, 3, 9):
            draws = cascade_click_distribution(k, cfg, rng, size=20_000)
            assert draws.max() <= min(cfg.cascade_size, k) if k else draws.max() == 0

    def test_any_click_marginal_equals_bucket_model(self):
        # splitting one bucket across detectors preserves the no-click prob
        cfg = TriggerConfig()
        dist = thermal_pmf(0.18)
        rng = np.random.default_rng(4)
        n_trials = 1_000_000
        ks = rng.choice(np.arange(dist.k_max + 1), p=dist.probs, size=n_trials)
        clicked = np.zeros(n_trials, dtype=bool)
        for k in np.unique(ks):
            sel = ks == k
            draws = cascade_click_distribution(int(k), cfg, rng, size=int(sel.sum()))
            clicked[sel] = draws >= 1
        expected = bucket_click_prob(dist, cfg.eta_trigger)
        se = math.sqrt(expected * (1 - expected) / n_trials)
        assert abs(clicked.mean() - expected) < 3 * se


class TestHeraldPolicy:
    @pytest.mark.parametrize(
        "clicks,policy,expected",
        [
            (0, HeraldPolicy.ANY_CLICK, False),
            (1, HeraldPolicy.ANY_CLICK, True),
            (2, HeraldPolicy.ANY_CLICK, True),
            (0, HeraldPolicy.EXACTLY_ONE, False),
            (1, HeraldPolicy.EXACTLY_ONE, True),
            (2, HeraldPolicy.EXACTLY_ONE, False),
        ],
    )
    def test_decision_table(self, clicks, policy, expected):
        assert herald(clicks, policy) is expected

    @pytest.mark.parametrize("mu", [0.01, 0.1, 0.5])
    def test_exactly_one_rate_never_above_any_click(self, mu):
        cfg = TriggerConfig()
        dist = thermal_pmf(mu)
        p_any = sum(
            dist.probs[k] * click_count_pmf(k, cfg)[1:].sum()
            for k in range(dist.k_max + 1)
        )
        p_one = sum(
            dist.probs[k] * click_count_pmf(k, cfg)[1]
            for k in range(dist.k_max + 1)
        )
        assert p_one <= p_any + 1e-15


class TestConfigValidation:
    def test_trigger_rejects_bad_efficiency(self):
        with pytest.raises(DetectorError):
            TriggerConfig(eta_det=1.5)

    def test_trigger_rejects_empty_cascade(self):
        with pytest.raises(DetectorError):
            TriggerConfig(cascade_size=0)

    def test_effective_trigger_efficiency(self):
        assert TriggerConfig().eta_trigger == pytest.approx(0.84 * 0.62)

    def test_measurement_defaults(self):
        assert MeasurementConfig().eta_effective == pytest.approx(0.426)
