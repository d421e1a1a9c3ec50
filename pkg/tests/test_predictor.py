import math
from dataclasses import replace

import numpy as np
import pytest

from photon_mux.detectors import HeraldPolicy, TriggerConfig
from photon_mux.mux import analyze
from photon_mux.predictor import (
    PredictorError,
    SourceFigures,
    build_comparison_table,
    coincidence_rate,
    load_reference_sources,
    optimize_mu_n,
    this_work_figures,
)


class TestCoincidenceRate:
    def test_single_fold_is_rate_times_p1(self):
        assert coincidence_rate(0.42, 5e5, 1) == pytest.approx(0.42 * 5e5)

    def test_ten_fold_scale(self):
        # ~1e4 per second for the flagship operating point
        c10 = coincidence_rate(0.667, 5e5, 10)
        assert c10 == pytest.approx(0.667 ** 10 * 5e5, rel=1e-12)
        assert 3.5 <= math.log10(c10) <= 4.5

    def test_thirty_fold_scale(self):
        c30 = coincidence_rate(0.667, 5e5, 30)
        assert -0.5 <= math.log10(c30) <= 0.5

    def test_strictly_decreasing_in_folds(self):
        rates = [coincidence_rate(0.7, 1e6, m) for m in range(1, 31)]
        assert all(a > b for a, b in zip(rates, rates[1:]))

    def test_strictly_increasing_in_p1(self):
        rates = [coincidence_rate(p, 1e6, 10) for p in np.linspace(0.1, 0.9, 17)]
        assert all(a < b for a, b in zip(rates, rates[1:]))

    def test_invalid_fold_rejected(self):
        with pytest.raises(PredictorError):
            coincidence_rate(0.5, 1e6, 0)


class TestComparisonTable:
    def test_reference_rows_load(self):
        rows = load_reference_sources()
        labels = {r.label for r in rows}
        assert "wang2017_qd" in labels
        assert len(rows) == 7

    def test_literature_row_order_of_magnitude(self):
        # the brightest quantum-dot entry predicts ~1e3 ten-fold coincidences
        row = next(r for r in load_reference_sources() if r.label == "wang2017_qd")
        c10 = coincidence_rate(row.p_1, row.r_hz, 10)
        assert 2.5 <= math.log10(c10) <= 3.5

    def test_live_row_uses_engine(self, cfg_mu018):
        row = this_work_figures(cfg_mu018)
        res = analyze(cfg_mu018)
        assert row.p_1 == res.p_1
        assert row.g2 == res.g2_est

    def test_table_attaches_folds(self, cfg_mu018):
        rows = load_reference_sources() + [this_work_figures(cfg_mu018)]
        table = build_comparison_table(rows, [1, 10, 30])
        for entry in table:
            assert entry["c_1_hz"] == pytest.approx(entry["p_1"] * entry["r_hz"])
            assert entry["c_30_hz"] == pytest.approx(
                entry["p_1"] ** 30 * entry["r_hz"], rel=1e-12
            )

    def test_empty_rows_rejected(self):
        with pytest.raises(PredictorError):
            build_comparison_table([], [10])

    def test_source_figures_validation(self):
        with pytest.raises(PredictorError):
            SourceFigures("x", "spdc", 1e6, 1.2, 0.1, 0.9)


class TestOptimizer:
    def test_unconstrained_hits_upper_bounds(self, cfg_mu018):
        res = optimize_mu_n(cfg_mu018, g2_max=1e9, n_max=12,
                            coarse_mu_points=12, refine_iterations=20)
        assert res.feasible
        assert res.n_bins == 12
        assert res.mu == pytest.approx(1.0, rel=1e-6)

    def test_tight_constraint_pushes_mu_down(self, cfg_mu018):
        loose = optimize_mu_n(cfg_mu018, g2_max=0.3, n_max=10,
                              coarse_mu_points=12, refine_iterations=20)
        tight = optimize_mu_n(cfg_mu018, g2_max=0.03, n_max=10,
                              coarse_mu_points=12, refine_iterations=20)
        assert tight.feasible and loose.feasible
        assert tight.mu < loose.mu
        assert tight.p_1 < loose.p_1

    def test_infeasible_is_explicit(self, cfg_mu018):
        res = optimize_mu_n(cfg_mu018, g2_max=1e-9, n_max=5,
                            coarse_mu_points=8, refine_iterations=5)
        assert not res.feasible
        assert res.mu is None and res.p_1 is None

    def test_paper_scale_constraint(self, cfg_mu018):
        # capping multi-photon noise at the mid scenario's level lands near
        # the mid scenario's operating point
        res = optimize_mu_n(cfg_mu018, g2_max=0.09, n_max=40,
                            coarse_mu_points=25, refine_iterations=30)
        assert res.feasible
        assert res.n_bins == 40
        assert 0.03 <= res.mu <= 0.06
        assert res.p_1 == pytest.approx(0.41, abs=0.04)
        assert res.g2 <= 0.09 + 1e-9

    def test_result_on_frontier_against_grid_oracle(self, cfg_mu018):
        # exhaustive fine-grid evaluation: no feasible point may beat the
        # optimizer's single-photon probability
        g2_max, n_max = 0.12, 8
        res = optimize_mu_n(cfg_mu018, g2_max=g2_max, n_max=n_max,
                            coarse_mu_points=15, refine_iterations=30)
        assert res.feasible
        best = 0.0
        for mu in np.geomspace(1e-3, 1.0, 120):
            for n in range(1, n_max + 1):
                point = analyze(replace(cfg_mu018, mu=float(mu), n_bins=n, k_max=None))
                if not math.isnan(point.g2_est) and point.g2_est <= g2_max:
                    best = max(best, point.p_1)
        assert res.p_1 >= best - 1e-9

    def test_exactly_one_beats_any_click_on_noise(self, cfg_mu018):
        # swapping in click-count information cuts g2 by far more than it
        # costs in single-photon probability
        for mu in (0.05, 0.18):
            e1 = analyze(replace(cfg_mu018, mu=mu))
            any_click = analyze(
                replace(
                    cfg_mu018,
                    mu=mu,
                    trigger=TriggerConfig(policy=HeraldPolicy.ANY_CLICK),
                )
            )
            g2_drop = (any_click.g2_est - e1.g2_est) / any_click.g2_est
            p1_drop = (any_click.p_1 - e1.p_1) / any_click.p_1
            assert g2_drop > 0
            assert p1_drop < g2_drop

    def test_invalid_constraint_rejected(self, cfg_mu018):
        with pytest.raises(PredictorError):
            optimize_mu_n(cfg_mu018, g2_max=0.0, n_max=5)
