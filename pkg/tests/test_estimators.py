import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from triplet_portfolio import (
    DfaHurstEstimator,
    TripletPortfolioAnalyzer,
    estimate_hurst,
    generate_fbm_increments,
)


class TestDfaHurstEstimator:
    def test_get_set_params_round_trip(self):
        est = DfaHurstEstimator(poly_order=2, min_scale=8)
        params = est.get_params()
        assert params["poly_order"] == 2
        assert params["min_scale"] == 8
        est.set_params(scale_count=12)
        assert est.scale_count == 12

    def test_clone(self):
        est = DfaHurstEstimator(poly_order=2, min_scale=8)
        twin = clone(est)
        assert twin.get_params() == est.get_params()

    def test_fit_single_series_matches_function(self):
        x = generate_fbm_increments(0.6, 1024, seed=2)
        est = DfaHurstEstimator().fit(x)
        direct = estimate_hurst(x)
        assert est.hurst_ == direct.hurst
        assert est.intercept_ == direct.intercept
        assert est.regime_ == direct.regime
        assert est.n_features_in_ == 1

    def test_fit_columns(self):
        cols = np.column_stack(
            [generate_fbm_increments(h, 1024, seed=3) for h in (0.3, 0.7)]
        )
        est = DfaHurstEstimator().fit(cols)
        assert est.hurst_.shape == (2,)
        assert est.hurst_[0] < est.hurst_[1]
        assert est.regime_ == ("anti-persistent", "persistent")
        assert len(est.results_) == 2

    def test_three_dimensional_input_rejected(self):
        with pytest.raises(ValueError, match="1-D or 2-D"):
            DfaHurstEstimator().fit(np.zeros((4, 4, 4)))


class TestTripletPortfolioAnalyzer:
    def test_fit_on_panel(self, demo_panel):
        analyzer = TripletPortfolioAnalyzer(interval_days=1, grid_resolution=50).fit(
            demo_panel
        )
        assert analyzer.n_assets_ == 3
        assert analyzer.stats_.interval_days == 1
        assert len(analyzer.grid_) == 1326
        assert analyzer.triangle_.w_r.as_array().sum() == pytest.approx(1.0)
        assert analyzer.pareto_.kkt_residuals.budget <= 1e-9

    def test_fit_on_price_array_matches_panel(self, demo_panel):
        a_panel = TripletPortfolioAnalyzer(grid_resolution=50).fit(demo_panel)
        a_array = TripletPortfolioAnalyzer(grid_resolution=50).fit(demo_panel.prices.T)
        np.testing.assert_array_equal(
            a_panel.stats_.mean_returns, a_array.stats_.mean_returns
        )
        np.testing.assert_array_equal(a_panel.stats_.hurst, a_array.stats_.hurst)
        np.testing.assert_array_equal(
            a_panel.triangle_.w_sigma.as_array(), a_array.triangle_.w_sigma.as_array()
        )

    def test_reported_weight_falls_back_when_analytic_infeasible(self, demo_panel):
        analyzer = TripletPortfolioAnalyzer(grid_resolution=50).fit(demo_panel)
        weight, label = analyzer.reported_weight()
        arr = weight.as_array()
        assert np.all(arr >= 0.0)
        assert abs(arr.sum() - 1.0) <= 1e-9
        if analyzer.pareto_.feasible_on_simplex:
            assert label == "analytic"
        else:
            assert label in ("numerical", "numerical-unconstrained")

    def test_not_fitted_error(self):
        with pytest.raises(NotFittedError):
            TripletPortfolioAnalyzer().reported_weight()

    def test_clone_and_params(self):
        analyzer = TripletPortfolioAnalyzer(interval_days=3, risk_aversion=2.0)
        twin = clone(analyzer)
        assert twin.get_params()["interval_days"] == 3
        assert twin.get_params()["risk_aversion"] == 2.0

    def test_interval_stride(self, demo_panel):
        analyzer = TripletPortfolioAnalyzer(interval_days=5, grid_resolution=50).fit(
            demo_panel
        )
        assert analyzer.returns_.n_intervals == (demo_panel.n_dates - 1) // 5
