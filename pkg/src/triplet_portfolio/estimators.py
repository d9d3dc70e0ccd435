"""Scikit-learn compatible estimator front-ends.

Both classes follow the sklearn contract: hyperparameters are plain
constructor arguments (so `get_params`/`set_params`/`clone` work),
``fit`` computes attributes with trailing underscores, and nothing is
mutated afterwards.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import dfa as _dfa
from . import pareto as _pareto
from . import simplex as _simplex
from .errors import DataError
from .returns import (
    AssetPanel,
    ReturnMatrix,
    StatisticsBundle,
    WeightVector,
    compute_returns,
    covariance_matrix,
    mean_returns,
)


class DfaHurstEstimator(BaseEstimator):
    """Hurst exponent estimator by detrended fluctuation analysis.

    Parameters mirror DfaConfig. Fit accepts a single 1-D series or a
    2-D array with one series per column (sklearn orientation).

    Attributes after fit:
        result_ / results_: full DfaResult (single series) or list of
            them (one per column).
        hurst_, intercept_, fit_r2_: scalars or per-column arrays.
        regime_: label or tuple of labels.
    """

    def __init__(
        self,
        poly_order: int = 1,
        min_scale: int = 5,
        max_scale: int | None = None,
        scale_count: int = 20,
        scales: tuple[int, ...] | None = None,
    ):
        self.poly_order = poly_order
        self.min_scale = min_scale
        self.max_scale = max_scale
        self.scale_count = scale_count
        self.scales = scales

    def _config(self) -> _dfa.DfaConfig:
        return _dfa.DfaConfig(
            poly_order=self.poly_order,
            min_scale=self.min_scale,
            max_scale=self.max_scale,
            scale_count=self.scale_count,
            scales=self.scales,
        )

    def fit(self, X, y=None):
        arr = np.asarray(X, dtype=float)
        config = self._config()
        if arr.ndim == 1:
            result = _dfa.estimate_hurst(arr, config)
            self.result_ = result
            self.results_ = [result]
            self.hurst_ = result.hurst
            self.intercept_ = result.intercept
            self.fit_r2_ = result.fit_r2
            self.regime_ = result.regime
            self.n_features_in_ = 1
        elif arr.ndim == 2:
            results = [_dfa.estimate_hurst(arr[:, j], config) for j in range(arr.shape[1])]
            self.results_ = results
            self.hurst_ = np.array([r.hurst for r in results])
            self.intercept_ = np.array([r.intercept for r in results])
            self.fit_r2_ = np.array([r.fit_r2 for r in results])
            self.regime_ = tuple(r.regime for r in results)
            self.n_features_in_ = arr.shape[1]
        else:
            raise DataError(f"expected a 1-D or 2-D array, got shape {arr.shape}")
        return self


class TripletPortfolioAnalyzer(BaseEstimator):
    """One-interval analysis of a price panel.

    Fit runs the full pipeline: strided log returns, per-asset DFA,
    statistics bundle, simplex grid search for the local optima,
    triangle geometry, and the closed-form constrained optimum (with a
    grid fallback when the analytic weight leaves the simplex).

    Attributes after fit: returns_, dfa_results_, stats_, grid_,
    triangle_, optimum_, pareto_, numerical_weight_,
    numerical_constrained_, asset_ids_, n_assets_.
    """

    def __init__(
        self,
        interval_days: int = 1,
        grid_resolution: int = 100,
        covariance: str = "sample",
        risk_aversion: float = 1.0,
        poly_order: int = 1,
        min_scale: int = 5,
        max_scale: int | None = None,
        scale_count: int = 20,
        heron_convention: str = "standard",
        point_ceiling: int = _simplex.DEFAULT_POINT_CEILING,
    ):
        self.interval_days = interval_days
        self.grid_resolution = grid_resolution
        self.covariance = covariance
        self.risk_aversion = risk_aversion
        self.poly_order = poly_order
        self.min_scale = min_scale
        self.max_scale = max_scale
        self.scale_count = scale_count
        self.heron_convention = heron_convention
        self.point_ceiling = point_ceiling

    def fit(self, X, y=None):
        """Fit on an AssetPanel or a (n_dates, n_assets) price array."""
        if isinstance(X, AssetPanel):
            panel = X
            asset_ids = panel.asset_ids
            rm = compute_returns(panel, self.interval_days)
        else:
            arr = np.asarray(X, dtype=float)
            if arr.ndim != 2:
                raise DataError(f"expected (n_dates, n_assets) prices, got shape {arr.shape}")
            asset_ids = tuple(f"asset_{j}" for j in range(arr.shape[1]))
            if np.any(arr <= 0.0):
                raise DataError("non-positive price in input")
            prices = arr.T
            tau = int(self.interval_days)
            if prices.shape[1] - 1 < tau:
                raise DataError(
                    f"interval of {tau} days exceeds the {prices.shape[1] - 1}-step history"
                )
            rm = ReturnMatrix(
                returns=np.diff(np.log(prices[:, ::tau]), axis=1), interval_days=tau
            )

        dfa_config = _dfa.DfaConfig(
            poly_order=self.poly_order,
            min_scale=self.min_scale,
            max_scale=self.max_scale,
            scale_count=self.scale_count,
        )
        dfa_results = [_dfa.estimate_hurst(row, dfa_config) for row in rm.returns]
        stats = StatisticsBundle(
            mean_returns=mean_returns(rm),
            covariance=covariance_matrix(rm, mode=self.covariance),
            hurst=np.array([r.hurst for r in dfa_results]),
            interval_days=rm.interval_days,
            asset_ids=asset_ids,
        )
        grid = _simplex.enumerate_simplex(
            stats.n_assets, self.grid_resolution, point_ceiling=self.point_ceiling
        )
        triangle = _simplex.local_optima(stats, grid)
        optimum = _simplex.global_optimum(
            triangle, grid, heron_convention=self.heron_convention
        )
        solution = _pareto.pareto_weight(stats, risk_aversion=self.risk_aversion)
        if solution.feasible_on_simplex:
            numerical_weight, numerical_constrained = None, None
        else:
            numerical_weight, numerical_constrained = _simplex.grid_constrained_maximizer(
                stats, grid, risk_aversion=self.risk_aversion
            )

        self.returns_ = rm
        self.dfa_results_ = tuple(dfa_results)
        self.stats_ = stats
        self.grid_ = grid
        self.triangle_ = triangle
        self.optimum_ = optimum
        self.pareto_ = solution
        self.numerical_weight_ = numerical_weight
        self.numerical_constrained_ = numerical_constrained
        self.asset_ids_ = asset_ids
        self.n_assets_ = stats.n_assets
        self.n_features_in_ = stats.n_assets
        return self

    def reported_weight(self):
        """The allocation a user should act on.

        The analytic optimum when it lies on the simplex, otherwise the
        grid fallback; the second element tells which one it is.
        """
        check_is_fitted(self, "pareto_")
        if self.pareto_.feasible_on_simplex:
            return WeightVector(self.pareto_.weight), "analytic"
        return self.numerical_weight_, "numerical"
