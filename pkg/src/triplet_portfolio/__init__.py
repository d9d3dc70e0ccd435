"""Portfolio optimization over the return/volatility/persistence triplet.

The package estimates per-asset mean returns, covariance, and Hurst
exponents from price histories, computes the closed-form constrained
optimum, locates the three local optima by simplex grid search, and
builds the balanced portfolios (centroid, incenter, Fermat point) of
the triangle they span.
"""

from .analysis import (
    AnalysisConfig,
    AnalysisReport,
    IntervalBlock,
    TableRendering,
    emit_plot_data,
    emit_table,
    run_analysis,
)
from .datasets import synthetic_price_panel
from .dfa import (
    DfaConfig,
    DfaResult,
    classify_regime,
    detrended_fluctuation,
    estimate_hurst,
    fit_hurst,
    fluctuation_function,
    generate_fbm_increments,
    profile_series,
    segment_profile,
)
from .errors import (
    DataError,
    DegenerateSeriesError,
    DegenerateTriangleError,
    GridSizeError,
    PortfolioError,
    SingularMatrixError,
    StageError,
)
from .estimators import DfaHurstEstimator, TripletPortfolioAnalyzer
from .pareto import (
    KktReport,
    ParetoSolution,
    QMatrix,
    assemble_q,
    kkt_verify,
    lagrange_multipliers,
    pareto_weight,
)
from .returns import (
    AssetPanel,
    ReturnMatrix,
    StatisticsBundle,
    WeightVector,
    compute_returns,
    covariance_matrix,
    load_price_panel,
    mean_returns,
    portfolio_hurst,
    portfolio_return,
    portfolio_variance,
    write_panel_csv,
)
from .simplex import (
    AveragedTriangle,
    GlobalOptimum,
    OptimalTriangle,
    SimplexGrid,
    average_local_weights,
    barycentric_coordinates,
    centroid,
    effective_subspace_membership,
    enumerate_simplex,
    fermat_point,
    global_optimum,
    grid_constrained_maximizer,
    incenter,
    incircle_radius,
    local_optima,
    triangle_membership,
    weight_distance,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "AnalysisReport",
    "AssetPanel",
    "AveragedTriangle",
    "DataError",
    "DegenerateSeriesError",
    "DegenerateTriangleError",
    "DfaConfig",
    "DfaHurstEstimator",
    "DfaResult",
    "GlobalOptimum",
    "GridSizeError",
    "IntervalBlock",
    "KktReport",
    "OptimalTriangle",
    "ParetoSolution",
    "PortfolioError",
    "QMatrix",
    "ReturnMatrix",
    "SimplexGrid",
    "SingularMatrixError",
    "StageError",
    "StatisticsBundle",
    "TableRendering",
    "TripletPortfolioAnalyzer",
    "WeightVector",
    "assemble_q",
    "average_local_weights",
    "barycentric_coordinates",
    "centroid",
    "classify_regime",
    "compute_returns",
    "covariance_matrix",
    "detrended_fluctuation",
    "effective_subspace_membership",
    "emit_plot_data",
    "emit_table",
    "enumerate_simplex",
    "estimate_hurst",
    "fermat_point",
    "fit_hurst",
    "fluctuation_function",
    "generate_fbm_increments",
    "global_optimum",
    "grid_constrained_maximizer",
    "incenter",
    "incircle_radius",
    "kkt_verify",
    "lagrange_multipliers",
    "load_price_panel",
    "local_optima",
    "mean_returns",
    "pareto_weight",
    "portfolio_hurst",
    "portfolio_return",
    "portfolio_variance",
    "profile_series",
    "run_analysis",
    "segment_profile",
    "synthetic_price_panel",
    "triangle_membership",
    "weight_distance",
    "write_panel_csv",
]
