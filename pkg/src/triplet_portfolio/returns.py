"""Price-panel ingestion and return statistics.

A price panel is resampled at a stride of `interval_days` trading days,
turned into log returns, and summarized as the triple used everywhere
else in the package: mean-return vector, covariance matrix, and
per-asset persistence (Hurst) vector.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError
from .validation import (
    as_readonly,
    check_matrix,
    check_symmetric_psd,
    weight_array,
)

MIN_PANEL_OBSERVATIONS = 30


@dataclass(frozen=True)
class WeightVector:
    """A point on the probability simplex: nonnegative weights summing to 1."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", weight_array(self.weights))

    def __len__(self) -> int:
        return self.weights.size

    def as_array(self) -> np.ndarray:
        return self.weights


@dataclass(frozen=True)
class AssetPanel:
    """Aligned dated price series for N assets.

    prices has shape (N, M+1): one row per asset, one column per date.
    All prices are strictly positive and dates strictly increasing.
    """

    asset_ids: tuple[str, ...]
    dates: tuple[dt.date, ...]
    prices: np.ndarray

    def __post_init__(self):
        prices = check_matrix(self.prices, name="prices")
        ids = tuple(str(a) for a in self.asset_ids)
        dates = tuple(self.dates)
        n, m_plus_1 = prices.shape
        if n < 1:
            raise DataError("panel needs at least one asset")
        if m_plus_1 < 3:
            raise DataError(f"panel needs at least 3 dated prices, got {m_plus_1}")
        if len(ids) != n:
            raise DataError(f"{len(ids)} asset ids for {n} price rows")
        if any(("," in a) or ("\n" in a) or not a for a in ids):
            raise DataError("asset ids must be non-empty and free of commas/newlines")
        if len(dates) != m_plus_1:
            raise DataError(f"{len(dates)} dates for {m_plus_1} price columns")
        if np.any(prices <= 0.0):
            raise DataError("non-positive price in panel")
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise DataError("dates must be strictly increasing")
        object.__setattr__(self, "asset_ids", ids)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "prices", prices)

    @property
    def n_assets(self) -> int:
        return self.prices.shape[0]

    @property
    def n_dates(self) -> int:
        return self.prices.shape[1]


@dataclass(frozen=True)
class ReturnMatrix:
    """Per-interval log returns, shape (N, M), at a stride of interval_days."""

    returns: np.ndarray
    interval_days: int

    def __post_init__(self):
        object.__setattr__(self, "returns", check_matrix(self.returns, name="returns"))
        if self.interval_days < 1:
            raise DataError(f"interval_days must be >= 1, got {self.interval_days}")

    @property
    def n_assets(self) -> int:
        return self.returns.shape[0]

    @property
    def n_intervals(self) -> int:
        return self.returns.shape[1]


@dataclass(frozen=True)
class StatisticsBundle:
    """Mean returns R, covariance C, and Hurst vector H for one interval."""

    mean_returns: np.ndarray
    covariance: np.ndarray
    hurst: np.ndarray
    interval_days: int = 1
    asset_ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        r = as_readonly(np.atleast_1d(np.asarray(self.mean_returns, dtype=float)))
        h = as_readonly(np.atleast_1d(np.asarray(self.hurst, dtype=float)))
        c = check_symmetric_psd(self.covariance, name="covariance")
        n = r.size
        if h.size != n or c.shape[0] != n:
            raise DataError(
                f"inconsistent dimensions: R has {n}, H has {h.size}, C is {c.shape}"
            )
        if not np.all(np.isfinite(r)):
            raise DataError("mean returns contain non-finite values")
        if np.any(h <= 0.0) or np.any(h >= 1.0):
            raise DataError(f"hurst entries must lie in (0, 1), got {h}")
        if self.interval_days < 1:
            raise DataError(f"interval_days must be >= 1, got {self.interval_days}")
        ids = tuple(str(a) for a in self.asset_ids) if self.asset_ids else ()
        if ids and len(ids) != n:
            raise DataError(f"{len(ids)} asset ids for {n} assets")
        object.__setattr__(self, "mean_returns", r)
        object.__setattr__(self, "covariance", c)
        object.__setattr__(self, "hurst", h)
        object.__setattr__(self, "asset_ids", ids)

    @property
    def n_assets(self) -> int:
        return self.mean_returns.size


def load_price_panel(
    source,
    date_range: tuple[dt.date | None, dt.date | None] | None = None,
) -> AssetPanel:
    """Load an aligned price panel from a CSV file.

    The file must have a header row ``date,<asset_id>,...`` with ISO-8601
    dates and one row per trading day. Rows with any blank or missing
    price are dropped; remaining rows are sorted chronologically.

    Args:
        source: path to the CSV file.
        date_range: optional (start, end) pair; either end may be None.
            Rows outside the inclusive range are dropped.

    Raises:
        DataError: on parse failure, non-positive prices, duplicate
            dates, or fewer than 30 aligned observations.
    """
    try:
        frame = pd.read_csv(source)
    except FileNotFoundError:
        raise DataError(f"price file not found: {source}") from None
    except Exception as exc:
        raise DataError(f"could not parse price file {source}: {exc}") from exc

    if frame.shape[1] < 2:
        raise DataError("price file needs a date column plus at least one asset column")
    date_col = frame.columns[0]
    asset_ids = tuple(str(c) for c in frame.columns[1:])

    try:
        parsed = pd.to_datetime(frame[date_col], format="ISO8601")
    except (ValueError, TypeError) as exc:
        raise DataError(f"could not parse dates in column {date_col!r}: {exc}") from exc
    frame = frame.assign(**{date_col: parsed.dt.date})

    for col in asset_ids:
        frame[col] = pd.to_numeric(frame[col], errors="coerce")

    # Alignment rule: a date survives only if every asset has a price there.
    frame = frame.dropna(axis=0, how="any")

    if date_range is not None:
        start, end = date_range
        if start is not None:
            frame = frame[frame[date_col] >= start]
        if end is not None:
            frame = frame[frame[date_col] <= end]

    if frame.empty:
        raise DataError("no dates survive alignment and date-range filtering")

    frame = frame.sort_values(date_col)
    dates = tuple(frame[date_col])
    if len(set(dates)) != len(dates):
        raise DataError("duplicate dates in price file")

    prices = frame[list(asset_ids)].to_numpy(dtype=float).T
    if np.any(prices <= 0.0):
        bad = np.argwhere(prices <= 0.0)[0]
        raise DataError(
            f"non-positive price for asset {asset_ids[bad[0]]!r} on {dates[bad[1]]}"
        )
    if len(dates) < MIN_PANEL_OBSERVATIONS:
        raise DataError(
            f"need at least {MIN_PANEL_OBSERVATIONS} aligned observations, got {len(dates)}"
        )
    return AssetPanel(asset_ids=asset_ids, dates=dates, prices=prices)


def write_panel_csv(panel: AssetPanel, path) -> None:
    """Write a panel back to the CSV layout accepted by load_price_panel."""
    frame = pd.DataFrame(panel.prices.T, columns=list(panel.asset_ids))
    frame.insert(0, "date", [d.isoformat() for d in panel.dates])
    frame.to_csv(path, index=False)


def compute_returns(panel: AssetPanel, interval_days: int) -> ReturnMatrix:
    """Resample prices at a stride of `interval_days` and take log returns.

    Prices are sampled from the first date at indices 0, tau, 2*tau, ...;
    the tail remainder shorter than one stride is discarded. Entry (i, k)
    is ln(P_i(t_k) / P_i(t_{k-1})) on the resampled axis, so a panel with
    M+1 prices yields floor(M / tau) returns.
    """
    tau = int(interval_days)
    if tau < 1:
        raise DataError(f"interval_days must be >= 1, got {interval_days}")
    m_raw = panel.n_dates - 1
    if m_raw < tau:
        raise DataError(
            f"interval of {tau} days exceeds the {m_raw}-step price history"
        )
    sampled = panel.prices[:, :: tau]
    returns = np.diff(np.log(sampled), axis=1)
    return ReturnMatrix(returns=returns, interval_days=tau)


def mean_returns(rm: ReturnMatrix) -> np.ndarray:
    """Per-asset arithmetic mean of the per-interval returns."""
    if rm.n_intervals < 1:
        raise DataError("need at least one return observation")
    return rm.returns.mean(axis=1)


def covariance_matrix(rm: ReturnMatrix, mode: str = "sample") -> np.ndarray:
    """Covariance of the return rows.

    Args:
        rm: return matrix with at least two observations.
        mode: "sample" for the unbiased 1/(M-1) normalizer, "population"
            for 1/M.

    The result is exactly symmetric.
    """
    if mode not in ("sample", "population"):
        raise DataError(f"covariance mode must be 'sample' or 'population', got {mode!r}")
    if rm.n_intervals < 2:
        raise DataError("covariance needs at least 2 return observations")
    ddof = 1 if mode == "sample" else 0
    cov = np.atleast_2d(np.cov(rm.returns, ddof=ddof))
    return (cov + cov.T) / 2.0


def portfolio_return(w, stats: StatisticsBundle) -> float:
    """Portfolio mean return w'R."""
    arr = weight_array(w, n=stats.n_assets)
    return float(arr @ stats.mean_returns)


def portfolio_variance(w, stats: StatisticsBundle) -> float:
    """Portfolio variance w'Cw, clamped at zero against round-off."""
    arr = weight_array(w, n=stats.n_assets)
    value = float(arr @ stats.covariance @ arr)
    if value < 0.0:
        if value < -1e-12:
            raise DataError(f"variance {value:.3e} is negative beyond tolerance")
        value = 0.0
    return value


def portfolio_hurst(w, stats: StatisticsBundle) -> float:
    """Weight-mixed persistence w'H (a linear blend, not the Hurst of the mix)."""
    arr = weight_array(w, n=stats.n_assets)
    return float(arr @ stats.hurst)
