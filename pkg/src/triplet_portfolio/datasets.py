"""Deterministic synthetic price panels for demos and end-to-end tests."""

from __future__ import annotations

import numpy as np
import pandas as pd

from .dfa import generate_fbm_increments
from .returns import AssetPanel

DEFAULT_SPECS = (
    # (asset_id, hurst, daily_vol, daily_drift, start_price)
    # Distinct winners by design: AAA has the best drift, BBB the most
    # persistence, CCC low volatility, so the local optima span a proper
    # triangle at short intervals.
    ("AAA", 0.52, 0.016, 0.0010, 100.0),
    ("BBB", 0.65, 0.020, 0.0004, 50.0),
    ("CCC", 0.45, 0.009, 0.0001, 200.0),
)


def synthetic_price_panel(
    n_days: int = 1300,
    seed: int = 3,
    specs=DEFAULT_SPECS,
    start_date: str = "2013-01-04",
) -> AssetPanel:
    """Build a panel of correlated-in-style but independent fractal assets.

    Each asset's daily log return is drift + vol * fGn(hurst), so the
    series have known persistence by construction. Deterministic for a
    fixed seed.
    """
    dates = tuple(d.date() for d in pd.bdate_range(start_date, periods=n_days))
    rows = []
    ids = []
    for j, (asset_id, hurst, vol, drift, p0) in enumerate(specs):
        noise = generate_fbm_increments(hurst, n_days - 1, seed=seed + j)
        log_returns = drift + vol * noise
        prices = p0 * np.exp(np.concatenate([[0.0], np.cumsum(log_returns)]))
        rows.append(prices)
        ids.append(asset_id)
    return AssetPanel(asset_ids=tuple(ids), dates=dates, prices=np.vstack(rows))
