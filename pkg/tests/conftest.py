from pathlib import Path

import numpy as np
import pytest

from triplet_portfolio import AssetPanel, load_price_panel

REPO_ROOT = Path(__file__).resolve().parent.parent
DEMO_PANEL_CSV = REPO_ROOT / "data" / "demo_panel.csv"


@pytest.fixture(scope="session")
def demo_panel() -> AssetPanel:
    return load_price_panel(DEMO_PANEL_CSV)


def make_panel(prices: np.ndarray, asset_ids=None) -> AssetPanel:
    """Panel with synthetic consecutive dates around a price matrix (N, M+1)."""
    import datetime as dt

    prices = np.asarray(prices, dtype=float)
    n, m1 = prices.shape
    ids = asset_ids or tuple(f"A{i}" for i in range(n))
    start = dt.date(2020, 1, 1)
    dates = tuple(start + dt.timedelta(days=k) for k in range(m1))
    return AssetPanel(asset_ids=ids, dates=dates, prices=prices)
