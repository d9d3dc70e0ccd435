"""Detrended fluctuation analysis and fractional-noise synthesis.

The estimator follows the classic five-step DFA recipe: build the
de-meaned cumulative profile, cut it into non-overlapping windows of
size s, remove a least-squares polynomial trend of order `poly_order`
from each window, average the mean squared residuals into F(s), and
read the Hurst exponent off the slope of log F(s) against log s.

`generate_fbm_increments` synthesizes exact-covariance fractional
Gaussian noise by circulant embedding, which serves as the estimation
oracle in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateSeriesError
from .validation import as_readonly, check_series

ANTI_PERSISTENT = "anti-persistent"
RANDOM_WALK = "random-walk"
PERSISTENT = "persistent"

_RANDOM_WALK_TOL = 1e-12


@dataclass(frozen=True)
class DfaConfig:
    """Detrending order and window-size grid for one DFA run.

    When `scales` is None the grid is `scale_count` log-spaced integers
    from `min_scale` to `max_scale` (default: a quarter of the series
    length), deduplicated. Every scale must be at least poly_order + 2
    so the polynomial fit is overdetermined.
    """

    poly_order: int = 1
    min_scale: int = 5
    max_scale: int | None = None
    scale_count: int = 20
    scales: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.poly_order < 1:
            raise DataError(f"poly_order must be >= 1, got {self.poly_order}")
        if self.min_scale < self.poly_order + 2:
            raise DataError(
                f"min_scale must be >= poly_order + 2 = {self.poly_order + 2}, "
                f"got {self.min_scale}"
            )
        if self.max_scale is not None and self.max_scale < self.min_scale:
            raise DataError("max_scale must be >= min_scale")
        if self.scale_count < 3:
            raise DataError(f"need at least 3 scales, got scale_count={self.scale_count}")
        if self.scales is not None:
            object.__setattr__(self, "scales", tuple(int(s) for s in self.scales))

    def resolve_scales(self, series_length: int) -> np.ndarray:
        """Concrete strictly-increasing integer scale grid for a series."""
        cap = series_length // 4
        if self.scales is not None:
            arr = np.asarray(self.scales, dtype=int)
            if np.any(np.diff(arr) <= 0):
                raise DataError("explicit scales must be strictly increasing")
            if arr[0] < self.poly_order + 2:
                raise DataError(
                    f"scale {arr[0]} is below poly_order + 2 = {self.poly_order + 2}"
                )
            if arr[-1] > cap:
                raise DataError(
                    f"scale {arr[-1]} exceeds a quarter of the series length ({cap})"
                )
        else:
            hi = cap if self.max_scale is None else min(self.max_scale, cap)
            if hi < self.min_scale:
                raise DataError(
                    f"series of length {series_length} cannot support scales "
                    f"from {self.min_scale} (max usable {cap})"
                )
            raw = np.geomspace(self.min_scale, hi, self.scale_count)
            arr = np.unique(np.round(raw).astype(int))
        if arr.size < 3:
            raise DataError(f"need at least 3 distinct scales, got {arr.size}")
        return arr


@dataclass(frozen=True)
class DfaResult:
    """Fitted power law F(s) = C * s^H with per-scale fluctuations."""

    hurst: float
    intercept: float
    fluctuations: np.ndarray  # shape (K, 2): columns (s, F(s))
    fit_r2: float
    regime: str

    def __post_init__(self):
        object.__setattr__(self, "fluctuations", as_readonly(self.fluctuations))

    @property
    def amplitude(self) -> float:
        """The constant C of the fitted power law."""
        return float(np.exp(self.intercept))


def classify_regime(hurst: float) -> str:
    """Label a Hurst exponent: below 0.5 anti-persistent, above persistent."""
    if not np.isfinite(hurst):
        raise DataError(f"hurst must be finite, got {hurst}")
    if abs(hurst - 0.5) <= _RANDOM_WALK_TOL:
        return RANDOM_WALK
    return ANTI_PERSISTENT if hurst < 0.5 else PERSISTENT


def profile_series(x) -> np.ndarray:
    """Cumulative sum of deviations from the mean.

    The last entry is zero by construction (the deviations sum to zero),
    which downstream code relies on.
    """
    arr = check_series(x, min_length=4)
    return np.cumsum(arr - arr.mean())


def segment_profile(profile, s: int) -> np.ndarray:
    """Split a profile into floor(M/s) non-overlapping windows of size s.

    The remainder shorter than s is discarded. Returns shape (M_s, s).
    """
    arr = check_series(profile, min_length=2, name="profile")
    s = int(s)
    if s < 2:
        raise DataError(f"window size must be >= 2, got {s}")
    if s > arr.size:
        raise DataError(f"window size {s} exceeds profile length {arr.size}")
    n_windows = arr.size // s
    return arr[: n_windows * s].reshape(n_windows, s)


def detrended_fluctuation(window, poly_order: int = 1) -> float:
    """Mean squared residual of a window around its polynomial trend.

    The polynomial of order `poly_order` is fit against the in-window
    index 1..s by least squares.
    """
    arr = check_series(window, min_length=2, name="window")
    return float(_window_fluctuations(arr.reshape(1, -1), poly_order)[0])


def _window_fluctuations(windows: np.ndarray, poly_order: int) -> np.ndarray:
    """Vectorized mean squared detrending residual, one value per window row."""
    s = windows.shape[1]
    # s == poly_order + 1 interpolates exactly (residual 0); anything
    # smaller is underdetermined. Estimation grids stay at >= poly_order + 2
    # via DfaConfig so fits keep at least one degree of freedom.
    if s < poly_order + 1:
        raise DataError(
            f"window size {s} too small for order-{poly_order} detrending "
            f"(needs >= {poly_order + 1})"
        )
    t = np.arange(1.0, s + 1.0)
    design = np.vander(t, poly_order + 1)
    coef, _, rank, _ = np.linalg.lstsq(design, windows.T, rcond=None)
    if rank < poly_order + 1:
        raise DataError(f"degenerate order-{poly_order} fit on window of size {s}")
    resid = windows.T - design @ coef
    return np.mean(resid**2, axis=0)


def fluctuation_function(profile, s: int, poly_order: int = 1) -> float:
    """Root mean of the per-window detrended fluctuations at scale s."""
    windows = segment_profile(profile, s)
    f = _window_fluctuations(windows, poly_order)
    value = float(np.sqrt(f.mean()))
    # Exact-polynomial windows leave only round-off residuals; judge
    # "all-zero" relative to the profile's own magnitude.
    ref = float(np.sqrt(np.mean(windows**2)))
    if value <= 1e-12 * (1.0 + ref):
        raise DegenerateSeriesError(
            f"windows at scale {s} are order-{poly_order} polynomials up to round-off; "
            "the series carries no fluctuation signal"
        )
    return value


def fit_hurst(points) -> DfaResult:
    """Least-squares power-law fit through (s, F(s)) pairs.

    The slope of log F against log s is the Hurst exponent; the
    intercept is log C.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DataError(f"expected (s, F) pairs, got shape {arr.shape}")
    if arr.shape[0] < 3:
        raise DataError(f"need at least 3 scale points, got {arr.shape[0]}")
    if np.any(arr[:, 1] <= 0.0):
        raise DataError("fluctuation values must be positive")
    log_s = np.log(arr[:, 0])
    log_f = np.log(arr[:, 1])
    slope, intercept = np.polyfit(log_s, log_f, 1)
    fitted = slope * log_s + intercept
    ss_res = float(np.sum((log_f - fitted) ** 2))
    ss_tot = float(np.sum((log_f - log_f.mean()) ** 2))
    if ss_tot > 0.0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    return DfaResult(
        hurst=float(slope),
        intercept=float(intercept),
        fluctuations=arr,
        fit_r2=r2,
        regime=classify_regime(float(slope)),
    )


def estimate_hurst(x, config: DfaConfig | None = None) -> DfaResult:
    """Full DFA pipeline: profile, per-scale fluctuation, log-log fit."""
    cfg = config if config is not None else DfaConfig()
    smallest = cfg.scales[0] if cfg.scales is not None else cfg.min_scale
    arr = check_series(x, min_length=4 * smallest)
    scales = cfg.resolve_scales(arr.size)
    profile = np.cumsum(arr - arr.mean())
    points = [(s, fluctuation_function(profile, int(s), cfg.poly_order)) for s in scales]
    return fit_hurst(np.asarray(points, dtype=float))


def generate_fbm_increments(hurst: float, length: int, seed=None) -> np.ndarray:
    """Sample fractional Gaussian noise with exact autocovariance.

    Uses circulant embedding of the fGn autocovariance
    gamma(k) = 0.5 * (|k+1|^2H - 2|k|^2H + |k-1|^2H), so sample paths
    have the exact target correlation structure at every lag. The
    cumulative sum of the output is fractional Brownian motion with the
    requested Hurst exponent. Deterministic for a fixed seed.
    """
    if not 0.0 < hurst < 1.0:
        raise DataError(f"hurst must lie strictly in (0, 1), got {hurst}")
    n = int(length)
    if n < 2:
        raise DataError(f"length must be >= 2, got {length}")
    rng = np.random.default_rng(seed)

    k = np.arange(n + 1, dtype=float)
    gamma = 0.5 * ((k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    # The embedding is provably nonnegative-definite for fGn; tiny negative
    # eigenvalues are pure round-off.
    if eig.min() < -1e-8 * eig.max():
        raise DataError(f"circulant embedding failed: eigenvalue {eig.min():.3e}")
    eig = np.clip(eig, 0.0, None)

    m = 2 * n
    spectral = np.zeros(m, dtype=complex)
    spectral[0] = np.sqrt(eig[0] / m) * rng.standard_normal()
    spectral[n] = np.sqrt(eig[n] / m) * rng.standard_normal()
    re = rng.standard_normal(n - 1)
    im = rng.standard_normal(n - 1)
    spectral[1:n] = np.sqrt(eig[1:n] / (2 * m)) * (re + 1j * im)
    spectral[n + 1 :] = np.conj(spectral[1:n][::-1])
    return np.fft.fft(spectral).real[:n]
