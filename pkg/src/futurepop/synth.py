"""Seeded synthetic market data for demos and tests."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import InputError
from .market_data import PriceMatrix
from .pdg import future_dates


def tickers_for(n_assets: int) -> tuple[str, ...]:
    width = max(2, len(str(n_assets - 1)))
    return tuple(f"S{i:0{width}d}" for i in range(n_assets))


def random_structure(n_assets: int, rng: np.random.Generator):
    """Daily drift, daily volatility and a one-factor correlation matrix."""
    drift = rng.normal(3e-4, 5e-4, n_assets)
    vol = rng.uniform(0.008, 0.025, n_assets)
    loading = rng.uniform(0.0, 0.6, n_assets)
    corr = np.outer(loading, loading)
    np.fill_diagonal(corr, 1.0)
    return drift, vol, corr


def synthetic_prices(
    n_assets: int,
    days: int,
    seed: int = 0,
    drift: Sequence[float] | None = None,
    vol: Sequence[float] | None = None,
    corr: np.ndarray | None = None,
    start: str = "2020-01-01",
    initial: float = 100.0,
) -> PriceMatrix:
    """Geometric random walk with ``days`` price rows.

    Daily simple returns are Gaussian with mean ``drift`` and covariance
    ``diag(vol) @ corr @ diag(vol)``, clipped above -0.95 so prices stay
    positive. Anything not supplied is drawn from the seeded generator.
    """
    if n_assets < 1:
        raise InputError("n_assets must be at least 1")
    if days < 3:
        raise InputError("days must be at least 3")
    rng = np.random.default_rng(seed)
    d0, v0, c0 = random_structure(n_assets, rng)
    drift = d0 if drift is None else np.asarray(drift, float)
    vol = v0 if vol is None else np.asarray(vol, float)
    corr = c0 if corr is None else np.asarray(corr, float)

    cov = np.outer(vol, vol) * corr
    chol = np.linalg.cholesky(cov)
    z = rng.standard_normal((days - 1, n_assets))
    returns = np.maximum(drift + z @ chol.T, -0.95)

    levels = initial * np.vstack([np.ones(n_assets), np.cumprod(1.0 + returns, axis=0)])
    return PriceMatrix(future_dates(start, days, include_start=True), tickers_for(n_assets), levels)


def synthetic_targets(n_assets: int, seed: int = 0, low: float = -0.05, high: float = 0.25) -> np.ndarray:
    """Analyst-style expected returns, uniform on ``[low, high)``."""
    rng = np.random.default_rng([seed, 1])
    return rng.uniform(low, high, n_assets)


def dominant_asset_universe(
    n_assets: int = 10,
    days: int = 250,
    seed: int = 0,
    dominant_return: float = 0.30,
    dominant_vol: float = 0.004,
) -> tuple[PriceMatrix, np.ndarray]:
    """History plus targets where asset 0 clearly beats the rest.

    Asset 0 has the lowest volatility, zero correlation with every other
    asset and the highest target return; the others draw targets from
    ``[-0.05, 0.2)``.
    """
    if n_assets < 2:
        raise InputError("a dominant-asset universe needs at least 2 assets")
    rng = np.random.default_rng(seed)
    drift, vol, corr = random_structure(n_assets, rng)
    vol[0] = min(dominant_vol, vol[1:].min() / 2)
    corr[0, :] = corr[:, 0] = 0.0
    corr[0, 0] = 1.0
    hist = synthetic_prices(n_assets, days, seed=seed, drift=drift, vol=vol, corr=corr)
    targets = rng.uniform(-0.05, 0.2, n_assets)
    targets[0] = max(dominant_return, targets[1:].max() + 0.05)
    return hist, targets
