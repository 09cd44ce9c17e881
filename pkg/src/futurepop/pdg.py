"""Synthetic future price scenarios.

A scenario is built from standard-normal noise in three steps:

1. the noise is centred and linearly transformed so its empirical
   covariance equals the historical daily-return covariance exactly;
2. each column receives a constant bias chosen so the compounded return of
   the column hits the analyst's target for that asset;
3. prices are rebuilt from the initial values.

Adding a constant to a column does not change the covariance, so the two
constraints do not interfere.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InputError, NumericalError
from .market_data import (
    CovarianceMatrix,
    PriceMatrix,
    ReturnsMatrix,
    covariance,
    daily_returns,
)

#: Recorded in reports so a scenario can be regenerated bit for bit.
NORMAL_GENERATOR = "numpy.random.PCG64 + Generator.standard_normal (ziggurat)"

JITTER_START = 1e-10
JITTER_STOP = 1e-6
BIAS_EPS = 1e-12
BIAS_WIDTH_TOL = 1e-14
BIAS_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class ScenarioSpec:
    """Analyst inputs for one scenario.

    ``horizon_returns`` is the number of future daily returns, so the
    generated price matrix has ``horizon_returns + 1`` rows.
    """

    target_returns: np.ndarray
    initial_values: np.ndarray
    horizon_returns: int
    seed: int = 0

    def __post_init__(self):
        er = np.array(self.target_returns, dtype=float)
        v0 = np.array(self.initial_values, dtype=float)
        if er.ndim != 1 or v0.shape != er.shape:
            raise InputError(
                f"target_returns {er.shape} and initial_values {v0.shape} "
                "must be vectors of equal length"
            )
        if not np.all(er > -1.0):
            raise InputError("every target return must exceed -1")
        if not np.all(v0 > 0.0):
            raise InputError("every initial value must be positive")
        horizon = int(self.horizon_returns)
        if horizon < max(2, er.size + 1):
            raise InputError(
                f"horizon_returns={horizon} must be at least max(2, N+1)={max(2, er.size + 1)}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")
        er.setflags(write=False)
        v0.setflags(write=False)
        object.__setattr__(self, "target_returns", er)
        object.__setattr__(self, "initial_values", v0)
        object.__setattr__(self, "horizon_returns", horizon)
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_history(
        cls,
        hist: PriceMatrix,
        target_returns: Sequence[float],
        horizon_returns: int | None = None,
        seed: int = 0,
        initial_values: Sequence[float] | None = None,
    ) -> "ScenarioSpec":
        """Defaults: start from the last historical prices, mirror the window length."""
        if initial_values is None:
            initial_values = hist.values[-1]
        if horizon_returns is None:
            horizon_returns = hist.n_days - 1
        return cls(np.asarray(target_returns, float), np.asarray(initial_values, float),
                   horizon_returns, seed)


@dataclass(frozen=True)
class CholeskyFactor:
    tickers: tuple[str, ...]
    values: np.ndarray
    jitter: float = field(default=0.0)


def _try_cholesky(a: np.ndarray) -> np.ndarray | None:
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(lower)) or np.any(np.diag(lower) <= 0):
        return None
    return lower


def cholesky(
    cov: CovarianceMatrix | np.ndarray,
    jitter: float = 0.0,
    escalate: bool = False,
) -> CholeskyFactor:
    """Lower-triangular ``L`` with ``L @ L.T == cov + jitter * I``.

    With ``escalate=True`` a failed decomposition is retried with jitter
    ``1e-10 * trace/N`` growing tenfold up to ``1e-6 * trace/N``. The jitter
    actually used is recorded on the result.
    """
    if jitter < 0:
        raise InputError("jitter must be non-negative")
    if isinstance(cov, CovarianceMatrix):
        tickers, a = cov.tickers, cov.values
    else:
        a = np.asarray(cov, dtype=float)
        tickers = tuple(str(i) for i in range(a.shape[0]))
    n = a.shape[0]
    eye = np.eye(n)

    lower = _try_cholesky(a + jitter * eye)
    if lower is not None:
        return CholeskyFactor(tickers, lower, jitter)
    if escalate:
        scale = float(np.trace(a)) / n
        if scale > 0:
            level = JITTER_START
            while level <= JITTER_STOP * (1 + 1e-9):
                extra = jitter + level * scale
                lower = _try_cholesky(a + extra * eye)
                if lower is not None:
                    return CholeskyFactor(tickers, lower, extra)
                level *= 10
    raise NumericalError(
        "Cholesky decomposition failed"
        + (" even at maximum jitter" if escalate else "")
        + "; covariance is not positive definite"
    )


def sample_standard_normal(rows: int, cols: int, seed: int) -> np.ndarray:
    if rows < 2:
        raise InputError("need at least 2 sample rows")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal((rows, cols))


def fit_covariance_transform(x: np.ndarray, target: CovarianceMatrix) -> np.ndarray:
    """Centre ``x`` and map it so its sample covariance equals ``target``.

    Returns ``Xc @ M`` with ``M = Lx^{-T} @ Lh^T``, where ``Lx`` and ``Lh``
    are the Cholesky factors of ``cov(x)`` and ``target``. Then
    ``M.T @ cov(x) @ M == Lh @ Lh.T == target`` up to round-off.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != len(target.tickers):
        raise InputError(
            f"noise shape {x.shape} does not match {len(target.tickers)} assets"
        )
    if x.shape[0] < 2:
        raise InputError("need at least 2 noise rows")
    xc = x - x.mean(axis=0)
    cov_x = xc.T @ xc / (x.shape[0] - 1)
    cov_x = 0.5 * (cov_x + cov_x.T)

    lx = cholesky(cov_x, escalate=True).values
    lh = cholesky(target, escalate=True).values
    transform = solve_triangular(lx.T, lh.T, lower=False)
    return xc @ transform


def _log_growth(y: np.ndarray, b: float) -> float:
    return math.fsum(np.log1p(y + b))


def find_bias(y: Sequence[float], target: float) -> float:
    """Constant ``b`` with ``sum(log(1 + y + b)) == log(1 + target)``.

    The left side increases strictly in ``b`` and spans the whole real line
    on ``b > -1 - min(y)``, so the root exists and is unique. Found by
    bracketed bisection.
    """
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise InputError("bias fit needs at least one return")
    if not target > -1.0:
        raise InputError(f"target return {target} must exceed -1")
    goal = math.log1p(target)

    floor = -1.0 - float(y.min())

    def residual(b: float) -> float:
        return _log_growth(y, b) - goal

    eps = BIAS_EPS
    lo = floor + eps
    while residual(lo) > 0:
        eps *= 1e-3
        lo = floor + max(eps, abs(floor) * 1e-16)
        if eps < 1e-300:
            raise NumericalError("could not bracket bias root from below")
    step = 1.0
    hi = max(lo + step, 0.0)
    while residual(hi) < 0:
        step *= 2.0
        hi = lo + step
        if not math.isfinite(hi):
            raise NumericalError("could not bracket bias root from above")

    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        r = residual(mid)
        if r == 0.0:
            lo = hi = mid
            break
        if r < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= BIAS_WIDTH_TOL and abs(r) <= 0.01 * BIAS_RESIDUAL_TOL:
            break

    b = lo if abs(residual(lo)) <= abs(residual(hi)) else hi
    if abs(residual(b)) > BIAS_RESIDUAL_TOL:
        raise NumericalError(
            f"bias residual {residual(b):.3e} exceeds {BIAS_RESIDUAL_TOL:g}"
        )
    return b


def reconstruct_prices(
    initial: Sequence[float],
    returns: ReturnsMatrix | np.ndarray,
    dates: Sequence[str] | None = None,
    tickers: Sequence[str] | None = None,
) -> PriceMatrix:
    """Compound ``returns`` forward from ``initial`` (which becomes row 0)."""
    if isinstance(returns, ReturnsMatrix):
        tickers = returns.tickers if tickers is None else tickers
        r = returns.values
    else:
        r = np.asarray(returns, dtype=float)
    v0 = np.asarray(initial, dtype=float)
    if r.ndim != 2 or r.shape[1] != v0.size:
        raise InputError(f"returns shape {r.shape} does not match {v0.size} initial values")
    if np.any(v0 <= 0) or np.any(r <= -1):
        raise InputError("initial values must be positive and returns must exceed -1")
    if tickers is None:
        tickers = tuple(f"A{i}" for i in range(v0.size))
    if dates is None:
        dates = future_dates("1970-01-01", r.shape[0] + 1, include_start=True)

    growth = np.vstack([np.ones(v0.size), np.cumprod(1.0 + r, axis=0)])
    return PriceMatrix(tuple(dates), tuple(tickers), v0 * growth)


def future_dates(start: str, count: int, include_start: bool = False) -> tuple[str, ...]:
    """``count`` consecutive business days, beginning at (or after) ``start``."""
    first = np.busday_offset(np.datetime64(start, "D"), 0 if include_start else 1,
                             roll="forward")
    days = np.busday_offset(first, np.arange(count), roll="forward")
    return tuple(str(d) for d in days)


def generate_scenario(hist: PriceMatrix, spec: ScenarioSpec) -> PriceMatrix:
    """Future prices matching the historical covariance and the targets.

    Row 0 holds ``spec.initial_values`` and is dated on the last historical
    date; the following ``spec.horizon_returns`` rows fall on subsequent
    business days.
    """
    n = hist.n_assets
    if spec.target_returns.size != n:
        raise InputError(
            f"{spec.target_returns.size} target returns for {n} historical assets"
        )
    target_cov = covariance(daily_returns(hist))
    x = sample_standard_normal(spec.horizon_returns, n, spec.seed)
    y = fit_covariance_transform(x, target_cov)

    bias = np.array([find_bias(y[:, i], spec.target_returns[i]) for i in range(n)])
    future = ReturnsMatrix(hist.tickers, y + bias)

    dates = (hist.dates[-1],) + future_dates(hist.dates[-1], spec.horizon_returns)
    return reconstruct_prices(spec.initial_values, future, dates=dates)


def load_targets_csv(source: IO[bytes] | IO[str] | str, tickers: Sequence[str]) -> np.ndarray:
    """Read ``ticker,expected_return`` rows, aligned to ``tickers`` order."""
    if isinstance(source, str):
        with open(source, "rb") as fh:
            return load_targets_csv(fh, tickers)
    raw = source.read()
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(raw))
    header = [h.strip() for h in next(reader, [])]
    if header != ["ticker", "expected_return"]:
        raise InputError("targets CSV header must be 'ticker,expected_return'")

    found: dict[str, float] = {}
    for line_no, record in enumerate(reader, start=2):
        if not record or all(not c.strip() for c in record):
            continue
        if len(record) != 2:
            raise InputError(f"targets row {line_no} must have 2 cells")
        ticker, cell = record[0].strip(), record[1].strip()
        if ticker in found:
            raise InputError(f"duplicate target for ticker {ticker} at row {line_no}")
        try:
            value = float(cell)
        except ValueError:
            raise InputError(
                f"non-numeric expected return {cell!r} for ticker {ticker}"
            ) from None
        if not value > -1.0:
            raise InputError(f"expected return for ticker {ticker} must exceed -1")
        found[ticker] = value

    missing = [t for t in tickers if t not in found]
    if missing:
        raise InputError(f"targets missing for ticker(s): {', '.join(missing)}")
    extra = sorted(set(found) - set(tickers))
    if extra:
        raise InputError(f"targets given for unknown ticker(s): {', '.join(extra)}")
    return np.array([found[t] for t in tickers], dtype=float)


def write_targets_csv(tickers: Sequence[str], targets: Sequence[float], target: IO[str] | str) -> None:
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_targets_csv(tickers, targets, fh)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(["ticker", "expected_return"])
    for t, v in zip(tickers, targets):
        writer.writerow([t, repr(float(v))])
