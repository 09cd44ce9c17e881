"""Price ingestion and the basic return statistics built on top of it.

Prices are held as a ``K x N`` array (rows are days in ascending order,
columns are assets). Returns are simple daily returns, so a window of
``K`` prices yields ``K - 1`` return rows.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .errors import InputError

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10


def _frozen(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise InputError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PriceMatrix:
    """Daily prices, one row per date and one column per ticker."""

    dates: tuple[str, ...]
    tickers: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(str(d) for d in self.dates))
        object.__setattr__(self, "tickers", tuple(str(t) for t in self.tickers))
        values = _frozen(self.values, 2, "price values")
        object.__setattr__(self, "values", values)

        k, n = values.shape
        if len(self.tickers) != n:
            raise InputError(f"{n} price columns but {len(self.tickers)} tickers")
        if len(self.dates) != k:
            raise InputError(f"{k} price rows but {len(self.dates)} dates")
        if k < 2:
            raise InputError(f"need at least 2 price rows, got {k}")
        if len(set(self.tickers)) != n:
            raise InputError("duplicate ticker identifiers")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            row, col = np.argwhere(~(values > 0) | ~np.isfinite(values))[0]
            raise InputError(
                f"non-positive price at row {row}, column {self.tickers[col]}"
            )
        if any(a >= b for a, b in zip(self.dates, self.dates[1:])):
            raise InputError("dates must be strictly increasing")

    @property
    def n_days(self) -> int:
        return self.values.shape[0]

    @property
    def n_assets(self) -> int:
        return self.values.shape[1]

    def select(self, tickers: Sequence[str]) -> "PriceMatrix":
        """Keep only ``tickers`` (in the order given) and all rows."""
        index = {t: i for i, t in enumerate(self.tickers)}
        missing = [t for t in tickers if t not in index]
        if missing:
            raise InputError(f"unknown tickers: {', '.join(missing)}")
        cols = [index[t] for t in tickers]
        return PriceMatrix(self.dates, tuple(tickers), self.values[:, cols])


@dataclass(frozen=True)
class ReturnsMatrix:
    tickers: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tickers", tuple(str(t) for t in self.tickers))
        values = _frozen(self.values, 2, "return values")
        object.__setattr__(self, "values", values)
        if values.shape[1] != len(self.tickers):
            raise InputError(
                f"{values.shape[1]} return columns but {len(self.tickers)} tickers"
            )
        if not np.all(values > -1.0):
            raise InputError("every daily return must exceed -1")


@dataclass(frozen=True)
class CovarianceMatrix:
    tickers: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tickers", tuple(str(t) for t in self.tickers))
        values = _frozen(self.values, 2, "covariance values")
        object.__setattr__(self, "values", values)
        n = len(self.tickers)
        if values.shape != (n, n):
            raise InputError(f"covariance must be {n}x{n}, got {values.shape}")
        if not np.allclose(values, values.T, rtol=0.0, atol=SYMMETRY_TOL):
            raise InputError("covariance matrix is not symmetric")

    def is_psd(self, tol: float = PSD_TOL) -> bool:
        return bool(np.linalg.eigvalsh(self.values).min() >= -tol)

    def select(self, tickers: Sequence[str]) -> "CovarianceMatrix":
        index = {t: i for i, t in enumerate(self.tickers)}
        cols = [index[t] for t in tickers]
        return CovarianceMatrix(tuple(tickers), self.values[np.ix_(cols, cols)])


def load_prices_csv(source: IO[bytes] | IO[str] | str) -> PriceMatrix:
    """Parse a ``date,<ticker>,...`` CSV into a :class:`PriceMatrix`.

    ``source`` may be a binary or text stream, or a filesystem path. Rows are
    sorted by date if they arrive out of order. Errors name the offending
    line (header is line 1) and column.
    """
    if isinstance(source, str):
        with open(source, "rb") as fh:
            return load_prices_csv(fh)

    raw = source.read()
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise InputError(f"price CSV is not valid UTF-8: {exc}") from None
    reader = csv.reader(io.StringIO(raw))

    try:
        header = next(reader)
    except StopIteration:
        raise InputError("price CSV is empty") from None
    header = [h.strip() for h in header]
    if not header or header[0] != "date":
        raise InputError("first column header must be 'date'")
    tickers = header[1:]
    if not tickers:
        raise InputError("price CSV has no ticker columns")
    seen: set[str] = set()
    for t in tickers:
        if not t:
            raise InputError("blank ticker header")
        if t in seen:
            raise InputError(f"duplicate ticker {t!r} in header")
        seen.add(t)

    dates: list[str] = []
    rows: list[list[float]] = []
    first_line: dict[str, int] = {}
    for line_no, record in enumerate(reader, start=2):
        if not record or all(not c.strip() for c in record):
            continue
        if len(record) != len(header):
            raise InputError(
                f"row {line_no} has {len(record)} cells, expected {len(header)}"
            )
        date = record[0].strip()
        try:
            dt.date.fromisoformat(date)
        except ValueError:
            raise InputError(f"invalid ISO date {date!r} at row {line_no}") from None
        if date in first_line:
            raise InputError(
                f"duplicate date {date} at row {line_no} "
                f"(first seen at row {first_line[date]})"
            )
        first_line[date] = line_no

        prices = []
        for ticker, cell in zip(tickers, record[1:]):
            cell = cell.strip()
            if not cell:
                raise InputError(f"missing price at row {line_no}, column {ticker}")
            try:
                value = float(cell)
            except ValueError:
                raise InputError(
                    f"non-numeric price {cell!r} at row {line_no}, column {ticker}"
                ) from None
            if not np.isfinite(value):
                raise InputError(
                    f"non-numeric price {cell!r} at row {line_no}, column {ticker}"
                )
            if value <= 0:
                raise InputError(
                    f"non-positive price at row {line_no}, column {ticker}"
                )
            prices.append(value)
        dates.append(date)
        rows.append(prices)

    if len(rows) < 2:
        raise InputError(f"need at least 2 price rows, got {len(rows)}")

    order = sorted(range(len(dates)), key=dates.__getitem__)
    return PriceMatrix(
        tuple(dates[i] for i in order),
        tuple(tickers),
        np.array([rows[i] for i in order], dtype=float),
    )


def write_prices_csv(prices: PriceMatrix, target: IO[str] | str) -> None:
    """Write ``prices`` in the same CSV layout :func:`load_prices_csv` reads.

    Floats are written with ``repr`` so the file round-trips exactly.
    """
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_prices_csv(prices, fh)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(("date",) + prices.tickers)
    for date, row in zip(prices.dates, prices.values):
        writer.writerow([date] + [repr(float(v)) for v in row])


def daily_returns(prices: PriceMatrix) -> ReturnsMatrix:
    v = prices.values
    return ReturnsMatrix(prices.tickers, (v[1:] - v[:-1]) / v[:-1])


def covariance(returns: ReturnsMatrix) -> CovarianceMatrix:
    """Unbiased sample covariance (denominator ``rows - 1``)."""
    r = returns.values
    if r.shape[0] < 2:
        raise InputError(f"covariance needs at least 2 return rows, got {r.shape[0]}")
    centered = r - r.mean(axis=0)
    cov = centered.T @ centered / (r.shape[0] - 1)
    # exact symmetry; the matmul can differ in the last bit across triangles
    cov = 0.5 * (cov + cov.T)
    return CovarianceMatrix(returns.tickers, cov)


def compounded_returns(prices: PriceMatrix) -> np.ndarray:
    """Total return of each asset over the whole window."""
    v = prices.values
    return v[-1] / v[0] - 1.0
