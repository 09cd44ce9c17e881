"""Turn decoded weights into portfolio statistics and feasibility flags."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from .market_data import CovarianceMatrix
from .qubo import WeightVector

TRADING_DAYS = 252


@dataclass(frozen=True)
class PortfolioMetrics:
    """Statistics of the portfolio actually held (weights normalised by their sum).

    ``sharpe`` is ``None`` when risk is zero but the expected return is not.
    """

    expected_return: float
    risk: float
    sharpe: float | None
    budget_used: float
    budget_violation: float

    def to_dict(self) -> dict:
        out = asdict(self)
        out["expected_return_pct"] = round(100 * self.expected_return, 2)
        out["risk_pct"] = round(100 * self.risk, 2)
        out["sharpe_defined"] = self.sharpe is not None
        return out


@dataclass(frozen=True)
class Feasibility:
    budget_met: bool
    overcap: tuple[str, ...]
    selected: tuple[str, ...]
    budget_violation: float

    def to_dict(self) -> dict:
        return {
            "budget_met": self.budget_met,
            "overcap": list(self.overcap),
            "selected": list(self.selected),
            "budget_violation": self.budget_violation,
        }


def sharpe_ratio(expected_return: float, risk: float) -> float | None:
    if risk > 0:
        return expected_return / risk
    return 0.0 if expected_return == 0 else None


def portfolio_metrics(
    w: WeightVector | Sequence[float],
    er: Sequence[float],
    cov_daily: CovarianceMatrix | np.ndarray,
    annualization: int = TRADING_DAYS,
    budget: float | None = None,
) -> PortfolioMetrics:
    """Expected return, annualised volatility and Sharpe ratio.

    ``er`` is the per-asset return over the scenario window; ``cov_daily``
    is the daily-return covariance, scaled by ``annualization`` for risk.
    ``budget`` only feeds ``budget_violation`` and defaults to ``sum(w)``.
    """
    weights = np.asarray(w.weights if isinstance(w, WeightVector) else w, dtype=float)
    er = np.asarray(er, dtype=float)
    c = cov_daily.values if isinstance(cov_daily, CovarianceMatrix) else np.asarray(cov_daily, float)
    if er.shape != weights.shape or c.shape != (weights.size, weights.size):
        raise InputError("weights, returns and covariance dimensions disagree")
    if annualization < 1:
        raise InputError("annualization must be a positive number of periods")
    total = float(weights.sum())
    if total <= 0:
        raise InputError("empty portfolio: weights sum to zero")

    omega = weights / total
    expected = float(omega @ er)
    variance = float(omega @ c @ omega) * annualization
    risk = math.sqrt(max(variance, 0.0))
    budget = total if budget is None else budget
    return PortfolioMetrics(
        expected_return=expected,
        risk=risk,
        sharpe=sharpe_ratio(expected, risk),
        budget_used=total,
        budget_violation=abs(total - budget) / budget,
    )


def feasibility_check(w: WeightVector, budget: float, tol: float = 1e-9) -> Feasibility:
    weights = np.asarray(w.weights, dtype=float)
    total = float(weights.sum())
    violation = abs(total - budget) / budget
    return Feasibility(
        budget_met=violation <= tol and total > 0,
        overcap=tuple(t for t, x in zip(w.tickers, weights) if x > budget),
        selected=tuple(t for t, x in zip(w.tickers, weights) if x > 0),
        budget_violation=violation,
    )


def equal_weight(tickers: Sequence[str], budget: float = 1.0) -> WeightVector:
    n = len(tickers)
    return WeightVector(tuple(tickers), np.full(n, budget / n))
