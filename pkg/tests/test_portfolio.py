import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from futurepop import InputError, WeightVector, feasibility_check, portfolio_metrics
from futurepop.portfolio import sharpe_ratio


def wv(*weights):
    return WeightVector(tuple(f"T{i}" for i in range(len(weights))), np.array(weights, float))


def test_expected_return():
    m = portfolio_metrics(wv(0.5, 0.5), [0.10, 0.20], np.eye(2) * 1e-4)
    assert m.expected_return == pytest.approx(0.15, abs=1e-15)


def test_annualized_risk():
    m = portfolio_metrics(wv(1.0, 0.0), [0.1, 0.2], [[0.0001, 0.0], [0.0, 1.0]], 252)
    assert m.risk == pytest.approx(0.01 * math.sqrt(252), rel=1e-12)
    assert m.risk == pytest.approx(0.158745, abs=1e-6)


def test_sharpe_values():
    assert sharpe_ratio(0.10, 0.05) == pytest.approx(2.0)
    assert sharpe_ratio(0.0, 0.0) == 0.0
    assert sharpe_ratio(0.1, 0.0) is None


def test_zero_risk_flags_undefined():
    m = portfolio_metrics(wv(1.0), [0.05], [[0.0]])
    assert m.risk == 0.0 and m.sharpe is None
    assert m.to_dict()["sharpe_defined"] is False


def test_empty_portfolio_rejected():
    with pytest.raises(InputError, match="empty"):
        portfolio_metrics(wv(0.0, 0.0), [0.1, 0.2], np.eye(2))


def test_budget_violation_reported():
    m = portfolio_metrics(wv(60.0, 60.0), [0.1, 0.2], np.eye(2), budget=100.0)
    assert m.budget_used == 120.0
    assert m.budget_violation == pytest.approx(0.2)


def test_single_asset_identity():
    var = 0.0003
    m = portfolio_metrics(wv(3.0), [0.07], [[var]], 252)
    assert m.expected_return == 0.07
    assert m.risk == math.sqrt(var * 252)


def test_percent_formatting():
    d = portfolio_metrics(wv(1.0, 1.0), [0.123456, 0.0], np.eye(2) * 1e-4).to_dict()
    assert d["expected_return_pct"] == 6.17


class TestFeasibility:
    def test_met(self):
        f = feasibility_check(wv(50.0, 50.0, 0.0), 100.0)
        assert f.budget_met and f.overcap == () and f.selected == ("T0", "T1")

    def test_saturated(self):
        f = feasibility_check(wv(150.0, 150.0), 100.0)
        assert not f.budget_met
        assert f.overcap == ("T0", "T1")

    def test_zero(self):
        f = feasibility_check(wv(0.0, 0.0), 100.0)
        assert not f.budget_met and f.selected == ()


weights = st.lists(st.floats(0.01, 10.0), min_size=1, max_size=6)


@settings(max_examples=60, deadline=None)
@given(weights, st.floats(0.01, 100.0), st.integers(0, 2**32 - 1))
def test_scale_invariance_and_sharpe_consistency(w, c, seed):
    rng = np.random.default_rng(seed)
    n = len(w)
    er = rng.normal(0.05, 0.1, n)
    a = rng.normal(0, 0.01, (n, n))
    cov = a @ a.T + 1e-6 * np.eye(n)
    base = portfolio_metrics(np.array(w), er, cov)
    scaled = portfolio_metrics(c * np.array(w), er, cov)
    assert scaled.expected_return == pytest.approx(base.expected_return, rel=1e-12, abs=1e-15)
    assert scaled.risk == pytest.approx(base.risk, rel=1e-12)
    assert scaled.sharpe == pytest.approx(base.sharpe, rel=1e-10, abs=1e-12)
    assert abs(base.sharpe * base.risk - base.expected_return) <= 1e-12
