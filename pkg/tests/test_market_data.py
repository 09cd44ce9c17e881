import io
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from futurepop import (
    InputError,
    PriceMatrix,
    ReturnsMatrix,
    compounded_returns,
    covariance,
    daily_returns,
    load_prices_csv,
    write_prices_csv,
)
from futurepop.pdg import reconstruct_prices


def csv_bytes(text):
    return io.BytesIO(text.encode("utf-8"))


def prices(column_values, tickers=None):
    values = np.array(column_values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    tickers = tickers or [f"T{i}" for i in range(values.shape[1])]
    dates = [f"2020-01-{d + 1:02d}" for d in range(values.shape[0])]
    return PriceMatrix(dates, tickers, values)


class TestLoadPricesCsv:
    def test_direct_parse(self):
        pm = load_prices_csv(csv_bytes("date,AAA\n2020-01-01,100\n2020-01-02,110"))
        assert pm.n_days == 2 and pm.n_assets == 1
        assert pm.tickers == ("AAA",)
        np.testing.assert_array_equal(pm.values, [[100.0], [110.0]])

    def test_zero_price_reports_location(self):
        with pytest.raises(InputError, match="non-positive price at row 2, column AAA"):
            load_prices_csv(csv_bytes("date,AAA\n2020-01-01,0\n2020-01-02,1"))

    def test_rows_are_sorted(self):
        shuffled = load_prices_csv(csv_bytes("date,AAA\n2020-01-02,110\n2020-01-01,100"))
        ordered = load_prices_csv(csv_bytes("date,AAA\n2020-01-01,100\n2020-01-02,110"))
        assert shuffled.dates == ordered.dates
        np.testing.assert_array_equal(shuffled.values, ordered.values)

    @pytest.mark.parametrize(
        "text, message",
        [
            ("date,A,A\n2020-01-01,1,2\n2020-01-02,1,2", "duplicate ticker"),
            ("date,A\n2020-01-01,1\n2020-01-01,2", "duplicate date 2020-01-01 at row 3"),
            ("date,A\n2020-01-01,x\n2020-01-02,2", "non-numeric price 'x' at row 2, column A"),
            ("date,A,B\n2020-01-01,1,\n2020-01-02,2,3", "missing price at row 2, column B"),
            ("date,A\n2020-01-01,1", "at least 2 price rows"),
            ("day,A\n2020-01-01,1\n2020-01-02,2", "first column header"),
            ("date,A\n2020-01-01,-3\n2020-01-02,2", "non-positive price at row 2, column A"),
            ("date,A\n20200101x,1\n2020-01-02,2", "invalid ISO date"),
            ("date,A\n2020-01-01,1,5\n2020-01-02,2", "row 2 has 3 cells"),
        ],
    )
    def test_errors(self, text, message):
        with pytest.raises(InputError, match=message):
            load_prices_csv(csv_bytes(text))

    def test_text_stream_and_path(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("date,A,B\n2020-01-01,1.5,2\n2020-01-02,2,3\n")
        from_path = load_prices_csv(str(path))
        from_text = load_prices_csv(io.StringIO(path.read_text()))
        np.testing.assert_array_equal(from_path.values, from_text.values)

    def test_write_round_trip(self):
        pm = prices([[1.0 / 3, 7.25], [0.1 + 0.2, 1e-5], [123456.789, 2.0]], ["X", "Y"])
        buf = io.StringIO()
        write_prices_csv(pm, buf)
        back = load_prices_csv(io.StringIO(buf.getvalue()))
        assert back.tickers == pm.tickers and back.dates == pm.dates
        np.testing.assert_array_equal(back.values, pm.values)


class TestDailyReturns:
    @pytest.mark.parametrize(
        "column, expected",
        [([100, 110, 99], [0.10, -0.10]), ([50, 50, 50], [0.0, 0.0]), ([100, 200], [1.0])],
    )
    def test_examples(self, column, expected):
        np.testing.assert_allclose(daily_returns(prices(column)).values[:, 0], expected, atol=1e-15)

    def test_row_count(self):
        assert daily_returns(prices(np.ones((7, 3)))).values.shape == (6, 3)


class TestCovariance:
    def test_hand_example(self):
        r = ReturnsMatrix(("a", "b"), np.array([[0.01, 0.02], [0.03, 0.06]]))
        expected = [
            [statistics.covariance([0.01, 0.03], [0.01, 0.03]), statistics.covariance([0.01, 0.03], [0.02, 0.06])],
            [statistics.covariance([0.02, 0.06], [0.01, 0.03]), statistics.covariance([0.02, 0.06], [0.02, 0.06])],
        ]
        np.testing.assert_allclose(expected, [[0.0002, 0.0004], [0.0004, 0.0008]], atol=1e-15)
        np.testing.assert_allclose(covariance(r).values, expected, atol=1e-15)

    def test_single_column_is_variance(self):
        x = [0.01, -0.02, 0.005, 0.03]
        c = covariance(ReturnsMatrix(("a",), np.array(x)[:, None]))
        assert c.values.shape == (1, 1)
        assert c.values[0, 0] == pytest.approx(statistics.variance(x), abs=1e-16)
        assert c.values[0, 0] >= 0

    def test_identical_columns(self):
        x = np.array([0.01, -0.02, 0.005])
        c = covariance(ReturnsMatrix(("a", "b"), np.column_stack([x, x]))).values
        assert c[0, 1] == c[0, 0] == c[1, 1]

    def test_too_few_rows(self):
        with pytest.raises(InputError):
            covariance(ReturnsMatrix(("a",), np.array([[0.1]])))

    def test_symmetric_and_psd(self):
        rng = np.random.default_rng(0)
        c = covariance(ReturnsMatrix(tuple("abcde"), rng.normal(0, 0.01, (30, 5))))
        assert np.array_equal(c.values, c.values.T)
        assert c.is_psd()


class TestCompoundedReturns:
    def test_examples(self):
        assert compounded_returns(prices([100, 110]))[0] == pytest.approx(0.10, abs=1e-15)
        product_oracle = (1 + 0.10) * (1 - 0.10) - 1
        assert compounded_returns(prices([100, 110, 99]))[0] == pytest.approx(product_oracle, abs=1e-15)
        assert product_oracle == pytest.approx(-0.01, abs=1e-15)
        assert compounded_returns(prices([7, 7, 7]))[0] == 0.0


price_arrays = arrays(
    float,
    st.tuples(st.integers(2, 12), st.integers(1, 4)),
    elements=st.floats(0.5, 500.0, allow_nan=False, allow_infinity=False),
)


@settings(max_examples=60, deadline=None)
@given(price_arrays)
def test_round_trip_reconstruction(values):
    pm = prices(values)
    rebuilt = reconstruct_prices(pm.values[0], daily_returns(pm))
    np.testing.assert_allclose(rebuilt.values, pm.values, rtol=1e-12, atol=0)


@settings(max_examples=60, deadline=None)
@given(price_arrays)
def test_compounded_matches_product(values):
    pm = prices(values)
    product = np.prod(1.0 + daily_returns(pm).values, axis=0) - 1.0
    np.testing.assert_allclose(compounded_returns(pm), product, atol=1e-12, rtol=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    arrays(float, st.tuples(st.integers(3, 20), st.integers(1, 4)),
           elements=st.floats(-0.2, 0.2, allow_nan=False)),
    st.floats(-0.5, 0.5),
    st.data(),
)
def test_covariance_shift_invariance(values, shift, data):
    col = data.draw(st.integers(0, values.shape[1] - 1))
    tickers = tuple(f"T{i}" for i in range(values.shape[1]))
    shifted = values.copy()
    shifted[:, col] += shift
    a = covariance(ReturnsMatrix(tickers, values)).values
    b = covariance(ReturnsMatrix(tickers, shifted)).values
    np.testing.assert_allclose(a, b, atol=1e-12, rtol=0)
