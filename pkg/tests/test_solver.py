import math

import numpy as np
import pytest

from futurepop import (
    BackendNotBundledError,
    BitLayout,
    ConfigError,
    InputError,
    QuboProblem,
    SaParams,
    build_qubo,
    default_beta_range,
    energy,
    solve,
    solve_exhaustive,
    solve_sa,
)

from conftest import all_bitstrings, random_qubo


def one_var(coeff):
    return QuboProblem([coeff], [[0.0]], 0.0, BitLayout(1, 1), 1.0, 1.0, 0.0)


def tiny_example():
    return build_qubo([0.1], [[0.04]], BitLayout(1, 1), 1, 1, 1)


class TestExhaustive:
    def test_two_state_example(self):
        result = solve_exhaustive(tiny_example())
        assert result.first.bits == (1,)
        assert result.first.energy == pytest.approx(-0.06, abs=1e-12)
        assert [r.bits for r in result.records] == [(1,), (0,)]

    def test_zero_qubo_lexicographic_tie(self):
        q = QuboProblem(np.zeros(3), np.zeros((3, 3)), 0.0, BitLayout(3, 1))
        result = solve_exhaustive(q)
        assert result.first.bits == (0, 0, 0) and result.first.energy == 0.0
        assert [r.bits for r in result.records] == all_bitstrings(3)

    def test_random_probe(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            q, _ = random_qubo(rng)
            best = solve_exhaustive(q).first.energy
            probes = rng.integers(0, 2, (1000, q.n_vars))
            assert np.all(best <= energy(q, probes) + 1e-12)

    def test_top_states_sorted(self):
        q, _ = random_qubo(np.random.default_rng(2), max_vars=10)
        records = solve_exhaustive(q, num_states=10).records
        keys = [(r.energy, r.bits) for r in records]
        assert keys == sorted(keys)
        assert len(records) == min(10, 2**q.n_vars)

    def test_guard(self):
        q = build_qubo(np.zeros(25), np.eye(25), BitLayout(25, 1))
        with pytest.raises(ConfigError, match="24"):
            solve_exhaustive(q)

    def test_chunked_enumeration(self):
        # 18 variables spans several enumeration chunks
        rng = np.random.default_rng(3)
        er = rng.uniform(-0.1, 0.4, 9)
        q = build_qubo(er, np.diag(rng.uniform(0.01, 0.05, 9)), BitLayout(9, 2))
        result = solve_exhaustive(q)
        all_e = energy(q, np.array(all_bitstrings(18), dtype=np.int8))
        assert result.first.energy == pytest.approx(all_e.min(), abs=1e-12)
        assert result.metadata["states_evaluated"] == 2**18


class TestSimulatedAnnealing:
    def test_deterministic(self):
        q, _ = random_qubo(np.random.default_rng(4))
        a = solve_sa(q, SaParams(num_reads=16, sweeps=200, seed=9))
        b = solve_sa(q, SaParams(num_reads=16, sweeps=200, seed=9))
        assert a.records == b.records

    def test_single_variable(self):
        result = solve_sa(one_var(-1.0), SaParams(num_reads=20, sweeps=50, seed=1))
        assert len(result.records) == 1
        assert result.first.bits == (1,) and result.first.occurrences == 20

    def test_parallel_reads_identical(self):
        q, _ = random_qubo(np.random.default_rng(5))
        params = SaParams(num_reads=12, sweeps=100, seed=3)
        assert solve_sa(q, params, workers=1).records == solve_sa(q, params, workers=4).records

    def test_seed_isolation(self):
        q, _ = random_qubo(np.random.default_rng(6))
        small = solve_sa(q, SaParams(num_reads=4, sweeps=100, seed=8))
        large = solve_sa(q, SaParams(num_reads=9, sweeps=100, seed=8))
        small_counts = {r.bits: r.occurrences for r in small.records}
        large_counts = {r.bits: r.occurrences for r in large.records}
        for bits, count in small_counts.items():
            assert large_counts.get(bits, 0) >= count

    def test_energy_audit_and_counts(self):
        q, _ = random_qubo(np.random.default_rng(7))
        result = solve_sa(q, SaParams(num_reads=30, sweeps=100, seed=2))
        assert result.total_reads == 30
        for r in result.records:
            assert abs(r.energy - energy(q, r.bits)) <= 1e-9
        keys = [(r.energy, r.bits) for r in result.records]
        assert keys == sorted(keys)

    def test_oracle_dominance(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            q, _ = random_qubo(rng)
            best = solve_exhaustive(q).first.energy
            sa = solve_sa(q, SaParams(num_reads=8, sweeps=100, seed=1))
            assert all(best <= r.energy + 1e-12 for r in sa.records)

    def test_zero_qubo(self):
        q = QuboProblem(np.zeros(2), np.zeros((2, 2)), 0.0, BitLayout(2, 1))
        assert solve_sa(q, SaParams(num_reads=3, sweeps=5)).first.energy == 0.0

    def test_params_validation(self):
        with pytest.raises(ConfigError):
            SaParams(num_reads=0)
        with pytest.raises(ConfigError):
            SaParams(beta_min=2.0, beta_max=1.0)


class TestBetaRange:
    def test_single_variable(self):
        lo, hi = default_beta_range(one_var(-1.0))
        assert lo == pytest.approx(math.log(2)) and hi == pytest.approx(math.log(100))
        assert lo < hi

    def test_scale_covariance(self):
        q, (er, cov, layout, a, b, g) = random_qubo(np.random.default_rng(9))
        q10 = build_qubo(er, cov, layout, 10 * a, 10 * b, 10 * g)
        lo, hi = default_beta_range(q)
        lo10, hi10 = default_beta_range(q10)
        assert lo10 == pytest.approx(0.1 * lo, rel=1e-12)
        assert hi10 == pytest.approx(0.1 * hi, rel=1e-12)

    def test_hot_end_acceptance(self):
        from futurepop.solver import flip_bounds

        q, _ = random_qubo(np.random.default_rng(10))
        lo, _ = default_beta_range(q)
        assert math.exp(-lo * flip_bounds(q).max()) == pytest.approx(0.5, rel=1e-12)

    def test_all_zero(self):
        with pytest.raises(InputError):
            default_beta_range(QuboProblem(np.zeros(2), np.zeros((2, 2)), 0.0, BitLayout(2, 1)))


class TestBackends:
    def test_dispatch(self):
        q = tiny_example()
        assert solve(q, "exhaustive").metadata["solver"] == "exhaustive"
        assert solve(q, "sa", num_reads=4, sweeps=10).metadata["solver"] == "sa"

    def test_dwave_stub(self):
        with pytest.raises(BackendNotBundledError, match="not bundled"):
            solve(tiny_example(), "dwave")

    def test_unknown(self):
        with pytest.raises(ConfigError, match="unknown solver backend"):
            solve(tiny_example(), "tabu")
