import itertools

import numpy as np
import pytest

from futurepop.qubo import BitLayout, build_qubo

ACCEPTANCE_LINES: list[str] = []


def direct_energy(bits, er, cov, levels, alpha, beta, gamma):
    """Three-term objective evaluated straight from the weights, no QUBO."""
    n = len(er)
    omega = [sum(2.0 ** (-d) * bits[i * levels + d] for d in range(levels)) for i in range(n)]
    ret = sum(er[i] * omega[i] for i in range(n))
    risk = sum(cov[i][j] * omega[i] * omega[j] for i in range(n) for j in range(n))
    return -alpha * ret + beta * risk + gamma * (sum(omega) - 1.0) ** 2


def all_bitstrings(n):
    return [tuple(b) for b in itertools.product((0, 1), repeat=n)]


def random_instance(rng, max_vars=16, multipliers=None):
    """Random (er, cov, layout, alpha, beta, gamma) with N*p <= max_vars."""
    levels = int(rng.integers(1, 4))
    n_assets = int(rng.integers(1, max_vars // levels + 1))
    er = rng.uniform(-0.3, 0.6, n_assets)
    a = rng.normal(scale=0.05, size=(n_assets, n_assets))
    cov = a @ a.T
    if multipliers is None:
        alpha, beta, gamma = rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0), rng.uniform(0.5, 12.0)
    else:
        alpha, beta, gamma = multipliers
    return er, cov, BitLayout(n_assets, levels), alpha, beta, gamma


def random_qubo(rng, max_vars=16, multipliers=None):
    er, cov, layout, alpha, beta, gamma = random_instance(rng, max_vars, multipliers)
    return build_qubo(er, cov, layout, alpha, beta, gamma), (er, cov, layout, alpha, beta, gamma)


@pytest.fixture
def acceptance_line():
    def record(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
