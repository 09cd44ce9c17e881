"""QUBO minimisers behind a common ``solve(q, backend=...)`` entry point.

``exhaustive`` enumerates every bitstring and is the ground-truth oracle for
small problems. ``sa`` is single-bit-flip Metropolis annealing with a
geometric inverse-temperature schedule. Both return a :class:`SampleSet`
sorted by energy, ties broken by the lexicographically smaller bitstring.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numba
import numpy as np

from .errors import BackendNotBundledError, ConfigError, InputError
from .qubo import QuboProblem, energy

EXHAUSTIVE_MAX_VARS = 24
_CHUNK_BITS = 16


@dataclass(frozen=True)
class Sample:
    bits: tuple[int, ...]
    energy: float
    occurrences: int = 1


@dataclass
class SampleSet:
    records: list[Sample]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def first(self) -> Sample:
        return self.records[0]

    @property
    def total_reads(self) -> int:
        return sum(r.occurrences for r in self.records)

    def bits_array(self) -> np.ndarray:
        return np.array([r.bits for r in self.records], dtype=np.int8)


def _records(states: np.ndarray, energies: np.ndarray, counts: np.ndarray) -> list[Sample]:
    """Sort rows by (energy, bitstring). ``states`` must already be lex-sorted."""
    order = np.lexsort((np.arange(len(energies)), energies))
    return [
        Sample(tuple(int(b) for b in states[i]), float(energies[i]), int(counts[i]))
        for i in order
    ]


def _enumerate_bits(start: int, stop: int, n: int) -> np.ndarray:
    # bit v is the (n-1-v)-th binary digit, so integer order equals lexicographic order
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8)


def solve_exhaustive(q: QuboProblem, num_states: int = 10) -> SampleSet:
    """Evaluate all ``2**n`` bitstrings; keep the ``num_states`` lowest."""
    n = q.n_vars
    if n > EXHAUSTIVE_MAX_VARS:
        raise ConfigError(
            f"exhaustive solver is limited to {EXHAUSTIVE_MAX_VARS} variables, got {n}"
        )
    t0 = time.perf_counter()
    total = 1 << n
    chunk = 1 << min(n, _CHUNK_BITS)

    best_idx = np.empty(0, dtype=np.int64)
    best_e = np.empty(0)
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        e = energy(q, _enumerate_bits(start, stop, n))
        idx = np.concatenate([best_idx, np.arange(start, stop, dtype=np.int64)])
        e = np.concatenate([best_e, e])
        keep = np.lexsort((idx, e))[:num_states]
        best_idx, best_e = idx[keep], e[keep]

    order = np.argsort(best_idx)
    states = np.vstack([_enumerate_bits(int(i), int(i) + 1, n) for i in best_idx[order]])
    records = _records(states, best_e[order], np.ones(len(order), dtype=np.int64))
    return SampleSet(
        records,
        {
            "solver": "exhaustive",
            "parameters": {"num_states": num_states},
            "seed": None,
            "states_evaluated": total,
            "wall_time": time.perf_counter() - t0,
        },
    )


@dataclass(frozen=True)
class SaParams:
    num_reads: int = 64
    sweeps: int = 1000
    beta_min: float | None = None
    beta_max: float | None = None
    seed: int = 0
    schedule: str = "geometric"

    def __post_init__(self):
        if self.num_reads < 1:
            raise ConfigError("num_reads must be at least 1")
        if self.sweeps < 1:
            raise ConfigError("sweeps must be at least 1")
        if self.schedule != "geometric":
            raise ConfigError(f"unsupported schedule {self.schedule!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        lo, hi = self.beta_min, self.beta_max
        if lo is not None and not lo > 0:
            raise ConfigError("beta_min must be positive")
        if lo is not None and hi is not None and not lo < hi:
            raise ConfigError("beta_min must be smaller than beta_max")


def flip_bounds(q: QuboProblem) -> np.ndarray:
    """Per-variable upper bound on ``|dE|`` for a single bit flip."""
    return np.abs(q.linear) + np.abs(q.symmetric()).sum(axis=1)


def default_beta_range(q: QuboProblem) -> tuple[float, float]:
    """``(ln 2 / dE_max, ln 100 / dE_min)``.

    ``dE_max`` is the largest per-variable flip bound, so the hottest sweep
    accepts the worst uphill move with probability 1/2. ``dE_min`` is the
    smallest non-zero coefficient magnitude; at the coldest sweep a move
    costing that much is accepted with probability 1/100.
    """
    bounds = flip_bounds(q)
    coeffs = np.abs(np.concatenate([q.linear, q.quadratic[np.triu_indices(q.n_vars, 1)]]))
    coeffs = coeffs[coeffs > 0]
    if coeffs.size == 0:
        raise InputError("cannot derive a temperature range for an all-zero QUBO")
    beta_min = math.log(2.0) / float(bounds.max())
    beta_max = math.log(100.0) / float(coeffs.min())
    if not beta_min < beta_max:
        beta_min, beta_max = beta_min / 10.0, beta_max * 10.0
    return beta_min, beta_max


@numba.njit(cache=True, nogil=True)
def _anneal(linear, coupling, state, betas, uniforms):
    n = linear.shape[0]
    local = linear.copy()
    for v in range(n):
        if state[v]:
            for u in range(n):
                local[u] += coupling[u, v]
    for s in range(betas.shape[0]):
        beta = betas[s]
        for v in range(n):
            delta = local[v] if state[v] == 0 else -local[v]
            if delta <= 0.0 or uniforms[s, v] < math.exp(-beta * delta):
                sign = 1.0 if state[v] == 0 else -1.0
                state[v] = 1 - state[v]
                for u in range(n):
                    local[u] += sign * coupling[u, v]
    return state


def read_rng(seed: int, read_index: int) -> np.random.Generator:
    """Independent stream for one read; unaffected by the total read count."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(read_index,))))


def solve_sa(q: QuboProblem, params: SaParams | None = None, workers: int = 1) -> SampleSet:
    """Simulated annealing, one independent chain per read.

    Each read starts from a uniformly random bitstring and performs
    ``params.sweeps`` in-order sweeps over all variables, one geometric
    temperature step per sweep. The final state of every read is recorded.
    ``workers`` only changes wall time, never the result.
    """
    params = params or SaParams()
    t0 = time.perf_counter()
    n = q.n_vars

    if params.beta_min is not None and params.beta_max is not None:
        beta_min, beta_max = params.beta_min, params.beta_max
    elif q.is_zero():
        beta_min, beta_max = 1.0, 1.0
    else:
        auto_min, auto_max = default_beta_range(q)
        beta_min = params.beta_min if params.beta_min is not None else auto_min
        beta_max = params.beta_max if params.beta_max is not None else auto_max
        if not beta_min < beta_max:
            raise ConfigError(f"beta range ({beta_min}, {beta_max}) is empty")
    betas = np.geomspace(beta_min, beta_max, params.sweeps)

    linear = np.ascontiguousarray(q.linear)
    coupling = np.ascontiguousarray(q.symmetric())

    def one_read(index: int) -> np.ndarray:
        rng = read_rng(params.seed, index)
        state = rng.integers(0, 2, size=n).astype(np.int8)
        uniforms = rng.random((params.sweeps, n))
        return _anneal(linear, coupling, state, betas, uniforms)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            finals = list(pool.map(one_read, range(params.num_reads)))
    else:
        finals = [one_read(i) for i in range(params.num_reads)]

    states, counts = np.unique(np.vstack(finals), axis=0, return_counts=True)
    records = _records(states, energy(q, states), counts)
    return SampleSet(
        records,
        {
            "solver": "sa",
            "parameters": {**asdict(params), "beta_min": beta_min, "beta_max": beta_max},
            "seed": params.seed,
            "wall_time": time.perf_counter() - t0,
        },
    )


def _solve_dwave(q: QuboProblem, **options) -> SampleSet:
    raise BackendNotBundledError(
        "backend 'dwave' is not bundled: remote annealer access is not part of this package"
    )


def _solve_sa_backend(q: QuboProblem, params: SaParams | None = None, workers: int = 1, **options) -> SampleSet:
    overrides = {k: v for k, v in options.items() if k in SaParams.__dataclass_fields__}
    if overrides:
        params = SaParams(**{**asdict(params or SaParams()), **overrides})
    return solve_sa(q, params, workers=workers)


def _solve_exhaustive_backend(q: QuboProblem, num_states: int = 10, **_ignored) -> SampleSet:
    return solve_exhaustive(q, num_states=num_states)


BACKENDS: dict[str, Callable[..., SampleSet]] = {
    "exhaustive": _solve_exhaustive_backend,
    "sa": _solve_sa_backend,
    "dwave": _solve_dwave,
}


def solve(q: QuboProblem, backend: str = "sa", **options) -> SampleSet:
    """Dispatch to a named backend.

    ``options`` are passed through: ``params``/``workers`` or individual
    :class:`SaParams` fields for ``sa``; ``num_states`` for ``exhaustive``.
    Options that a backend does not use are ignored.
    """
    try:
        fn = BACKENDS[backend]
    except KeyError:
        raise ConfigError(
            f"unknown solver backend {backend!r}; choose from {sorted(BACKENDS)}"
        ) from None
    return fn(q, **options)
