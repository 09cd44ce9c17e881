"""Solve orchestration and automatic reduction of the asset universe.

A single solve (:func:`run_qcs`) builds the QUBO from a price window,
minimises it with the configured backend and decodes the best bitstring.
:func:`reduce_universe` repeats that solve with different seeds, keeps every
asset that received weight at least ``min_count`` times, and slices the
dataset down to those columns. :func:`run_pipeline` chains scenario
generation, reduction and the final solve.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .errors import InputError, NumericalError
from .market_data import PriceMatrix, compounded_returns, covariance, daily_returns
from .pdg import NORMAL_GENERATOR, ScenarioSpec, generate_scenario
from .portfolio import (
    TRADING_DAYS,
    Feasibility,
    PortfolioMetrics,
    feasibility_check,
    portfolio_metrics,
)
from .qubo import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_GAMMA,
    BitLayout,
    QuboProblem,
    WeightVector,
    build_qubo,
    decode_weights,
)
from .solver import SaParams, SampleSet, solve

_MASK64 = (1 << 64) - 1
FINAL_STREAM = 0xFFFFFFFF
DEFAULT_ROUNDS = 5


def derive_seed(master: int, index: int) -> int:
    """SplitMix64 of ``master + (index + 1) * golden_gamma`` (mod 2**64)."""
    z = (master + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class QuboConfig:
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA
    levels: int = 2
    budget: float = 1.0


@dataclass(frozen=True)
class SolverConfig:
    name: str = "sa"
    sa: SaParams = field(default_factory=SaParams)
    workers: int = 1
    num_states: int = 10


@dataclass(frozen=True)
class QcsRunResult:
    weights: WeightVector
    metrics: PortfolioMetrics | None
    feasibility: Feasibility
    best_energy: float
    best_bits: tuple[int, ...]
    selected: frozenset[str]
    seed: int
    solver_metadata: dict[str, Any]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "best_energy": self.best_energy,
            "best_bits": "".join(map(str, self.best_bits)),
            "selected": [t for t in self.weights.tickers if t in self.selected],
            "weights": self.weights.as_dict(),
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
            "feasibility": self.feasibility.to_dict(),
        }


def qubo_for(data: PriceMatrix, qcfg: QuboConfig) -> QuboProblem:
    """QUBO over ``data``: window compounded returns and daily covariance."""
    er = compounded_returns(data)
    cov = covariance(daily_returns(data))
    layout = BitLayout(data.n_assets, qcfg.levels)
    return build_qubo(er, cov, layout, qcfg.alpha, qcfg.beta, qcfg.gamma, qcfg.budget)


def _sample(q: QuboProblem, scfg: SolverConfig, seed: int) -> SampleSet:
    if scfg.name == "sa":
        params = SaParams(**{**asdict(scfg.sa), "seed": seed})
        return solve(q, "sa", params=params, workers=scfg.workers)
    return solve(q, scfg.name, num_states=scfg.num_states, workers=scfg.workers)


def run_qcs(
    data: PriceMatrix,
    solver_config: SolverConfig | None = None,
    qubo_config: QuboConfig | None = None,
    seed: int = 0,
    annualization: int = TRADING_DAYS,
) -> QcsRunResult:
    scfg = solver_config or SolverConfig()
    qcfg = qubo_config or QuboConfig()
    q = qubo_for(data, qcfg)
    samples = _sample(q, scfg, seed)
    best = samples.first

    weights = decode_weights(np.array(best.bits), q.layout, qcfg.budget, data.tickers)
    metrics = None
    if weights.total > 0:
        metrics = portfolio_metrics(
            weights,
            compounded_returns(data),
            covariance(daily_returns(data)),
            annualization,
            budget=qcfg.budget,
        )
    feas = feasibility_check(weights, qcfg.budget)
    return QcsRunResult(
        weights=weights,
        metrics=metrics,
        feasibility=feas,
        best_energy=best.energy,
        best_bits=best.bits,
        selected=frozenset(feas.selected),
        seed=seed,
        solver_metadata=samples.metadata,
    )


@dataclass(frozen=True)
class ReductionLog:
    tickers: tuple[str, ...]
    rounds: tuple[frozenset[str], ...]
    round_seeds: tuple[int, ...]
    round_energies: tuple[float, ...]
    reduced_universe: tuple[str, ...]
    discarded: tuple[str, ...]
    min_count: int = 1

    def selection_counts(self) -> dict[str, int]:
        return {t: sum(t in r for r in self.rounds) for t in self.tickers}

    def to_dict(self) -> dict:
        return {
            "rounds": [[t for t in self.tickers if t in r] for r in self.rounds],
            "round_seeds": list(self.round_seeds),
            "round_energies": list(self.round_energies),
            "selection_counts": self.selection_counts(),
            "min_count": self.min_count,
            "reduced_universe": list(self.reduced_universe),
            "discarded": list(self.discarded),
        }


def reduce_universe(
    data: PriceMatrix,
    rounds: int = DEFAULT_ROUNDS,
    solver_config: SolverConfig | None = None,
    qubo_config: QuboConfig | None = None,
    master_seed: int = 0,
    min_count: int = 1,
    annualization: int = TRADING_DAYS,
    round_workers: int = 1,
) -> tuple[PriceMatrix, ReductionLog, list[QcsRunResult]]:
    """Run ``rounds`` preliminary solves and keep the assets they used.

    Round ``r`` is seeded with ``derive_seed(master_seed, r)``. The log is
    assembled in round order whatever ``round_workers`` is.
    """
    if rounds < 1:
        raise InputError("at least one reduction round is required")
    if not 1 <= min_count <= rounds:
        raise InputError(f"min_count must lie in [1, {rounds}]")
    seeds = [derive_seed(master_seed, r) for r in range(rounds)]

    def one(seed: int) -> QcsRunResult:
        return run_qcs(data, solver_config, qubo_config, seed, annualization)

    if round_workers > 1:
        with ThreadPoolExecutor(max_workers=round_workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]

    selections = tuple(r.selected for r in results)
    counts = {t: sum(t in s for s in selections) for t in data.tickers}
    kept = tuple(t for t in data.tickers if counts[t] >= min_count)
    if not kept:
        raise NumericalError(
            f"universe reduction kept no assets after {rounds} rounds; "
            "every preliminary solve allocated nothing (check gamma and the returns)"
        )
    log = ReductionLog(
        tickers=data.tickers,
        rounds=selections,
        round_seeds=tuple(seeds),
        round_energies=tuple(r.best_energy for r in results),
        reduced_universe=kept,
        discarded=tuple(t for t in data.tickers if t not in kept),
        min_count=min_count,
    )
    return data.select(kept), log, results


@dataclass
class FinalReport:
    tickers: tuple[str, ...]
    final: QcsRunResult
    reduction: ReductionLog
    seeds: dict[str, Any]
    qubo_config: QuboConfig
    solver_config: SolverConfig
    annualization: int
    preliminary: list[QcsRunResult]
    scenario: dict[str, Any] | None = None
    timing: dict[str, float] = field(default_factory=dict)

    def full_weights(self) -> np.ndarray:
        """Final weights over the original universe; discarded assets get 0."""
        held = self.final.weights.as_dict()
        return np.array([held.get(t, 0.0) for t in self.tickers])

    def to_dict(self, config_echo: dict | None = None) -> dict:
        budget = self.qubo_config.budget
        weights = self.full_weights()
        solver_meta = {k: v for k, v in self.final.solver_metadata.items() if k != "wall_time"}
        out = {
            "artifact": {"name": "futurepop", "version": __version__},
            "weights": {
                t: {"amount": float(w), "fraction": float(w) / budget}
                for t, w in zip(self.tickers, weights)
            },
            "metrics": None if self.final.metrics is None else self.final.metrics.to_dict(),
            "feasibility": self.final.feasibility.to_dict(),
            "best_energy": self.final.best_energy,
            "best_bits": "".join(map(str, self.final.best_bits)),
            "reduction": self.reduction.to_dict(),
            "preliminary": [r.to_dict() for r in self.preliminary],
            "solver": solver_meta,
            "qubo": asdict(self.qubo_config),
            "annualization": self.annualization,
            "seeds": self.seeds,
            "scenario": self.scenario,
            "timing": self.timing,
        }
        if config_echo is not None:
            out["config"] = config_echo
        return out


def solve_dataset(
    data: PriceMatrix,
    rounds: int = DEFAULT_ROUNDS,
    solver_config: SolverConfig | None = None,
    qubo_config: QuboConfig | None = None,
    master_seed: int = 0,
    min_count: int = 1,
    annualization: int = TRADING_DAYS,
    round_workers: int = 1,
) -> FinalReport:
    """Reduce the universe of ``data``, then solve once more on what is left."""
    scfg = solver_config or SolverConfig()
    qcfg = qubo_config or QuboConfig()
    t0 = time.perf_counter()
    reduced, log, prelim = reduce_universe(
        data, rounds, scfg, qcfg, master_seed, min_count, annualization, round_workers
    )
    t1 = time.perf_counter()
    final_seed = derive_seed(master_seed, FINAL_STREAM)
    final = run_qcs(reduced, scfg, qcfg, final_seed, annualization)
    t2 = time.perf_counter()
    return FinalReport(
        tickers=data.tickers,
        final=final,
        reduction=log,
        seeds={"master": master_seed, "rounds": list(log.round_seeds), "final": final_seed},
        qubo_config=qcfg,
        solver_config=scfg,
        annualization=annualization,
        preliminary=prelim,
        timing={"reduction_wall_time": t1 - t0, "final_wall_time": t2 - t1},
    )


def run_pipeline(
    hist: PriceMatrix,
    spec: ScenarioSpec,
    rounds: int = DEFAULT_ROUNDS,
    solver_config: SolverConfig | None = None,
    qubo_config: QuboConfig | None = None,
    master_seed: int | None = None,
    min_count: int = 1,
    annualization: int = TRADING_DAYS,
    round_workers: int = 1,
) -> tuple[PriceMatrix, FinalReport]:
    """Scenario generation, universe reduction and final solve.

    The scenario is seeded by ``spec.seed``; the solves by ``master_seed``
    (defaults to ``spec.seed``). Returns the generated scenario with the
    report.
    """
    master = spec.seed if master_seed is None else master_seed
    t0 = time.perf_counter()
    scenario = generate_scenario(hist, spec)
    t1 = time.perf_counter()
    report = solve_dataset(
        scenario, rounds, solver_config, qubo_config, master,
        min_count, annualization, round_workers,
    )
    report.seeds["scenario"] = spec.seed
    report.scenario = {
        "generator": NORMAL_GENERATOR,
        "horizon_returns": spec.horizon_returns,
        "target_returns": dict(zip(hist.tickers, map(float, spec.target_returns))),
        "initial_values": dict(zip(hist.tickers, map(float, spec.initial_values))),
    }
    report.timing["scenario_wall_time"] = t1 - t0
    return scenario, report
