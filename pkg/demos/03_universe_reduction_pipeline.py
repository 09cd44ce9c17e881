"""Full pipeline: scenario, universe reduction, final solve, report.

Several seeded solver rounds each pick a portfolio; only assets chosen in
at least one round survive into the final, smaller problem.
"""
import json

from futurepop import (
    QuboConfig,
    SaParams,
    ScenarioSpec,
    SolverConfig,
    compounded_returns,
    covariance,
    daily_returns,
    portfolio_metrics,
    run_pipeline,
)
from futurepop.portfolio import equal_weight
from futurepop.synth import synthetic_prices, synthetic_targets

hist = synthetic_prices(10, 250, seed=21)
targets = synthetic_targets(10, seed=21)
spec = ScenarioSpec.from_history(hist, targets, seed=5)

solver = SolverConfig("sa", SaParams(num_reads=64, sweeps=1000))
# the risk term uses daily covariance; scaling beta by the window length
# weighs risk against window returns and spreads the allocation
qcfg = QuboConfig(beta=2.0 * spec.horizon_returns, levels=3)
scenario, report = run_pipeline(hist, spec, rounds=5, solver_config=solver, qubo_config=qcfg)

log = report.reduction
for r, (picked, e) in enumerate(zip(log.rounds, log.round_energies)):
    print(f"round {r}: E = {e:+.5f}  picked {sorted(picked)}")
print(f"kept {len(log.reduced_universe)}/{len(hist.tickers)}: {list(log.reduced_universe)}")
print(f"discarded: {list(log.discarded)}")

weights = dict(zip(report.tickers, report.full_weights()))
print("\nfinal weights:", {t: float(w) for t, w in weights.items() if w})
print("final energy", round(report.final.best_energy, 6))

er, cov = compounded_returns(scenario), covariance(daily_returns(scenario))
solved = portfolio_metrics(report.full_weights(), er, cov)
flat = portfolio_metrics(equal_weight(scenario.tickers), er, cov)
print(f"Sharpe {solved.sharpe:.2f} vs equal weight {flat.sharpe:.2f}")

d = report.to_dict()
print("\nreport keys:", ", ".join(d))
print(json.dumps(d["metrics"], indent=2))
