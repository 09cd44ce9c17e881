"""Generate a future price scenario from a synthetic history.

The scenario keeps the historical daily-return covariance exactly while
each asset compounds to the analyst's target return over the window.
"""
import numpy as np

from futurepop import ScenarioSpec, compounded_returns, covariance, daily_returns, generate_scenario
from futurepop.synth import synthetic_prices

hist = synthetic_prices(5, 250, seed=1)
print(f"history: {hist.n_days} days x {hist.n_assets} assets ({', '.join(hist.tickers)})")
print("historical window returns:", np.round(compounded_returns(hist), 4))

# analyst views for the next window
targets = [0.08, -0.02, 0.15, 0.0, 0.30]
spec = ScenarioSpec.from_history(hist, targets, seed=7)
scenario = generate_scenario(hist, spec)

print(f"\nscenario: {scenario.dates[0]} .. {scenario.dates[-1]}, starts at the last observed prices")
print("scenario window returns:  ", np.round(compounded_returns(scenario), 12))

gap = covariance(daily_returns(scenario)).values - covariance(daily_returns(hist)).values
print(f"max |covariance difference| = {np.abs(gap).max():.1e}")

# same seed, same scenario
again = generate_scenario(hist, spec)
print("reproducible:", np.array_equal(again.values, scenario.values))
