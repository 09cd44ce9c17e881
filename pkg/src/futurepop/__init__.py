"""Portfolio selection on generated future scenarios, posed as a QUBO."""

__version__ = "0.1.0"

from .errors import (
    BackendNotBundledError,
    ConfigError,
    FuturePopError,
    InputError,
    NumericalError,
)
from .market_data import (
    CovarianceMatrix,
    PriceMatrix,
    ReturnsMatrix,
    compounded_returns,
    covariance,
    daily_returns,
    load_prices_csv,
    write_prices_csv,
)
from .pdg import (
    CholeskyFactor,
    ScenarioSpec,
    cholesky,
    find_bias,
    fit_covariance_transform,
    generate_scenario,
    load_targets_csv,
    reconstruct_prices,
    sample_standard_normal,
)
from .qubo import BitLayout, QuboProblem, WeightVector, build_qubo, decode_weights, energy
from .solver import SampleSet, SaParams, default_beta_range, solve, solve_exhaustive, solve_sa
from .portfolio import PortfolioMetrics, feasibility_check, portfolio_metrics
from .aur import (
    FinalReport,
    QuboConfig,
    ReductionLog,
    SolverConfig,
    reduce_universe,
    run_pipeline,
    run_qcs,
    solve_dataset,
)
