"""Command-line front end.

    futurepop synth    --n_assets 5 --days 250 --seed 1 --out data/
    futurepop predict  --hist data/history.csv --targets data/targets.csv --out run/
    futurepop solve    --dataset run/scenario.csv --out run/
    futurepop pipeline --config run.ini
    futurepop qubo     --dataset run/scenario.csv --out run/

Configuration is a flat ``key = value`` file (``--config``); every key can
also be given as ``--key value`` and the command line wins. A report JSON
is accepted as ``--config`` too, in which case its echoed config is used.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 configuration
error. Failures print one JSON line to stderr.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .aur import QuboConfig, SolverConfig, qubo_for, run_pipeline, solve_dataset
from .errors import ConfigError, FuturePopError, NumericalError
from .market_data import load_prices_csv, write_prices_csv
from .pdg import ScenarioSpec, generate_scenario, load_targets_csv, write_targets_csv
from .qubo import dump_qubo
from .solver import EXHAUSTIVE_MAX_VARS, SaParams
from .synth import synthetic_prices, synthetic_targets

COMMANDS = ("predict", "solve", "pipeline", "synth", "qubo")


def _u64(text) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise ValueError("must be an unsigned 64-bit integer")
    return value


def _in_range(kind: Callable, lo=None, hi=None, strict_lo=False):
    def parse(text):
        value = kind(text)
        if lo is not None and (value <= lo if strict_lo else value < lo):
            raise ValueError(f"must be {'>' if strict_lo else '>='} {lo}")
        if hi is not None and value > hi:
            raise ValueError(f"must be <= {hi}")
        return value
    return parse


@dataclass(frozen=True)
class Key:
    parse: Callable[[Any], Any]
    default: Any
    help: str


KEYS: dict[str, Key] = {
    "hist": Key(str, None, "historical price CSV"),
    "targets": Key(str, None, "expected-return CSV (ticker,expected_return)"),
    "dataset": Key(str, None, "price CSV to solve directly (solve, qubo)"),
    "alpha": Key(_in_range(float, 0.0), 1.0, "return multiplier"),
    "beta": Key(_in_range(float, 0.0), 1.0, "risk multiplier"),
    "gamma": Key(_in_range(float, 0.0), 10.0, "budget penalty multiplier"),
    "levels": Key(_in_range(int, 1, 8), 2, "proportion levels per asset"),
    "budget": Key(_in_range(float, 0.0, strict_lo=True), 1.0, "total budget"),
    "horizon": Key(_in_range(int, 2), None, "future daily returns (default: history length)"),
    "seed": Key(_u64, 0, "master seed"),
    "solver": Key(str, "sa", "solver backend: sa | exhaustive"),
    "sa.num_reads": Key(_in_range(int, 1), 64, "annealing reads"),
    "sa.sweeps": Key(_in_range(int, 1), 1000, "sweeps per read"),
    "sa.beta_min": Key(_in_range(float, 0.0, strict_lo=True), None, "hot inverse temperature"),
    "sa.beta_max": Key(_in_range(float, 0.0, strict_lo=True), None, "cold inverse temperature"),
    "sa.seed": Key(_u64, None, "solver master seed (default: seed)"),
    "aur.rounds": Key(_in_range(int, 1, 100), 5, "preliminary reduction rounds"),
    "aur.min_count": Key(_in_range(int, 1, 100), 1, "rounds an asset must be picked in"),
    "annualization": Key(_in_range(int, 1), 252, "periods per year for risk"),
    "workers": Key(_in_range(int, 1), 1, "threads for reads and rounds"),
    "n_assets": Key(_in_range(int, 1), 5, "synth: number of assets"),
    "days": Key(_in_range(int, 3), 250, "synth: number of price rows"),
}
# execution settings that cannot change results are left out of the report echo
NOT_ECHOED = {"out", "config", "workers"}


def _read_config_file(path: str) -> dict[str, str]:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config JSON is malformed: {exc}") from None
        data = data.get("config", data)
        return {k: v for k, v in data.items() if v is not None}
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"config file is malformed: {exc}") from None
    return dict(parser["run"])


def resolve_config(file_values: dict[str, Any], cli_values: dict[str, Any]) -> dict[str, Any]:
    unknown = sorted(set(file_values) - set(KEYS) - NOT_ECHOED)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    merged = {**file_values, **{k: v for k, v in cli_values.items() if v is not None}}
    config = {}
    for name, key in KEYS.items():
        raw = merged.get(name)
        if raw is None:
            config[name] = key.default
            continue
        try:
            config[name] = key.parse(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config key {name}={raw!r}: {exc}") from None
    if config["sa.beta_min"] is not None and config["sa.beta_max"] is not None:
        if not config["sa.beta_min"] < config["sa.beta_max"]:
            raise ConfigError("sa.beta_min must be smaller than sa.beta_max")
    if config["aur.min_count"] > config["aur.rounds"]:
        raise ConfigError("aur.min_count cannot exceed aur.rounds")
    return config


def _require_file(config: dict, key: str) -> str:
    path = config.get(key)
    if not path:
        raise ConfigError(f"missing required config key {key!r}")
    if not os.path.exists(path):
        raise ConfigError(f"{key} file not found: {path}")
    return path


def _configs(config: dict) -> tuple[QuboConfig, SolverConfig]:
    qcfg = QuboConfig(config["alpha"], config["beta"], config["gamma"],
                      config["levels"], config["budget"])
    sa = SaParams(
        num_reads=config["sa.num_reads"],
        sweeps=config["sa.sweeps"],
        beta_min=config["sa.beta_min"],
        beta_max=config["sa.beta_max"],
    )
    return qcfg, SolverConfig(config["solver"], sa, workers=config["workers"])


def _check_solver_size(config: dict, n_assets: int):
    n_vars = n_assets * config["levels"]
    if config["solver"] == "exhaustive" and n_vars > EXHAUSTIVE_MAX_VARS:
        raise ConfigError(
            f"exhaustive solver guard: N*p = {n_vars} exceeds {EXHAUSTIVE_MAX_VARS}"
        )
    if config["solver"] not in ("sa", "exhaustive", "dwave"):
        raise ConfigError(f"unknown solver backend {config['solver']!r}")


def _echo(config: dict) -> dict:
    return {k: v for k, v in config.items() if k not in NOT_ECHOED}


def _write_json(obj, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False, allow_nan=False)
        fh.write("\n")


def _scenario_spec(config: dict, hist):
    targets = load_targets_csv(_require_file(config, "targets"), hist.tickers)
    return ScenarioSpec.from_history(hist, targets, config["horizon"], config["seed"])


def _solver_seed(config: dict) -> int:
    return config["seed"] if config["sa.seed"] is None else config["sa.seed"]


def cmd_predict(config: dict, out: str) -> dict:
    hist = load_prices_csv(_require_file(config, "hist"))
    scenario = generate_scenario(hist, _scenario_spec(config, hist))
    path = os.path.join(out, "scenario.csv")
    write_prices_csv(scenario, path)
    return {"scenario": path}


def cmd_solve(config: dict, out: str) -> dict:
    data = load_prices_csv(_require_file(config, "dataset"))
    _check_solver_size(config, data.n_assets)
    qcfg, scfg = _configs(config)
    report = solve_dataset(
        data, config["aur.rounds"], scfg, qcfg, _solver_seed(config),
        config["aur.min_count"], config["annualization"], config["workers"],
    )
    path = os.path.join(out, "report.json")
    _write_json(report.to_dict(_echo(config)), path)
    return {"report": path}


def cmd_pipeline(config: dict, out: str) -> dict:
    hist = load_prices_csv(_require_file(config, "hist"))
    _check_solver_size(config, hist.n_assets)
    spec = _scenario_spec(config, hist)
    qcfg, scfg = _configs(config)
    scenario, report = run_pipeline(
        hist, spec, config["aur.rounds"], scfg, qcfg, _solver_seed(config),
        config["aur.min_count"], config["annualization"], config["workers"],
    )
    scenario_path = os.path.join(out, "scenario.csv")
    report_path = os.path.join(out, "report.json")
    write_prices_csv(scenario, scenario_path)
    _write_json(report.to_dict(_echo(config)), report_path)
    return {"scenario": scenario_path, "report": report_path}


def cmd_synth(config: dict, out: str) -> dict:
    prices = synthetic_prices(config["n_assets"], config["days"], config["seed"])
    hist_path = os.path.join(out, "history.csv")
    targets_path = os.path.join(out, "targets.csv")
    write_prices_csv(prices, hist_path)
    write_targets_csv(prices.tickers, synthetic_targets(prices.n_assets, config["seed"]), targets_path)
    return {"hist": hist_path, "targets": targets_path}


def cmd_qubo(config: dict, out: str) -> dict:
    key = "dataset" if config.get("dataset") else "hist"
    data = load_prices_csv(_require_file(config, key))
    qcfg, _ = _configs(config)
    path = os.path.join(out, "qubo.txt")
    with open(path, "w", encoding="utf-8") as fh:
        dump_qubo(qubo_for(data, qcfg), fh)
    return {"qubo": path}


HANDLERS = {
    "predict": cmd_predict,
    "solve": cmd_solve,
    "pipeline": cmd_pipeline,
    "synth": cmd_synth,
    "qubo": cmd_qubo,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"command line: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="futurepop", description=__doc__.split("\n\n")[0], allow_abbrev=False)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key = value file, or a report JSON")
    parser.add_argument("--out", default=".", help="output directory")
    for name, key in KEYS.items():
        parser.add_argument(f"--{name}", dest=name.replace(".", "__"), default=None,
                            metavar=name.split(".")[-1].upper(), help=key.help)
    return parser


def run(argv: list[str] | None = None) -> dict:
    args = build_parser().parse_args(argv)
    file_values = _read_config_file(args.config) if args.config else {}
    cli_values = {name: getattr(args, name.replace(".", "__")) for name in KEYS}
    config = resolve_config(file_values, cli_values)
    out = args.out
    os.makedirs(out, exist_ok=True)
    return HANDLERS[args.command](config, out)


def main(argv: list[str] | None = None) -> int:
    try:
        written = run(argv)
    except FuturePopError as exc:
        _fail(exc.kind, exc.exit_code, str(exc))
        return exc.exit_code
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        _fail(NumericalError.kind, NumericalError.exit_code, str(exc))
        return NumericalError.exit_code
    except OSError as exc:
        _fail("input", 2, str(exc))
        return 2
    print(json.dumps(written))
    return 0


def _fail(kind: str, code: int, message: str):
    print(json.dumps({"error": kind, "exit_code": code, "message": message}), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
