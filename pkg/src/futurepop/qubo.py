"""Binary quadratic model of the discretised mean-variance problem.

Each asset ``i`` owns ``p`` bits; bit ``d`` is worth ``2**-d`` of the
budget, so the normalised weight of asset ``i`` is

    omega_i(x) = sum_d 2**-d * x[i*p + d].

The energy to minimise is

    E(x) = -alpha * sum_i er_i * omega_i
           + beta * sum_ij cov_ij * omega_i * omega_j
           + gamma * (sum_i omega_i - 1)**2

All coefficients are computed with the budget normalised to 1; the real
budget only enters when decoding weights.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import IO, Iterator, Sequence

import numpy as np

from .errors import InputError
from .market_data import CovarianceMatrix

DEFAULT_ALPHA = 1.0
DEFAULT_BETA = 1.0
DEFAULT_GAMMA = 10.0


@dataclass(frozen=True)
class BitLayout:
    """Variable ``v = i * levels + d`` encodes level ``d`` of asset ``i``."""

    n_assets: int
    levels: int

    def __post_init__(self):
        if self.n_assets < 1:
            raise InputError("layout needs at least one asset")
        if self.levels < 1:
            raise InputError("layout needs at least one proportion level")

    @property
    def n_vars(self) -> int:
        return self.n_assets * self.levels

    def level_value(self, d: int) -> float:
        return 2.0 ** (-d)

    def index(self, asset: int, level: int) -> int:
        return asset * self.levels + level

    def encoding_matrix(self) -> np.ndarray:
        """``(N, N*p)`` matrix ``B`` with ``omega = B @ x``."""
        b = np.zeros((self.n_assets, self.n_vars))
        values = 2.0 ** -np.arange(self.levels)
        for i in range(self.n_assets):
            b[i, i * self.levels:(i + 1) * self.levels] = values
        return b

    @property
    def max_weight(self) -> float:
        """Normalised weight of an asset with every bit set."""
        return 2.0 - 2.0 ** (1 - self.levels)


@dataclass(frozen=True)
class WeightVector:
    tickers: tuple[str, ...]
    weights: np.ndarray

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def as_dict(self) -> dict[str, float]:
        return {t: float(w) for t, w in zip(self.tickers, self.weights)}


@dataclass(frozen=True)
class QuboProblem:
    """Upper-triangular QUBO plus the metadata needed to interpret it.

    ``quadratic`` is a dense ``n x n`` array whose only non-zero entries sit
    strictly above the diagonal.
    """

    linear: np.ndarray
    quadratic: np.ndarray
    offset: float
    layout: BitLayout
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA
    budget: float = 1.0

    def __post_init__(self):
        lin = np.array(self.linear, dtype=float)
        quad = np.array(self.quadratic, dtype=float)
        n = self.layout.n_vars
        if lin.shape != (n,) or quad.shape != (n, n):
            raise InputError(f"coefficient shapes {lin.shape}, {quad.shape} do not match {n} variables")
        if np.any(np.tril(quad) != 0):
            raise InputError("quadratic coefficients must be strictly upper-triangular")
        if not (np.all(np.isfinite(lin)) and np.all(np.isfinite(quad)) and np.isfinite(self.offset)):
            raise InputError("QUBO coefficients must be finite")
        lin.setflags(write=False)
        quad.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n_vars(self) -> int:
        return self.layout.n_vars

    def terms(self) -> Iterator[tuple[int, int, float]]:
        """Non-zero ``(v, u, coeff)`` triples, ``v == u`` for linear terms."""
        for v in range(self.n_vars):
            if self.linear[v] != 0:
                yield v, v, float(self.linear[v])
            for u in np.flatnonzero(self.quadratic[v]):
                yield v, int(u), float(self.quadratic[v, u])

    def symmetric(self) -> np.ndarray:
        """Zero-diagonal symmetric coupling matrix (both triangles filled)."""
        return self.quadratic + self.quadratic.T

    def is_zero(self) -> bool:
        return not (np.any(self.linear) or np.any(self.quadratic))


def _check_multipliers(alpha: float, beta: float, gamma: float, budget: float):
    for name, value in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if not value >= 0:
            raise InputError(f"multiplier {name} must be non-negative, got {value}")
    if not budget > 0:
        raise InputError(f"budget must be positive, got {budget}")


def build_qubo(
    er: Sequence[float],
    cov: CovarianceMatrix | np.ndarray,
    layout: BitLayout,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
    gamma: float = DEFAULT_GAMMA,
    budget: float = 1.0,
) -> QuboProblem:
    _check_multipliers(alpha, beta, gamma, budget)
    er = np.asarray(er, dtype=float)
    c = cov.values if isinstance(cov, CovarianceMatrix) else np.asarray(cov, dtype=float)
    n = layout.n_assets
    if er.shape != (n,):
        raise InputError(f"{er.size} expected returns for {n} assets")
    if c.shape != (n, n):
        raise InputError(f"covariance shape {c.shape} does not match {n} assets")

    enc = layout.encoding_matrix()
    level_sum = enc.sum(axis=0)

    # x_v**2 == x_v, so the diagonal of the full quadratic form folds into the linear part
    full = beta * enc.T @ c @ enc + gamma * np.outer(level_sum, level_sum)
    full = 0.5 * (full + full.T)
    linear = -alpha * enc.T @ er - 2.0 * gamma * level_sum + np.diag(full)
    quadratic = np.triu(2.0 * full, k=1)

    return QuboProblem(linear, quadratic, gamma, layout, alpha, beta, gamma, budget)


def _as_bits(x, n_vars: int) -> np.ndarray:
    bits = np.asarray(x)
    if bits.shape[-1] != n_vars:
        raise InputError(f"bitstring length {bits.shape[-1]} does not match {n_vars} variables")
    if np.any((bits != 0) & (bits != 1)):
        raise InputError("bitstrings must contain only 0 and 1")
    return bits.astype(float)


def energy(q: QuboProblem, x) -> float | np.ndarray:
    """Energy of one bitstring, or of each row of a 2-D batch."""
    bits = _as_bits(x, q.n_vars)
    if bits.ndim == 1:
        return float(q.offset + q.linear @ bits + bits @ q.quadratic @ bits)
    return q.offset + bits @ q.linear + ((bits @ q.quadratic) * bits).sum(axis=1)


def decode_weights(
    x, layout: BitLayout, budget: float = 1.0, tickers: Sequence[str] | None = None
) -> WeightVector:
    bits = _as_bits(x, layout.n_vars)
    if bits.ndim != 1:
        raise InputError("decode_weights takes a single bitstring")
    if tickers is None:
        tickers = tuple(str(i) for i in range(layout.n_assets))
    if len(tickers) != layout.n_assets:
        raise InputError(f"{len(tickers)} tickers for {layout.n_assets} assets")
    return WeightVector(tuple(tickers), budget * (layout.encoding_matrix() @ bits))


def dump_qubo(q: QuboProblem, target: IO[str] | None = None) -> str | None:
    """Write the text format: a header line, then ``v u coeff`` per term.

    Floats use ``repr`` and therefore round-trip exactly.
    """
    header = (
        f"# qubo n_vars={q.n_vars} offset={q.offset!r} alpha={q.alpha!r} "
        f"beta={q.beta!r} gamma={q.gamma!r} bd={q.budget!r} "
        f"N={q.layout.n_assets} p={q.layout.levels}"
    )
    lines = [header] + [f"{v} {u} {coeff!r}" for v, u, coeff in q.terms()]
    text = "\n".join(lines) + "\n"
    if target is None:
        return text
    target.write(text)
    return None


def load_qubo(source: IO[str] | str) -> QuboProblem:
    text = source if isinstance(source, str) else source.read()
    lines = io.StringIO(text).read().splitlines()
    if not lines or not lines[0].startswith("# qubo "):
        raise InputError("QUBO dump must start with a '# qubo' header line")
    try:
        meta = dict(field.split("=", 1) for field in lines[0][len("# qubo "):].split())
        n_vars = int(meta["n_vars"])
        layout = BitLayout(int(meta["N"]), int(meta["p"]))
        offset = float(meta["offset"])
        alpha, beta, gamma = (float(meta[k]) for k in ("alpha", "beta", "gamma"))
        budget = float(meta["bd"])
    except (KeyError, ValueError) as exc:
        raise InputError(f"malformed QUBO header: {exc}") from None
    if layout.n_vars != n_vars:
        raise InputError("header n_vars disagrees with N*p")

    linear = np.zeros(n_vars)
    quadratic = np.zeros((n_vars, n_vars))
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            v_s, u_s, c_s = line.split()
            v, u, coeff = int(v_s), int(u_s), float(c_s)
        except ValueError:
            raise InputError(f"malformed QUBO term at line {line_no}") from None
        if not (0 <= v <= u < n_vars):
            raise InputError(f"QUBO term indices out of range at line {line_no}")
        if v == u:
            linear[v] += coeff
        else:
            quadratic[v, u] += coeff
    return QuboProblem(linear, quadratic, offset, layout, alpha, beta, gamma, budget)
