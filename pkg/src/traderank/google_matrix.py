"""Column-stochastic matrices with damping for directed money flows.

A flow matrix becomes column-stochastic by dividing each column by its own
mass; columns with zero mass (countries that sell nothing, in the direct
orientation) become uniform. Damping mixes the stochastic matrix with the
uniform teleport term: G = alpha * S + (1 - alpha) / n.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .trade_graph import CountryRegistry, MoneyMatrix

COLUMN_SUM_TOL = 1e-12


class Direction(str, Enum):
    """Orientation of the flow matrix before normalization."""

    DIRECT = "direct"  # columns are sellers: entry (i, j) is what i paid j
    INVERTED = "inverted"  # transposed flows: buyers and sellers swap roles


@dataclass(frozen=True)
class StochasticMatrix:
    """Dense column-stochastic matrix plus its dangling-column mask."""

    columns: np.ndarray
    dangling: np.ndarray  # True where the source column had zero mass
    direction: Direction = Direction.DIRECT
    registry: CountryRegistry | None = None

    def __post_init__(self) -> None:
        c = np.array(self.columns, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("stochastic matrix must be square")
        if np.any(c < 0) or np.any(c > 1):
            raise ValueError("stochastic entries must lie in [0, 1]")
        if c.size and np.max(np.abs(c.sum(axis=0) - 1.0)) > COLUMN_SUM_TOL:
            raise ValueError("every column must sum to 1")
        d = np.array(self.dangling, dtype=bool)
        if d.shape != (c.shape[0],):
            raise ValueError("dangling mask length does not match matrix size")
        if self.registry is not None and len(self.registry) != c.shape[0]:
            raise ValueError("registry size does not match matrix size")
        c.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "columns", c)
        object.__setattr__(self, "dangling", d)

    @property
    def n(self) -> int:
        return self.columns.shape[0]


def stochastic_from_flows(
    values: np.ndarray,
    direction: Direction = Direction.DIRECT,
    registry: CountryRegistry | None = None,
) -> StochasticMatrix:
    """Normalize a nonnegative square array column by column.

    Each entry becomes values[i, j] / column_mass[j]; zero-mass columns are
    replaced by the uniform column 1/n. The array is taken as already
    oriented — `direction` is only recorded on the result.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError("flow array must be square")
    if np.any(v < 0):
        raise ValueError("flow values must be nonnegative")
    n = v.shape[0]
    mass = v.sum(axis=0)
    dangling = mass == 0.0
    columns = v / np.where(dangling, 1.0, mass)
    if dangling.any():
        columns[:, dangling] = 1.0 / n
    return StochasticMatrix(columns, dangling, Direction(direction), registry)


def build_stochastic(
    matrix: MoneyMatrix, direction: Direction = Direction.DIRECT
) -> StochasticMatrix:
    """Column-normalize a money matrix in the requested orientation."""
    d = Direction(direction)
    values = matrix.values if d is Direction.DIRECT else matrix.values.T
    return stochastic_from_flows(values, d, matrix.registry)


@dataclass(frozen=True)
class GoogleMatrix:
    """Damped stochastic matrix G = alpha * S + (1 - alpha) / n.

    Never materialized during iteration; `effective()` builds the dense
    array when a spectrum or a dump needs it.
    """

    stochastic: StochasticMatrix
    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")

    @property
    def n(self) -> int:
        return self.stochastic.n

    @property
    def direction(self) -> Direction:
        return self.stochastic.direction

    @property
    def registry(self) -> CountryRegistry | None:
        return self.stochastic.registry

    def effective(self) -> np.ndarray:
        return self.alpha * self.stochastic.columns + (1.0 - self.alpha) / self.n


def build_google(s: StochasticMatrix, alpha: float) -> GoogleMatrix:
    return GoogleMatrix(s, float(alpha))


def matvec(g: GoogleMatrix, v: np.ndarray) -> np.ndarray:
    """Apply G to a vector without materializing it.

    G v = alpha * (S @ v) + (1 - alpha) * sum(v) / n, using the rank-one
    structure of the teleport term.
    """
    vec = np.asarray(v, dtype=float)
    if vec.shape != (g.n,):
        raise ValueError(f"vector length {vec.shape} does not match matrix size {g.n}")
    return g.alpha * (g.stochastic.columns @ vec) + (1.0 - g.alpha) * float(
        vec.sum()
    ) / g.n


def effective_csv(g: GoogleMatrix) -> str:
    """Dense damped matrix as CSV rows, 17 significant digits per entry."""
    eff = g.effective()
    return "\n".join(",".join(f"{x:.17g}" for x in row) for row in eff) + "\n"
