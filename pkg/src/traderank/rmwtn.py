"""Synthetic flow matrices: product-form randomness with rank-indexed decay.

Element (i, j) of a generated matrix is eps / (i * j) where eps is built
from uniform [0, 1] draws and i, j are 1-based country indexes, so
low-index countries carry most of the mass and the mass ordering tracks
the index order. Three draw schemes are provided because the envelope
eps_i * eps_j admits several readings; the default draws a fresh pair per
element, giving an asymmetric matrix with symmetric statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .google_matrix import Direction, build_google, build_stochastic
from .rank import DEFAULT_ALPHA, DEFAULT_MAX_ITER, DEFAULT_TOL, pagerank
from .trade_graph import CountryRegistry, MoneyMatrix

DEFAULT_N = 227
DEFAULT_SEED = 1
DEFAULT_REALIZATIONS = 100
SYNTHETIC_COMMODITY = "SYNTH"

_GAMMA = 0x9E3779B97F4A7C15  # golden-ratio increment, the splitmix64 constant
_MASK = (1 << 64) - 1


class Variant(str, Enum):
    """How the random factor of each element is drawn."""

    PAIR = "pair"  # independent pair of uniforms per element (default)
    SHARED = "shared"  # one vector shared by rows and columns: exact symmetry
    TWO = "two"  # one vector for rows, an independent one for columns


def splitmix64(value: int) -> int:
    """One output of the splitmix64 mixer (all arithmetic mod 2**64)."""
    z = (value + _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def realization_seed(base_seed: int, index: int) -> int:
    """Seed for ensemble member `index`, derived from the base seed.

    Distinct indexes land in well-separated generator states, and any
    member can be regenerated alone without drawing through its
    predecessors.
    """
    if index < 0:
        raise ValueError("realization index must be nonnegative")
    return splitmix64((base_seed + (index + 1) * _GAMMA) & _MASK)


@dataclass(frozen=True)
class RmwtnConfig:
    n: int = DEFAULT_N
    seed: int = DEFAULT_SEED
    variant: Variant = Variant.PAIR

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("need at least two countries")
        object.__setattr__(self, "variant", Variant(self.variant))


def synthetic_registry(n: int) -> CountryRegistry:
    """Codes R01..Rnn, zero-padded so code order equals index order."""
    width = len(str(n))
    return CountryRegistry.from_codes(f"R{i:0{width}d}" for i in range(1, n + 1))


def generate(config: RmwtnConfig) -> MoneyMatrix:
    """One synthetic money matrix; byte-identical for a fixed config.

    The draw order per variant is part of the determinism contract:
    `pair` draws the full u matrix, then the full v matrix; the vector
    variants draw their vectors in row-then-column order.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n
    if config.variant is Variant.PAIR:
        u = rng.random((n, n))
        v = rng.random((n, n))
        eps = u * v
    elif config.variant is Variant.SHARED:
        e = rng.random(n)
        eps = np.outer(e, e)
    else:
        row = rng.random(n)
        col = rng.random(n)
        eps = np.outer(row, col)
    index = np.arange(1, n + 1, dtype=float)
    values = eps / np.outer(index, index)
    np.fill_diagonal(values, 0.0)
    return MoneyMatrix(
        values, year=0, commodity=SYNTHETIC_COMMODITY, registry=synthetic_registry(n)
    )


@dataclass(frozen=True)
class EnsembleMember:
    """Rank columns of one realization (1-based, aligned to registry order)."""

    realization: int
    k: np.ndarray  # damped direct-flow ranks
    k_star: np.ndarray  # damped inverted-flow ranks


def ensemble_run(
    config: RmwtnConfig,
    realizations: int = DEFAULT_REALIZATIONS,
    alpha: float = DEFAULT_ALPHA,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list[EnsembleMember]:
    """Generate and rank independent realizations.

    Member r uses realization_seed(config.seed, r); the whole ensemble is
    reproducible from the base seed alone.
    """
    if realizations < 1:
        raise ValueError("realizations must be at least 1")
    members = []
    for r in range(realizations):
        matrix = generate(replace(config, seed=realization_seed(config.seed, r)))
        direct = pagerank(
            build_google(build_stochastic(matrix, Direction.DIRECT), alpha),
            tol,
            max_iter,
        )
        inverted = pagerank(
            build_google(build_stochastic(matrix, Direction.INVERTED), alpha),
            tol,
            max_iter,
        )
        members.append(EnsembleMember(r, direct.ranks, inverted.ranks))
    return members
