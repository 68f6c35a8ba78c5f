"""Small builders shared across test modules."""

import numpy as np

from traderank.google_matrix import Direction, build_google, build_stochastic
from traderank.trade_graph import CountryRegistry, MoneyMatrix


def money_from_array(values, year=2000, commodity="TOTAL", codes=None):
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    if codes is None:
        codes = [f"C{i:03d}" for i in range(n)]
    registry = CountryRegistry.from_codes(codes)
    return MoneyMatrix(values=values, year=year, commodity=commodity, registry=registry)


def random_money(n, rng, density=1.0, scale=10.0):
    """Random nonnegative flow matrix with a zero diagonal."""
    values = rng.random((n, n)) * scale
    if density < 1.0:
        values = np.where(rng.random((n, n)) < density, values, 0.0)
    np.fill_diagonal(values, 0.0)
    return values


def random_google(n, rng, alpha=0.5, density=1.0):
    matrix = money_from_array(random_money(n, rng, density=density))
    return build_google(build_stochastic(matrix, Direction.DIRECT), alpha)


def random_simplex(n, rng):
    v = rng.random(n) + 1e-9
    return v / v.sum()
