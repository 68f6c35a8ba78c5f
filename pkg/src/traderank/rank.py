"""Node rankings: damped stationary vectors, mass shares, and combined orders.

Every ranking is a probability vector over countries plus a deterministic
ordering: descending probability, ties broken by ascending country code, so
identical inputs always produce identical rank columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .google_matrix import (
    Direction,
    GoogleMatrix,
    build_google,
    build_stochastic,
    matvec,
)
from .trade_graph import MoneyMatrix, mass_vectors

DEFAULT_ALPHA = 0.5
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 1000


class RankKind(str, Enum):
    PAGERANK = "pagerank"  # stationary vector of the direct-flow matrix
    CHEIRANK = "cheirank"  # stationary vector of the inverted-flow matrix
    IMPORT = "import"  # share of total import mass
    EXPORT = "export"  # share of total export mass


class ConvergenceError(RuntimeError):
    """Power iteration failed to reach the requested residual."""

    def __init__(self, message: str, residual: float, iterations: int) -> None:
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class RankVector:
    """A probability vector over nodes plus its deterministic ordering.

    order[r - 1] is the node holding rank r; ranks are the inverse
    permutation, 1-based.
    """

    probabilities: np.ndarray
    order: np.ndarray
    kind: RankKind
    codes: tuple[str, ...] | None = None
    iterations: int = 0
    residual: float = 0.0

    def __post_init__(self) -> None:
        p = np.array(self.probabilities, dtype=float)
        o = np.array(self.order, dtype=np.int64)
        if p.ndim != 1 or o.shape != p.shape:
            raise ValueError("probabilities and order must be matching 1-d arrays")
        if not np.array_equal(np.sort(o), np.arange(p.size)):
            raise ValueError("order must be a permutation of node ids")
        if self.codes is not None and len(self.codes) != p.size:
            raise ValueError("codes length does not match vector size")
        p.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "order", o)

    @property
    def n(self) -> int:
        return self.probabilities.size

    @property
    def ranks(self) -> np.ndarray:
        """1-based rank of each node."""
        r = np.empty(self.n, dtype=np.int64)
        r[self.order] = np.arange(1, self.n + 1)
        return r


def ordering(probabilities: np.ndarray, codes: Sequence[str] | None = None) -> np.ndarray:
    """Sort node ids by descending probability, ties by ascending code."""
    p = np.asarray(probabilities, dtype=float)
    tiebreak = np.asarray(codes) if codes is not None else np.arange(p.size)
    if tiebreak.shape != p.shape:
        raise ValueError("codes length does not match vector size")
    return np.lexsort((tiebreak, -p))


def make_rank_vector(
    probabilities: np.ndarray,
    kind: RankKind | str,
    codes: Sequence[str] | None = None,
    iterations: int = 0,
    residual: float = 0.0,
) -> RankVector:
    p = np.asarray(probabilities, dtype=float)
    return RankVector(
        p,
        ordering(p, codes),
        RankKind(kind),
        tuple(codes) if codes is not None else None,
        iterations,
        residual,
    )


def _power_iterate(g: GoogleMatrix, tol: float, max_iter: int) -> tuple[np.ndarray, int, float]:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    v = np.full(g.n, 1.0 / g.n)
    residual = math.inf
    for iteration in range(1, max_iter + 1):
        w = matvec(g, v)
        residual = float(np.abs(w - v).sum())
        v = w
        if residual < tol:
            return v, iteration, residual
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(residual {residual:.3e}, tol {tol:.3e})",
        residual=residual,
        iterations=max_iter,
    )


def pagerank(
    g: GoogleMatrix, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> RankVector:
    """Stationary vector of the damped matrix by power iteration.

    Starts from the uniform vector and stops when the L1 step residual
    drops below tol. The returned iterate is the post-step vector, so its
    own residual is below alpha * tol (the map contracts L1 distances on
    the simplex by alpha).
    """
    v, iterations, residual = _power_iterate(g, tol, max_iter)
    codes = g.registry.codes if g.registry is not None else None
    kind = RankKind.PAGERANK if g.direction is Direction.DIRECT else RankKind.CHEIRANK
    return make_rank_vector(v, kind, codes, iterations, residual)


def cheirank(
    matrix: MoneyMatrix,
    alpha: float = DEFAULT_ALPHA,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RankVector:
    """Stationary vector of the damped inverted-flow matrix."""
    g = build_google(build_stochastic(matrix, Direction.INVERTED), alpha)
    return pagerank(g, tol, max_iter)


def mass_rank(matrix: MoneyMatrix, side: RankKind | str) -> RankVector:
    """Probability vector of import or export mass shares."""
    kind = RankKind(side)
    if kind not in (RankKind.IMPORT, RankKind.EXPORT):
        raise ValueError("side must be 'import' or 'export'")
    export_mass, import_mass, total = mass_vectors(matrix)
    if total == 0.0:
        raise ValueError("total traded mass is zero; mass ranking undefined")
    mass = import_mass if kind is RankKind.IMPORT else export_mass
    return make_rank_vector(mass / total, kind, matrix.registry.codes)


def two_d_rank(
    k: np.ndarray, k_star: np.ndarray, codes: Sequence[str] | None = None
) -> np.ndarray:
    """Combined rank from the square-sweep order on the (K, K*) plane.

    Sweeping squares of growing side s emits each node when s first reaches
    max(K, K*); nodes sharing that frontier are taken by increasing
    min(K, K*), then ascending code. Returns the 1-based combined rank per
    node.
    """
    a = np.asarray(k, dtype=np.int64)
    b = np.asarray(k_star, dtype=np.int64)
    if a.ndim != 1 or a.shape != b.shape:
        raise ValueError("rank arrays must be matching 1-d arrays")
    n = a.size
    expected = np.arange(1, n + 1)
    if not np.array_equal(np.sort(a), expected) or not np.array_equal(
        np.sort(b), expected
    ):
        raise ValueError("rank arrays must each be a permutation of 1..n")
    tiebreak = np.asarray(codes) if codes is not None else np.arange(n)
    if tiebreak.shape != (n,):
        raise ValueError("codes length does not match rank arrays")
    order = np.lexsort((tiebreak, np.minimum(a, b), np.maximum(a, b)))
    out = np.empty(n, dtype=np.int64)
    out[order] = expected
    return out


@dataclass(frozen=True)
class RankTable:
    """All five rank columns for one snapshot, aligned to registry order."""

    codes: tuple[str, ...]
    k: np.ndarray  # damped direct-flow rank
    k_star: np.ndarray  # damped inverted-flow rank
    k2: np.ndarray  # square-sweep combination of k and k_star
    k_import: np.ndarray  # import mass-share rank
    k_export: np.ndarray  # export mass-share rank
    year: int
    commodity: str
    alpha: float
    pagerank_iterations: int
    cheirank_iterations: int

    @property
    def n(self) -> int:
        return len(self.codes)

    def columns(self) -> dict[str, np.ndarray]:
        return {
            "K": self.k,
            "Kstar": self.k_star,
            "K2": self.k2,
            "Kimport": self.k_import,
            "Kexport": self.k_export,
        }

    def leaders(self, top: int) -> list[tuple[int, str, str, str, str, str]]:
        """Codes occupying ranks 1..top in each of the five orders."""
        top = min(top, self.n)
        codes = np.asarray(self.codes)
        by_rank = [
            codes[np.argsort(col)]
            for col in (self.k, self.k_star, self.k2, self.k_import, self.k_export)
        ]
        return [
            (r + 1, *(str(col[r]) for col in by_rank)) for r in range(top)
        ]


def rank_table(
    matrix: MoneyMatrix,
    alpha: float = DEFAULT_ALPHA,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RankTable:
    """Compute all five rankings of one money matrix."""
    direct = pagerank(
        build_google(build_stochastic(matrix, Direction.DIRECT), alpha), tol, max_iter
    )
    inverted = cheirank(matrix, alpha, tol, max_iter)
    imports = mass_rank(matrix, RankKind.IMPORT)
    exports = mass_rank(matrix, RankKind.EXPORT)
    codes = matrix.registry.codes
    k = direct.ranks
    k_star = inverted.ranks
    return RankTable(
        codes=codes,
        k=k,
        k_star=k_star,
        k2=two_d_rank(k, k_star, codes),
        k_import=imports.ranks,
        k_export=exports.ranks,
        year=matrix.year,
        commodity=matrix.commodity,
        alpha=alpha,
        pagerank_iterations=direct.iterations,
        cheirank_iterations=inverted.iterations,
    )
