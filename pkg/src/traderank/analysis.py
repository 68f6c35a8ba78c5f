"""Distribution fits, rank-plane histograms, correlators, and time series."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy import stats

from .rank import RankVector
from .trade_graph import MoneyMatrix, link_stats, mass_vectors

RESCALED_SHAPE = (76, 152)  # cells across [-1, 1] x [0, 2]
DEFAULT_CELL = (3.0, 3.0)
DEFAULT_BANDS = ((1, 40), (41, 80), (81, 120))
DEFAULT_WINDOW_YEARS = 5
SMOOTHING_HALF_WIDTH = 10


@dataclass(frozen=True)
class PowerLawFit:
    beta: float
    stderr: float
    fit_range: tuple[int, int]
    r_squared: float


def fit_power_law(
    vector: RankVector, k_min: int = 1, k_max: int | None = None
) -> PowerLawFit:
    """Least-squares slope of log P against log K over ranks k_min..k_max.

    Returns beta = -slope, so probabilities decaying as K**-beta come back
    with positive beta.
    """
    n = vector.n
    if k_max is None:
        k_max = n
    if not 1 <= k_min < k_max <= n:
        raise ValueError(f"need 1 <= k_min < k_max <= {n}, got ({k_min}, {k_max})")
    if k_max - k_min + 1 < 3:
        raise ValueError("need at least 3 ranks to fit")
    probs = vector.probabilities[vector.order[k_min - 1 : k_max]]
    if np.any(probs <= 0):
        raise ValueError("zero probability inside the fit range")
    ks = np.arange(k_min, k_max + 1, dtype=float)
    res = stats.linregress(np.log(ks), np.log(probs))
    return PowerLawFit(
        beta=float(-res.slope),
        stderr=float(res.stderr),
        fit_range=(int(k_min), int(k_max)),
        r_squared=float(res.rvalue**2),
    )


def correlator(p: RankVector, p_star: RankVector) -> float:
    """Overlap statistic n * sum_i p_i * q_i - 1, summed over node identity.

    Symmetric in its arguments and bounded below by -1 (disjoint supports).
    Zero marks uncorrelated vectors; compensated summation keeps the small
    values near zero honest.
    """
    a = p.probabilities
    b = p_star.probabilities
    if a.size != b.size:
        raise ValueError("vectors must have matching length")
    return a.size * math.fsum(x * y for x, y in zip(a.tolist(), b.tolist())) - 1.0


@dataclass(frozen=True)
class SpindleHistogram:
    """2-d counts over the rank-difference / rank-sum plane.

    Points are (x, y) = (K* - K, K* + K). Raw mode bins them in cells of
    cell_width x cell_height with the x-cells centered on zero, so mirrored
    points land in mirrored cells. Rescaled mode divides (x/n, y/n) over
    [-1, 1] x [0, 2] into a fixed 76 x 152 grid.

    x_negative / x_zero / x_positive count the ingested points by the strict
    sign of x, independent of binning.
    """

    counts: np.ndarray  # [ix, iy]
    x_origin: float  # left edge of cell ix = 0
    y_origin: float  # bottom edge of cell iy = 0
    cell_width: float
    cell_height: float
    rescaled: bool
    total: int
    x_negative: int
    x_zero: int
    x_positive: int

    def __post_init__(self) -> None:
        c = np.array(self.counts, dtype=np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.x_origin + (ix + 0.5) * self.cell_width,
            self.y_origin + (iy + 0.5) * self.cell_height,
        )

    def occupied(self) -> Iterator[tuple[float, float, int]]:
        """(x_center, y_center, count) for nonzero cells, row-major in y."""
        nz = np.argwhere(self.counts > 0)
        for ix, iy in sorted(nz.tolist(), key=lambda cell: (cell[1], cell[0])):
            x, y = self.cell_center(ix, iy)
            yield x, y, int(self.counts[ix, iy])


def spindle_histogram(
    points: Iterable[tuple[int, int, int]],
    rescale: bool = False,
    cell: tuple[float, float] = DEFAULT_CELL,
) -> SpindleHistogram:
    """Bin (K, K*, n) triples into the rank-plane histogram.

    Each point carries the country count n of its own year, so snapshots of
    different sizes can share one rescaled histogram.
    """
    pts = list(points)
    if not pts:
        raise ValueError("no points to bin")
    k = np.array([p[0] for p in pts], dtype=np.int64)
    k_star = np.array([p[1] for p in pts], dtype=np.int64)
    n = np.array([p[2] for p in pts], dtype=np.int64)
    if np.any((k < 1) | (k > n) | (k_star < 1) | (k_star > n)):
        raise ValueError("ranks must lie in 1..n for each point")
    x = k_star - k
    y = k_star + k
    x_negative = int(np.count_nonzero(x < 0))
    x_zero = int(np.count_nonzero(x == 0))
    x_positive = int(np.count_nonzero(x > 0))

    if rescale:
        nx, ny = RESCALED_SHAPE
        ix = np.clip(np.floor((x / n + 1.0) * (nx / 2.0)).astype(np.int64), 0, nx - 1)
        iy = np.clip(np.floor((y / n) * (ny / 2.0)).astype(np.int64), 0, ny - 1)
        counts = np.zeros(RESCALED_SHAPE, dtype=np.int64)
        np.add.at(counts, (ix, iy), 1)
        return SpindleHistogram(
            counts,
            x_origin=-1.0,
            y_origin=0.0,
            cell_width=2.0 / nx,
            cell_height=2.0 / ny,
            rescaled=True,
            total=len(pts),
            x_negative=x_negative,
            x_zero=x_zero,
            x_positive=x_positive,
        )

    w, h = float(cell[0]), float(cell[1])
    if w <= 0 or h <= 0:
        raise ValueError("cell sides must be positive")
    ix = np.floor((x + w / 2.0) / w).astype(np.int64)
    iy = np.floor(y / h).astype(np.int64)
    ix0 = int(ix.min())
    iy0 = int(iy.min())
    counts = np.zeros((int(ix.max()) - ix0 + 1, int(iy.max()) - iy0 + 1), dtype=np.int64)
    np.add.at(counts, (ix - ix0, iy - iy0), 1)
    return SpindleHistogram(
        counts,
        x_origin=ix0 * w - w / 2.0,
        y_origin=iy0 * h,
        cell_width=w,
        cell_height=h,
        rescaled=False,
        total=len(pts),
        x_negative=x_negative,
        x_zero=x_zero,
        x_positive=x_positive,
    )


@dataclass(frozen=True)
class VelocitySample:
    """Squared rank displacement of one country over one year step."""

    code: str
    year_from: int
    year_to: int
    kpk: int  # K + K* at the earlier year
    dv2: float


@dataclass(frozen=True)
class VelocitySeries:
    samples: tuple[VelocitySample, ...]


def velocity_sq(
    trajectories: Mapping[str, Mapping[int, tuple[int, int]]]
) -> VelocitySeries:
    """Year-over-year squared displacement in the (K, K*) plane.

    trajectories maps country code -> year -> (K, K*). Only consecutive
    calendar years pair up; gaps contribute nothing. Each sample is tagged
    with K + K* at the earlier year. Samples come out sorted by (code,
    year), so the series is independent of mapping iteration order.
    """
    samples: list[VelocitySample] = []
    for code in sorted(trajectories):
        by_year = trajectories[code]
        for year in sorted(by_year):
            if year + 1 not in by_year:
                continue
            k0, s0 = by_year[year]
            k1, s1 = by_year[year + 1]
            dv2 = float((k1 - k0) ** 2 + (s1 - s0) ** 2)
            samples.append(VelocitySample(code, year, year + 1, int(k0 + s0), dv2))
    return VelocitySeries(tuple(samples))


@dataclass(frozen=True)
class BandWindowCell:
    """Mean squared displacement in one K+K* band over one year window."""

    band: tuple[int, int]
    window: tuple[int, int]  # nominal [start, end] in year_from terms
    mean: float | None  # None when the cell holds no samples
    count: int
    partial: bool  # nominal end runs past the last observed year


@dataclass(frozen=True)
class CurvePoint:
    """Mean squared displacement at one fixed K+K* value."""

    kpk: int
    mean: float
    smoothed: float  # centered sliding mean over kpk +- SMOOTHING_HALF_WIDTH
    count: int


@dataclass(frozen=True)
class VelocityAggregate:
    bands: tuple[tuple[int, int], ...]
    window_years: int
    cells: tuple[BandWindowCell, ...]
    curve: tuple[CurvePoint, ...]


def velocity_aggregate(
    series: VelocitySeries,
    bands: Sequence[tuple[int, int]] = DEFAULT_BANDS,
    window_years: int = DEFAULT_WINDOW_YEARS,
) -> VelocityAggregate:
    """Aggregate a velocity series per band x window plus the per-K+K* curve.

    Windows tile the observed year_from span starting at its minimum; a
    trailing window whose nominal end exceeds the span is flagged partial.
    Empty cells report a null mean, never zero.
    """
    band_list = [(int(lo), int(hi)) for lo, hi in bands]
    for lo, hi in band_list:
        if lo < 1 or hi < lo:
            raise ValueError(f"bad band ({lo}, {hi})")
    by_lo = sorted(band_list)
    for (_, hi), (lo, _) in zip(by_lo, by_lo[1:]):
        if lo <= hi:
            raise ValueError("bands must not overlap")
    if window_years < 1:
        raise ValueError("window_years must be at least 1")

    samples = series.samples
    cells: list[BandWindowCell] = []
    if samples:
        first = min(s.year_from for s in samples)
        last = max(s.year_from for s in samples)
        for start in range(first, last + 1, window_years):
            end = start + window_years - 1
            partial = end > last
            for band in band_list:
                chosen = [
                    s.dv2
                    for s in samples
                    if band[0] <= s.kpk <= band[1] and start <= s.year_from <= end
                ]
                mean = math.fsum(chosen) / len(chosen) if chosen else None
                cells.append(BandWindowCell(band, (start, end), mean, len(chosen), partial))

    groups: dict[int, list[float]] = defaultdict(list)
    for s in samples:
        groups[s.kpk].append(s.dv2)
    kpks = sorted(groups)
    means = {v: math.fsum(groups[v]) / len(groups[v]) for v in kpks}
    curve = []
    for v in kpks:
        near = [means[u] for u in kpks if abs(u - v) <= SMOOTHING_HALF_WIDTH]
        curve.append(
            CurvePoint(v, means[v], math.fsum(near) / len(near), len(groups[v]))
        )
    return VelocityAggregate(tuple(band_list), int(window_years), tuple(cells), tuple(curve))


@dataclass(frozen=True)
class YearlySummaryRow:
    year: int
    n: int
    links_total: int
    links_per_country: float
    total_mass: float


def yearly_summary(snapshots: Sequence[MoneyMatrix]) -> list[YearlySummaryRow]:
    """Size, link, and mass aggregates per yearly snapshot, ascending year."""
    if not snapshots:
        raise ValueError("no snapshots given")
    years = [m.year for m in snapshots]
    if len(set(years)) != len(years):
        raise ValueError("duplicate years in snapshots")
    rows = []
    for m in sorted(snapshots, key=lambda m: m.year):
        links = link_stats(m)
        _, _, total = mass_vectors(m)
        rows.append(
            YearlySummaryRow(m.year, m.n, links.links_total, links.links_per_country, total)
        )
    return rows
