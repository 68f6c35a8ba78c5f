"""Money-flow ingestion: CSV records to validated dense flow matrices.

The central object is the money matrix: a square array whose entry (i, j)
holds the total money importer i paid exporter j during one year for one
commodity group. Country codes get dense integer ids through a registry
sorted by code, so every downstream ordering is reproducible.
"""

from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Union

import numpy as np

logger = logging.getLogger(__name__)

FLOW_COLUMNS = ("year", "commodity", "exporter", "importer", "value_usd")


class TradeDataError(ValueError):
    """Malformed or unusable flow input."""


@dataclass(frozen=True)
class TradeFlowRecord:
    """One reported money flow from exporter to importer."""

    year: int
    commodity: str
    exporter: str
    importer: str
    value: float


# CSV text, a path to a CSV file, or pre-parsed records.
FlowSource = Union[str, Path, Iterable[TradeFlowRecord]]


@dataclass(frozen=True)
class CountryRegistry:
    """Country codes with dense ids assigned in ascending code order."""

    entries: tuple[tuple[str, str], ...]  # (code, display name) pairs

    def __post_init__(self) -> None:
        codes = [code for code, _ in self.entries]
        if codes != sorted(codes):
            raise ValueError("registry entries must be sorted by code")
        if len(set(codes)) != len(codes):
            raise ValueError("duplicate country codes in registry")

    @classmethod
    def from_codes(
        cls, codes: Iterable[str], names: Mapping[str, str] | None = None
    ) -> "CountryRegistry":
        names = names or {}
        return cls(tuple((c, names.get(c, c)) for c in sorted(set(codes))))

    @cached_property
    def _ids(self) -> dict[str, int]:
        return {code: i for i, (code, _) in enumerate(self.entries)}

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(code for code, _ in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def id_of(self, code: str) -> int:
        try:
            return self._ids[code]
        except KeyError:
            raise KeyError(f"unknown country code {code!r}") from None

    def code_of(self, node: int) -> str:
        return self.entries[node][0]

    def name_of(self, node: int) -> str:
        return self.entries[node][1]

    def to_json(self) -> str:
        rows = [
            {"id": i, "code": code, "name": name}
            for i, (code, name) in enumerate(self.entries)
        ]
        return json.dumps(rows, indent=2, ensure_ascii=False) + "\n"


@dataclass(frozen=True)
class MoneyMatrix:
    """Dense flow matrix for one year and commodity.

    values[i, j] is the money importer i paid exporter j. Entries are
    nonnegative and finite, the diagonal is zero, and the array is frozen.
    """

    values: np.ndarray
    year: int
    commodity: str
    registry: CountryRegistry

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("money matrix must be square")
        if v.shape[0] != len(self.registry):
            raise ValueError("registry size does not match matrix dimension")
        if not np.all(np.isfinite(v)):
            raise ValueError("money matrix entries must be finite")
        if np.any(v < 0):
            raise ValueError("money matrix entries must be nonnegative")
        if np.any(np.diagonal(v) != 0):
            raise ValueError("money matrix diagonal must be zero (no self-flows)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def parse_flow_csv(text: str) -> list[TradeFlowRecord]:
    """Parse flow CSV text into records.

    The header must be exactly `year,commodity,exporter,importer,value_usd`
    (case-insensitive). Self-flows are dropped with a warning; malformed
    rows raise TradeDataError naming the offending line.
    """
    import csv
    import io

    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise TradeDataError("empty flow input: missing header row") from None
    if tuple(h.strip().lower() for h in header) != FLOW_COLUMNS:
        raise TradeDataError(
            f"unexpected header {','.join(header)!r}; expected {','.join(FLOW_COLUMNS)}"
        )
    records: list[TradeFlowRecord] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(FLOW_COLUMNS):
            raise TradeDataError(
                f"line {lineno}: expected {len(FLOW_COLUMNS)} fields, got {len(row)}"
            )
        raw_year, commodity, exporter, importer, raw_value = (f.strip() for f in row)
        try:
            year = int(raw_year)
        except ValueError:
            raise TradeDataError(f"line {lineno}: bad year {raw_year!r}") from None
        try:
            value = float(raw_value)
        except ValueError:
            raise TradeDataError(f"line {lineno}: bad value {raw_value!r}") from None
        if math.isinf(value) or not value >= 0:  # also rejects NaN
            raise TradeDataError(
                f"line {lineno}: value must be finite and nonnegative, got {raw_value!r}"
            )
        if not exporter or not importer:
            raise TradeDataError(f"line {lineno}: empty country code")
        if exporter == importer:
            logger.warning("line %d: dropping self-flow for %s", lineno, exporter)
            continue
        records.append(TradeFlowRecord(year, commodity, exporter, importer, value))
    return records


def _as_records(source: FlowSource) -> list[TradeFlowRecord]:
    if isinstance(source, Path):
        return parse_flow_csv(source.read_text())
    if isinstance(source, str):
        return parse_flow_csv(source)
    return list(source)


def available_years(source: FlowSource, commodity: str) -> list[int]:
    """Distinct years carrying flows for the commodity, ascending."""
    return sorted({r.year for r in _as_records(source) if r.commodity == commodity})


def load_flows(source: FlowSource, year: int, commodity: str) -> MoneyMatrix:
    """Build the money matrix for one year and commodity.

    Countries are every code appearing as exporter or importer in the
    selected records. Duplicate (exporter, importer) pairs are summed with
    compensated summation, so the result is independent of input row order
    down to the last bit.
    """
    records = _as_records(source)
    selected = [r for r in records if r.year == year and r.commodity == commodity]
    if not selected:
        raise TradeDataError(f"no flows for year {year}, commodity {commodity!r}")
    registry = CountryRegistry.from_codes(
        code for r in selected for code in (r.exporter, r.importer)
    )
    cells: dict[tuple[int, int], list[float]] = defaultdict(list)
    for r in selected:
        cells[(registry.id_of(r.importer), registry.id_of(r.exporter))].append(r.value)
    values = np.zeros((len(registry), len(registry)))
    for (i, j), amounts in cells.items():
        values[i, j] = math.fsum(amounts)
    return MoneyMatrix(values, year=year, commodity=commodity, registry=registry)


def mirror_fill(matrix: MoneyMatrix, import_reports: FlowSource) -> MoneyMatrix:
    """Fill gaps in an export-reported matrix from importer-side reports.

    Only cells that are exactly zero on the export side are filled; existing
    values are never overwritten. Countries appearing only in the import
    reports are added to the registry. Duplicate import reports for one cell
    are summed with a warning.
    """
    reports = [
        r
        for r in _as_records(import_reports)
        if r.year == matrix.year and r.commodity == matrix.commodity
    ]
    codes = set(matrix.registry.codes)
    for r in reports:
        codes.add(r.exporter)
        codes.add(r.importer)
    registry = CountryRegistry.from_codes(codes)
    values = np.zeros((len(registry), len(registry)))
    old_ids = np.array([registry.id_of(c) for c in matrix.registry.codes], dtype=int)
    if old_ids.size:
        values[np.ix_(old_ids, old_ids)] = matrix.values
    cells: dict[tuple[int, int], list[float]] = defaultdict(list)
    for r in reports:
        cells[(registry.id_of(r.importer), registry.id_of(r.exporter))].append(r.value)
    for (i, j), amounts in sorted(cells.items()):
        if len(amounts) > 1:
            logger.warning(
                "summing %d import reports for %s <- %s",
                len(amounts),
                registry.code_of(i),
                registry.code_of(j),
            )
        if values[i, j] == 0.0:
            values[i, j] = math.fsum(amounts)
    return MoneyMatrix(
        values, year=matrix.year, commodity=matrix.commodity, registry=registry
    )


def mass_vectors(matrix: MoneyMatrix) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-country export mass, import mass, and total traded mass.

    Export mass of j is the column sum (everything j was paid); import mass
    of i is the row sum (everything i paid out). All sums are compensated.
    """
    v = matrix.values
    n = matrix.n
    export_mass = np.array([math.fsum(v[:, j]) for j in range(n)])
    import_mass = np.array([math.fsum(v[i, :]) for i in range(n)])
    total = math.fsum(v.ravel())
    return export_mass, import_mass, total


@dataclass(frozen=True)
class LinkStats:
    links_total: int
    links_per_country: float


def link_stats(matrix: MoneyMatrix) -> LinkStats:
    """Count of nonzero directed flows and its per-country average."""
    links = int(np.count_nonzero(matrix.values > 0))
    return LinkStats(links, links / matrix.n)
