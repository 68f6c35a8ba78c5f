"""Request and response bodies for the ranking service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..analysis import DEFAULT_WINDOW_YEARS
from ..rank import DEFAULT_ALPHA, DEFAULT_MAX_ITER, DEFAULT_TOL
from ..rmwtn import DEFAULT_N, DEFAULT_REALIZATIONS, DEFAULT_SEED

DEFAULT_COMMODITY = "TOTAL"
DEFAULT_BANDS = [(1, 40), (41, 80), (81, 120)]


class FlowPayload(BaseModel):
    """Flow CSV text; a list means several documents merged record-wise."""

    csv: str | list[str]
    commodity: str = DEFAULT_COMMODITY

    def documents(self) -> list[str]:
        return [self.csv] if isinstance(self.csv, str) else list(self.csv)


class NumericParams(BaseModel):
    alpha: float = DEFAULT_ALPHA
    tol: float = DEFAULT_TOL
    max_iter: int = Field(default=DEFAULT_MAX_ITER, ge=1)


class YearsRequest(FlowPayload):
    pass


class YearsResponse(BaseModel):
    commodity: str
    years: list[int]


class RankRequest(FlowPayload, NumericParams):
    year: int
    top: int = Field(default=20, ge=1)
    fit_range: tuple[int, int] | None = None


class RankRow(BaseModel):
    code: str
    K: int
    Kstar: int
    K2: int
    Kimport: int
    Kexport: int


class LeaderRow(BaseModel):
    rank: int
    K: str
    Kstar: str
    K2: str
    Kimport: str
    Kexport: str


class RegistryEntry(BaseModel):
    id: int
    code: str
    name: str


class FitResult(BaseModel):
    kind: str
    beta: float
    stderr: float
    r_squared: float
    k_min: int
    k_max: int


class RankResponse(BaseModel):
    year: int
    commodity: str
    n: int
    alpha: float
    pagerank_iterations: int
    cheirank_iterations: int
    table: list[RankRow]
    leaders: list[LeaderRow]
    registry: list[RegistryEntry]
    fits: list[FitResult] | None = None


class SpectrumRequest(FlowPayload):
    year: int
    alpha: float = DEFAULT_ALPHA
    gap_threshold: float = Field(default=0.01, gt=0, lt=1)


class ComplexValue(BaseModel):
    re: float
    im: float


class SpectrumResponse(BaseModel):
    year: int
    commodity: str
    n: int
    alpha: float
    eigenvalues: list[ComplexValue]
    quasi_degenerate: list[ComplexValue] | None = None  # alpha = 1 only


class SpindleRequest(FlowPayload, NumericParams):
    years: list[int] | None = None
    rescale: bool = False
    cell_width: float = Field(default=3.0, gt=0)
    cell_height: float = Field(default=3.0, gt=0)


class SpindleCell(BaseModel):
    x: float
    y: float
    count: int


class SpindleStats(BaseModel):
    total: int
    rescaled: bool
    cell_width: float
    cell_height: float
    x_negative: int
    x_zero: int
    x_positive: int
    cells: list[SpindleCell]


class SpindleResponse(SpindleStats):
    years: list[int]


class VelocityRequest(FlowPayload, NumericParams):
    years: list[int] | None = None
    bands: list[tuple[int, int]] = Field(default_factory=lambda: list(DEFAULT_BANDS))
    window_years: int = Field(default=DEFAULT_WINDOW_YEARS, ge=1)


class VelocitySampleRow(BaseModel):
    code: str
    year_from: int
    year_to: int
    kpk: int
    dv2: float


class VelocityCurveRow(BaseModel):
    kpk: int
    mean: float
    smoothed: float
    count: int


class VelocityBandRow(BaseModel):
    band_lo: int
    band_hi: int
    window_start: int
    window_end: int
    mean: float | None
    count: int
    partial: bool


class VelocityResponse(BaseModel):
    years: list[int]
    window_years: int
    samples: list[VelocitySampleRow]
    curve: list[VelocityCurveRow]
    bands: list[VelocityBandRow]


class CorrelatorRequest(FlowPayload, NumericParams):
    years: list[int] | None = None


class CorrelatorRow(BaseModel):
    year: int
    n: int
    kappa: float  # overlap of the damped direct/inverted stationary vectors
    kappa_mass: float  # same formula over the import/export mass shares


class CorrelatorResponse(BaseModel):
    commodity: str
    alpha: float
    rows: list[CorrelatorRow]


class SummaryRequest(FlowPayload):
    years: list[int] | None = None


class SummaryRow(BaseModel):
    year: int
    n: int
    links_total: int
    links_per_country: float
    total_mass: float


class SummaryResponse(BaseModel):
    commodity: str
    rows: list[SummaryRow]


class RmwtnRequest(NumericParams):
    n: int = Field(default=DEFAULT_N, ge=2)
    seed: int = DEFAULT_SEED
    variant: str = "pair"
    realizations: int = Field(default=DEFAULT_REALIZATIONS, ge=1)
    rescale: bool = True
    cell_width: float = Field(default=3.0, gt=0)
    cell_height: float = Field(default=3.0, gt=0)


class RmwtnPoint(BaseModel):
    realization: int
    code: str
    K: int
    Kstar: int


class RmwtnResponse(BaseModel):
    n: int
    seed: int
    variant: str
    realizations: int
    alpha: float
    points: list[RmwtnPoint]
    histogram: SpindleStats


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str
