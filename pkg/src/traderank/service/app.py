"""Service routes: one endpoint per pipeline, JSON in and out."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..analysis import (
    correlator,
    fit_power_law,
    spindle_histogram,
    velocity_aggregate,
    velocity_sq,
    yearly_summary,
)
from ..google_matrix import Direction, build_google, build_stochastic
from ..rank import (
    ConvergenceError,
    RankKind,
    RankTable,
    cheirank,
    mass_rank,
    pagerank,
    two_d_rank,
)
from ..rmwtn import RmwtnConfig, Variant, ensemble_run, synthetic_registry
from ..spectrum import detect_quasi_degenerate, full_spectrum
from ..trade_graph import (
    MoneyMatrix,
    TradeDataError,
    TradeFlowRecord,
    load_flows,
    parse_flow_csv,
)
from . import schemas

app = FastAPI(title="traderank", version=__version__)


@app.exception_handler(TradeDataError)
async def _handle_input(request: Request, exc: TradeDataError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc), "error": "input"})


@app.exception_handler(ValueError)
async def _handle_value(request: Request, exc: ValueError) -> JSONResponse:
    # bad parameter combinations are client errors, same as bad data
    return JSONResponse(status_code=400, content={"detail": str(exc), "error": "input"})


@app.exception_handler(ConvergenceError)
async def _handle_convergence(request: Request, exc: ConvergenceError) -> JSONResponse:
    return JSONResponse(
        status_code=500,
        content={
            "detail": str(exc),
            "error": "non_convergence",
            "residual": exc.residual,
            "iterations": exc.iterations,
        },
    )


def _records(payload: schemas.FlowPayload) -> list[TradeFlowRecord]:
    records: list[TradeFlowRecord] = []
    for document in payload.documents():
        records.extend(parse_flow_csv(document))
    return records


def _resolve_years(
    records: list[TradeFlowRecord],
    commodity: str,
    requested: list[int] | None,
    minimum: int = 1,
) -> list[int]:
    if requested:
        years = sorted(set(requested))
    else:
        years = sorted({r.year for r in records if r.commodity == commodity})
    if not years:
        raise TradeDataError(f"no flows for commodity {commodity!r}")
    if len(years) < minimum:
        raise TradeDataError(
            f"need at least {minimum} yearly snapshots, got {len(years)}"
        )
    return years


def _rank_pair(matrix: MoneyMatrix, alpha: float, tol: float, max_iter: int):
    direct = pagerank(
        build_google(build_stochastic(matrix, Direction.DIRECT), alpha), tol, max_iter
    )
    inverted = pagerank(
        build_google(build_stochastic(matrix, Direction.INVERTED), alpha), tol, max_iter
    )
    return direct, inverted


def _spindle_stats(histogram) -> dict:
    return {
        "total": histogram.total,
        "rescaled": histogram.rescaled,
        "cell_width": histogram.cell_width,
        "cell_height": histogram.cell_height,
        "x_negative": histogram.x_negative,
        "x_zero": histogram.x_zero,
        "x_positive": histogram.x_positive,
        "cells": [
            schemas.SpindleCell(x=x, y=y, count=c) for x, y, c in histogram.occupied()
        ],
    }


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(version=__version__)


@app.post("/years", response_model=schemas.YearsResponse)
def years(req: schemas.YearsRequest) -> schemas.YearsResponse:
    resolved = _resolve_years(_records(req), req.commodity, None)
    return schemas.YearsResponse(commodity=req.commodity, years=resolved)


@app.post("/rank", response_model=schemas.RankResponse)
def rank(req: schemas.RankRequest) -> schemas.RankResponse:
    matrix = load_flows(_records(req), req.year, req.commodity)
    direct, inverted = _rank_pair(matrix, req.alpha, req.tol, req.max_iter)
    imports = mass_rank(matrix, RankKind.IMPORT)
    exports = mass_rank(matrix, RankKind.EXPORT)
    codes = matrix.registry.codes
    k = direct.ranks
    k_star = inverted.ranks
    table = RankTable(
        codes=codes,
        k=k,
        k_star=k_star,
        k2=two_d_rank(k, k_star, codes),
        k_import=imports.ranks,
        k_export=exports.ranks,
        year=req.year,
        commodity=req.commodity,
        alpha=req.alpha,
        pagerank_iterations=direct.iterations,
        cheirank_iterations=inverted.iterations,
    )
    fits = None
    if req.fit_range is not None:
        k_min, k_max = req.fit_range
        fits = []
        for kind, vector in (("pagerank", direct), ("cheirank", inverted)):
            fit = fit_power_law(vector, k_min, k_max)
            fits.append(
                schemas.FitResult(
                    kind=kind,
                    beta=fit.beta,
                    stderr=fit.stderr,
                    r_squared=fit.r_squared,
                    k_min=fit.fit_range[0],
                    k_max=fit.fit_range[1],
                )
            )
    return schemas.RankResponse(
        year=req.year,
        commodity=req.commodity,
        n=matrix.n,
        alpha=req.alpha,
        pagerank_iterations=direct.iterations,
        cheirank_iterations=inverted.iterations,
        table=[
            schemas.RankRow(
                code=codes[i],
                K=int(k[i]),
                Kstar=int(k_star[i]),
                K2=int(table.k2[i]),
                Kimport=int(table.k_import[i]),
                Kexport=int(table.k_export[i]),
            )
            for i in range(matrix.n)
        ],
        leaders=[
            schemas.LeaderRow(rank=r, K=a, Kstar=b, K2=c, Kimport=d, Kexport=e)
            for r, a, b, c, d, e in table.leaders(req.top)
        ],
        registry=[
            schemas.RegistryEntry(id=i, code=code, name=name)
            for i, (code, name) in enumerate(matrix.registry.entries)
        ],
        fits=fits,
    )


@app.post("/spectrum", response_model=schemas.SpectrumResponse)
def spectrum(req: schemas.SpectrumRequest) -> schemas.SpectrumResponse:
    matrix = load_flows(_records(req), req.year, req.commodity)
    g = build_google(build_stochastic(matrix, Direction.DIRECT), req.alpha)
    sp = full_spectrum(g, year=req.year, commodity=req.commodity)
    quasi = None
    if req.alpha == 1.0:
        quasi = [
            schemas.ComplexValue(re=v.real, im=v.imag)
            for v in detect_quasi_degenerate(sp, req.gap_threshold)
        ]
    return schemas.SpectrumResponse(
        year=req.year,
        commodity=req.commodity,
        n=matrix.n,
        alpha=req.alpha,
        eigenvalues=[
            schemas.ComplexValue(re=v.real, im=v.imag) for v in sp.eigenvalues
        ],
        quasi_degenerate=quasi,
    )


@app.post("/spindle", response_model=schemas.SpindleResponse)
def spindle(req: schemas.SpindleRequest) -> schemas.SpindleResponse:
    records = _records(req)
    resolved = _resolve_years(records, req.commodity, req.years)
    points: list[tuple[int, int, int]] = []
    for year in resolved:
        matrix = load_flows(records, year, req.commodity)
        direct, inverted = _rank_pair(matrix, req.alpha, req.tol, req.max_iter)
        k = direct.ranks
        k_star = inverted.ranks
        points.extend((int(k[i]), int(k_star[i]), matrix.n) for i in range(matrix.n))
    histogram = spindle_histogram(
        points, rescale=req.rescale, cell=(req.cell_width, req.cell_height)
    )
    return schemas.SpindleResponse(years=resolved, **_spindle_stats(histogram))


@app.post("/velocity", response_model=schemas.VelocityResponse)
def velocity(req: schemas.VelocityRequest) -> schemas.VelocityResponse:
    records = _records(req)
    resolved = _resolve_years(records, req.commodity, req.years, minimum=2)
    trajectories: dict[str, dict[int, tuple[int, int]]] = {}
    for year in resolved:
        matrix = load_flows(records, year, req.commodity)
        direct, inverted = _rank_pair(matrix, req.alpha, req.tol, req.max_iter)
        k = direct.ranks
        k_star = inverted.ranks
        for i, code in enumerate(matrix.registry.codes):
            trajectories.setdefault(code, {})[year] = (int(k[i]), int(k_star[i]))
    series = velocity_sq(trajectories)
    aggregate = velocity_aggregate(
        series, bands=[tuple(b) for b in req.bands], window_years=req.window_years
    )
    return schemas.VelocityResponse(
        years=resolved,
        window_years=aggregate.window_years,
        samples=[
            schemas.VelocitySampleRow(
                code=s.code,
                year_from=s.year_from,
                year_to=s.year_to,
                kpk=s.kpk,
                dv2=s.dv2,
            )
            for s in series.samples
        ],
        curve=[
            schemas.VelocityCurveRow(
                kpk=c.kpk, mean=c.mean, smoothed=c.smoothed, count=c.count
            )
            for c in aggregate.curve
        ],
        bands=[
            schemas.VelocityBandRow(
                band_lo=c.band[0],
                band_hi=c.band[1],
                window_start=c.window[0],
                window_end=c.window[1],
                mean=c.mean,
                count=c.count,
                partial=c.partial,
            )
            for c in aggregate.cells
        ],
    )


@app.post("/correlator", response_model=schemas.CorrelatorResponse)
def correlators(req: schemas.CorrelatorRequest) -> schemas.CorrelatorResponse:
    records = _records(req)
    resolved = _resolve_years(records, req.commodity, req.years)
    rows = []
    for year in resolved:
        matrix = load_flows(records, year, req.commodity)
        direct, inverted = _rank_pair(matrix, req.alpha, req.tol, req.max_iter)
        imports = mass_rank(matrix, RankKind.IMPORT)
        exports = mass_rank(matrix, RankKind.EXPORT)
        rows.append(
            schemas.CorrelatorRow(
                year=year,
                n=matrix.n,
                kappa=correlator(direct, inverted),
                kappa_mass=correlator(imports, exports),
            )
        )
    return schemas.CorrelatorResponse(commodity=req.commodity, alpha=req.alpha, rows=rows)


@app.post("/summary", response_model=schemas.SummaryResponse)
def summary(req: schemas.SummaryRequest) -> schemas.SummaryResponse:
    records = _records(req)
    resolved = _resolve_years(records, req.commodity, req.years, minimum=2)
    snapshots = [load_flows(records, year, req.commodity) for year in resolved]
    return schemas.SummaryResponse(
        commodity=req.commodity,
        rows=[
            schemas.SummaryRow(
                year=row.year,
                n=row.n,
                links_total=row.links_total,
                links_per_country=row.links_per_country,
                total_mass=row.total_mass,
            )
            for row in yearly_summary(snapshots)
        ],
    )


@app.post("/rmwtn", response_model=schemas.RmwtnResponse)
def rmwtn(req: schemas.RmwtnRequest) -> schemas.RmwtnResponse:
    config = RmwtnConfig(n=req.n, seed=req.seed, variant=Variant(req.variant))
    members = ensemble_run(
        config, req.realizations, alpha=req.alpha, tol=req.tol, max_iter=req.max_iter
    )
    codes = synthetic_registry(req.n).codes
    points = [
        schemas.RmwtnPoint(
            realization=m.realization,
            code=codes[i],
            K=int(m.k[i]),
            Kstar=int(m.k_star[i]),
        )
        for m in members
        for i in range(req.n)
    ]
    histogram = spindle_histogram(
        ((int(m.k[i]), int(m.k_star[i]), req.n) for m in members for i in range(req.n)),
        rescale=req.rescale,
        cell=(req.cell_width, req.cell_height),
    )
    return schemas.RmwtnResponse(
        n=req.n,
        seed=req.seed,
        variant=config.variant.value,
        realizations=req.realizations,
        alpha=req.alpha,
        points=points,
        histogram=schemas.SpindleStats(**_spindle_stats(histogram)),
    )
