"""Command-line front end; every subcommand calls the service and writes files.

Commands run in-process by default (the service app is mounted on the HTTP
client directly); `--server URL` redirects the same requests to a running
instance. All artifacts are written atomically and are byte-identical across
reruns with the same configuration.
"""

from __future__ import annotations

import argparse
import asyncio
import os
import re
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .client import EXIT_INPUT, ClientError, ServiceClient
from .output import csv_text, json_text, write_atomic

RANK_HEADER = ("code", "K", "Kstar", "K2", "Kimport", "Kexport")
LEADER_HEADER = ("rank", "K", "Kstar", "K2", "Kimport", "Kexport")
FIT_HEADER = ("kind", "beta", "stderr", "r_squared", "k_min", "k_max")
SPECTRUM_HEADER = ("re", "im")
HISTOGRAM_HEADER = ("x", "y", "count")
SERIES_HEADER = ("code", "year_from", "year_to", "kpk", "dv2")
CURVE_HEADER = ("kpk", "mean", "smoothed", "count")
BANDS_HEADER = ("band_lo", "band_hi", "window_start", "window_end", "mean", "count", "partial")
CORRELATOR_HEADER = ("year", "n", "kappa", "kappa_mass")
SUMMARY_HEADER = ("year", "n", "links_total", "links_per_country", "total_mass")
POINTS_HEADER = ("realization", "code", "K", "Kstar")

_YEAR_RANGE = re.compile(r"^(\d{1,5})-(\d{1,5})$")


def _parse_year_spec(text: str | None) -> list[int] | None:
    if text is None:
        return None
    m = _YEAR_RANGE.match(text)
    if m:
        first, last = int(m[1]), int(m[2])
        if first > last:
            raise ClientError(f"bad --year range {text!r}: start after end", EXIT_INPUT)
        return list(range(first, last + 1))
    try:
        return [int(text)]
    except ValueError:
        raise ClientError(
            f"bad --year {text!r}: expected YYYY or YYYY-YYYY", EXIT_INPUT
        ) from None


def _parse_cell(text: str) -> tuple[float, float]:
    width, sep, height = text.partition("x")
    if not sep:
        raise ClientError(f"bad --cell {text!r}: expected WxH", EXIT_INPUT)
    try:
        w, h = float(width), float(height)
    except ValueError:
        raise ClientError(f"bad --cell {text!r}: expected WxH", EXIT_INPUT) from None
    if w <= 0 or h <= 0:
        raise ClientError("--cell sides must be positive", EXIT_INPUT)
    return w, h


def _parse_bands(text: str) -> list[tuple[int, int]]:
    bands = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise ClientError(f"bad --bands {text!r}: expected LO:HI,...", EXIT_INPUT)
        try:
            bands.append((int(lo), int(hi)))
        except ValueError:
            raise ClientError(
                f"bad --bands {text!r}: expected LO:HI,...", EXIT_INPUT
            ) from None
    return bands


def _parse_fit_range(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    lo, sep, hi = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return int(lo), int(hi)
    except ValueError:
        raise ClientError(
            f"bad --fit-range {text!r}: expected KMIN:KMAX", EXIT_INPUT
        ) from None


def _sanitize(token: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", token) or "_"


def _read_inputs(paths: Sequence[Path]) -> list[str]:
    texts = []
    for p in paths:
        try:
            texts.append(p.read_text())
        except OSError as exc:
            raise ClientError(f"cannot read input {p}: {exc}", EXIT_INPUT) from exc
    return texts


def _thread_limit() -> int:
    raw = os.environ.get("TRADERANK_THREADS")
    if raw is None:
        return max(1, min(8, os.cpu_count() or 1))
    try:
        value = int(raw)
    except ValueError:
        raise ClientError(
            f"TRADERANK_THREADS must be an integer, got {raw!r}", EXIT_INPUT
        ) from None
    if value < 1:
        raise ClientError("TRADERANK_THREADS must be at least 1", EXIT_INPUT)
    return value


async def _resolve_years(
    client: ServiceClient,
    texts: list[str],
    commodity: str,
    requested: list[int] | None,
) -> list[int]:
    if requested is not None:
        return requested
    data = await client.call("/years", {"csv": texts, "commodity": commodity})
    return list(data["years"])


async def _fan_out(
    client: ServiceClient, endpoint: str, payloads: list[dict[str, Any]]
) -> list[dict[str, Any]]:
    semaphore = asyncio.Semaphore(_thread_limit())

    async def one(payload: dict[str, Any]) -> dict[str, Any]:
        async with semaphore:
            return await client.call(endpoint, payload)

    return list(await asyncio.gather(*(one(p) for p in payloads)))


def _write_sidecar(
    args: argparse.Namespace, command: str, meta: dict[str, Any], started: float
) -> None:
    payload: dict[str, Any] = {"command": command, "version": __version__, **meta}
    if args.timings:
        payload["timings"] = {"seconds": time.perf_counter() - started}
    write_atomic(args.out / f"{command}.meta.json", json_text(payload))


def _common_meta(args: argparse.Namespace) -> dict[str, Any]:
    meta: dict[str, Any] = {"format": args.format, "out": str(args.out)}
    if args.server is not None:
        meta["server"] = args.server
    if hasattr(args, "input"):
        meta["inputs"] = [str(p) for p in args.input]
    if hasattr(args, "commodity"):
        meta["commodity"] = args.commodity
    return meta


def _cmd_rank(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    texts = _read_inputs(args.input)
    fit_range = _parse_fit_range(args.fit_range)

    async def run() -> tuple[list[int], list[dict[str, Any]]]:
        async with ServiceClient(args.server) as client:
            years = await _resolve_years(
                client, texts, args.commodity, _parse_year_spec(args.year)
            )
            payloads = [
                {
                    "csv": texts,
                    "commodity": args.commodity,
                    "year": year,
                    "alpha": args.alpha,
                    "tol": args.tol,
                    "max_iter": args.max_iter,
                    "top": args.top,
                    "fit_range": fit_range,
                }
                for year in years
            ]
            return years, await _fan_out(client, "/rank", payloads)

    years, results = asyncio.run(run())
    commodity = _sanitize(args.commodity)
    for year, res in zip(years, results):
        stem = f"rank_{year}_{commodity}"
        if args.format == "csv":
            table = [
                (r["code"], r["K"], r["Kstar"], r["K2"], r["Kimport"], r["Kexport"])
                for r in res["table"]
            ]
            write_atomic(args.out / f"{stem}.csv", csv_text(RANK_HEADER, table))
            leaders = [
                (r["rank"], r["K"], r["Kstar"], r["K2"], r["Kimport"], r["Kexport"])
                for r in res["leaders"]
            ]
            write_atomic(
                args.out / f"{stem}_top{args.top}.csv", csv_text(LEADER_HEADER, leaders)
            )
            if res.get("fits"):
                fits = [
                    (f["kind"], f["beta"], f["stderr"], f["r_squared"], f["k_min"], f["k_max"])
                    for f in res["fits"]
                ]
                write_atomic(args.out / f"{stem}_fit.csv", csv_text(FIT_HEADER, fits))
        else:
            write_atomic(args.out / f"{stem}.json", json_text(res))
        write_atomic(
            args.out / f"registry_{year}_{commodity}.json", json_text(res["registry"])
        )
        print(f"rank {year} {args.commodity}: n={res['n']} -> {stem}.{args.format}")
    meta = _common_meta(args) | {
        "alpha": args.alpha,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "top": args.top,
        "fit_range": list(fit_range) if fit_range else None,
        "years": years,
        "snapshots": [
            {
                "year": year,
                "n": res["n"],
                "pagerank_iterations": res["pagerank_iterations"],
                "cheirank_iterations": res["cheirank_iterations"],
            }
            for year, res in zip(years, results)
        ],
    }
    _write_sidecar(args, "rank", meta, started)
    return 0


def _cmd_spectrum(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    texts = _read_inputs(args.input)

    async def run() -> tuple[list[int], list[dict[str, Any]]]:
        async with ServiceClient(args.server) as client:
            years = await _resolve_years(
                client, texts, args.commodity, _parse_year_spec(args.year)
            )
            payloads = [
                {
                    "csv": texts,
                    "commodity": args.commodity,
                    "year": year,
                    "alpha": args.alpha,
                    "gap_threshold": args.gap_threshold,
                }
                for year in years
            ]
            return years, await _fan_out(client, "/spectrum", payloads)

    years, results = asyncio.run(run())
    commodity = _sanitize(args.commodity)
    for year, res in zip(years, results):
        stem = f"spectrum_{year}_{commodity}"
        if args.format == "csv":
            rows = [(v["re"], v["im"]) for v in res["eigenvalues"]]
            write_atomic(args.out / f"{stem}.csv", csv_text(SPECTRUM_HEADER, rows))
        else:
            write_atomic(args.out / f"{stem}.json", json_text(res))
        print(
            f"spectrum {year} {args.commodity}: n={res['n']} -> {stem}.{args.format}"
        )
    meta = _common_meta(args) | {
        "alpha": args.alpha,
        "gap_threshold": args.gap_threshold,
        "years": years,
        "snapshots": [
            {"year": year, "n": res["n"], "quasi_degenerate": res["quasi_degenerate"]}
            for year, res in zip(years, results)
        ],
    }
    _write_sidecar(args, "spectrum", meta, started)
    return 0


def _single_request(args: argparse.Namespace, endpoint: str, payload: dict[str, Any]) -> dict[str, Any]:
    async def run() -> dict[str, Any]:
        async with ServiceClient(args.server) as client:
            return await client.call(endpoint, payload)

    return asyncio.run(run())


def _histogram_meta(res: dict[str, Any]) -> dict[str, Any]:
    return {
        "total": res["total"],
        "rescaled": res["rescaled"],
        "cell_width": res["cell_width"],
        "cell_height": res["cell_height"],
        "x_negative": res["x_negative"],
        "x_zero": res["x_zero"],
        "x_positive": res["x_positive"],
    }


def _cmd_spindle(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    texts = _read_inputs(args.input)
    cell = _parse_cell(args.cell)
    res = _single_request(
        args,
        "/spindle",
        {
            "csv": texts,
            "commodity": args.commodity,
            "years": _parse_year_spec(args.year),
            "alpha": args.alpha,
            "tol": args.tol,
            "max_iter": args.max_iter,
            "rescale": args.rescale,
            "cell_width": cell[0],
            "cell_height": cell[1],
        },
    )
    if args.format == "csv":
        rows = [(c["x"], c["y"], c["count"]) for c in res["cells"]]
        write_atomic(args.out / "spindle.csv", csv_text(HISTOGRAM_HEADER, rows))
    else:
        write_atomic(args.out / "spindle.json", json_text(res))
    print(
        f"spindle {args.commodity}: {res['total']} points, "
        f"{len(res['cells'])} occupied cells -> spindle.{args.format}"
    )
    meta = _common_meta(args) | {
        "alpha": args.alpha,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "years": res["years"],
    } | _histogram_meta(res)
    _write_sidecar(args, "spindle", meta, started)
    return 0


def _cmd_velocity(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    texts = _read_inputs(args.input)
    res = _single_request(
        args,
        "/velocity",
        {
            "csv": texts,
            "commodity": args.commodity,
            "years": _parse_year_spec(args.year),
            "alpha": args.alpha,
            "tol": args.tol,
            "max_iter": args.max_iter,
            "bands": _parse_bands(args.bands),
            "window_years": args.window,
        },
    )
    if args.format == "csv":
        samples = [
            (s["code"], s["year_from"], s["year_to"], s["kpk"], s["dv2"])
            for s in res["samples"]
        ]
        write_atomic(args.out / "velocity_series.csv", csv_text(SERIES_HEADER, samples))
        curve = [
            (c["kpk"], c["mean"], c["smoothed"], c["count"]) for c in res["curve"]
        ]
        write_atomic(args.out / "velocity_curve.csv", csv_text(CURVE_HEADER, curve))
        bands = [
            (
                b["band_lo"],
                b["band_hi"],
                b["window_start"],
                b["window_end"],
                b["mean"],
                b["count"],
                b["partial"],
            )
            for b in res["bands"]
        ]
        write_atomic(args.out / "velocity_bands.csv", csv_text(BANDS_HEADER, bands))
    else:
        write_atomic(args.out / "velocity.json", json_text(res))
    print(
        f"velocity {args.commodity}: {len(res['samples'])} samples over "
        f"years {res['years'][0]}-{res['years'][-1]} -> velocity_*.{args.format}"
    )
    meta = _common_meta(args) | {
        "alpha": args.alpha,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "bands": [list(b) for b in _parse_bands(args.bands)],
        "window_years": args.window,
        "years": res["years"],
        "samples": len(res["samples"]),
    }
    _write_sidecar(args, "velocity", meta, started)
    return 0


def _cmd_correlator(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    texts = _read_inputs(args.input)
    res = _single_request(
        args,
        "/correlator",
        {
            "csv": texts,
            "commodity": args.commodity,
            "years": _parse_year_spec(args.year),
            "alpha": args.alpha,
            "tol": args.tol,
            "max_iter": args.max_iter,
        },
    )
    if args.format == "csv":
        rows = [(r["year"], r["n"], r["kappa"], r["kappa_mass"]) for r in res["rows"]]
        write_atomic(args.out / "correlator.csv", csv_text(CORRELATOR_HEADER, rows))
    else:
        write_atomic(args.out / "correlator.json", json_text(res))
    print(
        f"correlator {args.commodity}: {len(res['rows'])} year(s) "
        f"-> correlator.{args.format}"
    )
    meta = _common_meta(args) | {
        "alpha": args.alpha,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "years": [r["year"] for r in res["rows"]],
    }
    _write_sidecar(args, "correlator", meta, started)
    return 0


def _cmd_summary(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    texts = _read_inputs(args.input)
    res = _single_request(
        args,
        "/summary",
        {
            "csv": texts,
            "commodity": args.commodity,
            "years": _parse_year_spec(args.year),
        },
    )
    if args.format == "csv":
        rows = [
            (r["year"], r["n"], r["links_total"], r["links_per_country"], r["total_mass"])
            for r in res["rows"]
        ]
        write_atomic(args.out / "summary.csv", csv_text(SUMMARY_HEADER, rows))
    else:
        write_atomic(args.out / "summary.json", json_text(res))
    print(f"summary {args.commodity}: {len(res['rows'])} year(s) -> summary.{args.format}")
    meta = _common_meta(args) | {"years": [r["year"] for r in res["rows"]]}
    _write_sidecar(args, "summary", meta, started)
    return 0


def _cmd_rmwtn(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    cell = _parse_cell(args.cell)
    res = _single_request(
        args,
        "/rmwtn",
        {
            "n": args.n,
            "seed": args.seed,
            "variant": args.variant,
            "realizations": args.realizations,
            "alpha": args.alpha,
            "tol": args.tol,
            "max_iter": args.max_iter,
            "rescale": args.rescale,
            "cell_width": cell[0],
            "cell_height": cell[1],
        },
    )
    if args.format == "csv":
        points = [
            (p["realization"], p["code"], p["K"], p["Kstar"]) for p in res["points"]
        ]
        write_atomic(args.out / "rmwtn_points.csv", csv_text(POINTS_HEADER, points))
        cells = [(c["x"], c["y"], c["count"]) for c in res["histogram"]["cells"]]
        write_atomic(args.out / "rmwtn_spindle.csv", csv_text(HISTOGRAM_HEADER, cells))
    else:
        write_atomic(args.out / "rmwtn.json", json_text(res))
    print(
        f"rmwtn n={args.n} x{args.realizations}: {len(res['points'])} points "
        f"-> rmwtn_points.{args.format}"
    )
    meta = _common_meta(args) | {
        "n": args.n,
        "seed": args.seed,
        "variant": args.variant,
        "realizations": args.realizations,
        "alpha": args.alpha,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "histogram": _histogram_meta(res["histogram"]),
    }
    _write_sidecar(args, "rmwtn", meta, started)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_output_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument(
        "--server",
        default=None,
        help="base URL of a running service (default: run in-process)",
    )
    p.add_argument(
        "--timings",
        action="store_true",
        help="record wall-clock timings in the sidecar (off keeps reruns byte-identical)",
    )


def _add_data_options(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--input", type=Path, nargs="+", required=True, help="flow CSV file(s)"
    )
    p.add_argument("--year", default=None, help="year or inclusive range YYYY-YYYY")
    p.add_argument("--commodity", default="TOTAL")


def _add_iteration_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=1000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="traderank", description="Rank weighted directed flow networks."
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", help="all five rank columns per snapshot")
    _add_data_options(p)
    _add_iteration_options(p)
    _add_output_options(p)
    p.add_argument("--top", type=int, default=20, help="size of the leaders excerpt")
    p.add_argument(
        "--fit-range",
        default=None,
        metavar="KMIN:KMAX",
        help="also fit log P vs log K over this rank range",
    )
    p.set_defaults(handler=_cmd_rank)

    p = sub.add_parser("spectrum", help="full complex spectrum per snapshot")
    _add_data_options(p)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--gap-threshold", type=float, default=0.01)
    _add_output_options(p)
    p.set_defaults(handler=_cmd_spectrum)

    p = sub.add_parser("spindle", help="rank-plane histogram over years")
    _add_data_options(p)
    _add_iteration_options(p)
    _add_output_options(p)
    p.add_argument("--cell", default="3x3", help="raw-mode cell size WxH")
    p.add_argument(
        "--rescale", action="store_true", help="bin on the fixed 76x152 rescaled grid"
    )
    p.set_defaults(handler=_cmd_spindle)

    p = sub.add_parser("velocity", help="year-over-year rank displacement")
    _add_data_options(p)
    _add_iteration_options(p)
    _add_output_options(p)
    p.add_argument("--bands", default="1:40,41:80,81:120", help="K+K* bands LO:HI,...")
    p.add_argument("--window", type=int, default=5, help="window length in years")
    p.set_defaults(handler=_cmd_velocity)

    p = sub.add_parser("correlator", help="rank-vector overlap per year")
    _add_data_options(p)
    _add_iteration_options(p)
    _add_output_options(p)
    p.set_defaults(handler=_cmd_correlator)

    p = sub.add_parser("summary", help="size, link, and mass aggregates per year")
    _add_data_options(p)
    _add_output_options(p)
    p.set_defaults(handler=_cmd_summary)

    p = sub.add_parser("rmwtn", help="synthetic ensemble points and histogram")
    _add_iteration_options(p)
    _add_output_options(p)
    p.add_argument("--n", type=int, default=227)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--realizations", type=int, default=100)
    p.add_argument("--variant", choices=("pair", "shared", "two"), default="pair")
    p.add_argument("--cell", default="3x3", help="raw-mode cell size WxH")
    p.add_argument(
        "--rescale",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="bin on the fixed 76x152 rescaled grid",
    )
    p.set_defaults(handler=_cmd_rmwtn)

    p = sub.add_parser("serve", help="host the service over HTTP")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=_cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ClientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
