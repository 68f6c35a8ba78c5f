"""Ranking toolkit for weighted directed flow networks.

Builds column-stochastic matrices from money-flow tables, ranks nodes by
damped stationary vectors (direct and inverted flows) and by mass shares,
computes full complex spectra, and provides rank-plane statistics plus a
synthetic flow-matrix generator for ensemble studies.
"""

__version__ = "0.1.0"

from .analysis import (
    PowerLawFit,
    SpindleHistogram,
    VelocityAggregate,
    VelocitySeries,
    correlator,
    fit_power_law,
    spindle_histogram,
    velocity_aggregate,
    velocity_sq,
    yearly_summary,
)
from .google_matrix import (
    Direction,
    GoogleMatrix,
    StochasticMatrix,
    build_google,
    build_stochastic,
    matvec,
    stochastic_from_flows,
)
from .rank import (
    ConvergenceError,
    RankKind,
    RankTable,
    RankVector,
    cheirank,
    mass_rank,
    pagerank,
    rank_table,
    two_d_rank,
)
from .rmwtn import RmwtnConfig, Variant, ensemble_run, generate, realization_seed
from .spectrum import (
    ScalingMismatchError,
    Spectrum,
    detect_quasi_degenerate,
    full_spectrum,
    verify_alpha_scaling,
)
from .trade_graph import (
    CountryRegistry,
    MoneyMatrix,
    TradeDataError,
    TradeFlowRecord,
    available_years,
    link_stats,
    load_flows,
    mass_vectors,
    mirror_fill,
    parse_flow_csv,
)

__all__ = [
    "__version__",
    "ConvergenceError",
    "CountryRegistry",
    "Direction",
    "GoogleMatrix",
    "MoneyMatrix",
    "PowerLawFit",
    "RankKind",
    "RankTable",
    "RankVector",
    "RmwtnConfig",
    "ScalingMismatchError",
    "Spectrum",
    "SpindleHistogram",
    "StochasticMatrix",
    "TradeDataError",
    "TradeFlowRecord",
    "Variant",
    "VelocityAggregate",
    "VelocitySeries",
    "available_years",
    "build_google",
    "build_stochastic",
    "cheirank",
    "correlator",
    "detect_quasi_degenerate",
    "ensemble_run",
    "fit_power_law",
    "full_spectrum",
    "generate",
    "link_stats",
    "load_flows",
    "mass_rank",
    "mass_vectors",
    "matvec",
    "mirror_fill",
    "pagerank",
    "parse_flow_csv",
    "rank_table",
    "realization_seed",
    "spindle_histogram",
    "stochastic_from_flows",
    "two_d_rank",
    "velocity_aggregate",
    "velocity_sq",
    "verify_alpha_scaling",
    "yearly_summary",
]
