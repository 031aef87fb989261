"""Lognormal SABR Monte Carlo lab for volatility-swap bounds.

Simulates the lognormal SABR model with a conditional (mixing) Monte Carlo
engine, extracts the at-the-money and zero-vanna implied volatilities, and
verifies that both sit below the volatility swap strike at the rates the
short-maturity closed forms predict.
"""

from .asymptotics import (
    AsymptoticReport,
    asymptotic_report,
    atmi_curvature_rho0,
    atmi_slope_bound,
    eq9_positivity,
    t1_bound,
    t1_leading,
    t2_exact,
    t2_leading,
    t3_exact,
    t3_leading,
    t4_exact,
    t4_leading,
    zviv_slope_limit,
)
from .blackscholes import (
    BsQuote,
    bs_call,
    bs_vega,
    d1d2,
    implied_vol,
    normal_cdf,
    normal_pdf,
)
from .errors import (
    BracketFailureError,
    InvalidConfigError,
    MissingPathsError,
    NoConvergenceError,
    OutOfBoundsError,
    VolboundError,
)
from .estimators import (
    Estimate,
    MixingPricer,
    euler_oracle_price,
    malliavin_functionals,
    mixing_call_price,
    volswap_strike,
)
from .experiments import (
    CheckResult,
    SweepConfig,
    SweepRow,
    VerifyReport,
    figure_config,
    run_sweep,
    verify_report,
    write_tsv,
)
from .sabr import (
    CHUNK_PATHS,
    PathBatch,
    SabrParams,
    THREADS_ENV_VAR,
    expected_integrated_variance,
    moment_sigma,
    simulate_paths,
)
from .smile import SmileSolution, atmi, zero_vanna

__version__ = "0.1.0"

__all__ = [
    "AsymptoticReport",
    "BracketFailureError",
    "BsQuote",
    "CHUNK_PATHS",
    "CheckResult",
    "Estimate",
    "InvalidConfigError",
    "MissingPathsError",
    "MixingPricer",
    "NoConvergenceError",
    "OutOfBoundsError",
    "PathBatch",
    "SabrParams",
    "SmileSolution",
    "SweepConfig",
    "SweepRow",
    "THREADS_ENV_VAR",
    "VerifyReport",
    "VolboundError",
    "asymptotic_report",
    "atmi",
    "atmi_curvature_rho0",
    "atmi_slope_bound",
    "bs_call",
    "bs_vega",
    "d1d2",
    "eq9_positivity",
    "euler_oracle_price",
    "expected_integrated_variance",
    "figure_config",
    "implied_vol",
    "malliavin_functionals",
    "mixing_call_price",
    "moment_sigma",
    "normal_cdf",
    "normal_pdf",
    "run_sweep",
    "simulate_paths",
    "t1_bound",
    "t1_leading",
    "t2_exact",
    "t2_leading",
    "t3_exact",
    "t3_leading",
    "t4_exact",
    "t4_leading",
    "verify_report",
    "volswap_strike",
    "write_tsv",
    "zero_vanna",
    "zviv_slope_limit",
]
