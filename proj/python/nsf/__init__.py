"""Python interface to the nsf simulator core."""

from ._core import (
    ConfigError,
    InvariantBreach,
    SolverError,
    conductivity,
    config_hash,
    equilibrium,
    g_continuity,
    g_k,
    kirchhoff,
    kirchhoff_inverse,
    parse_config,
    record_columns,
    run,
    stress,
    stress_power,
    t_k,
    t_k_delta,
    t_k_delta_d1,
    t_k_delta_d2,
    verify,
)

__all__ = [
    "ConfigError",
    "InvariantBreach",
    "SolverError",
    "conductivity",
    "config_hash",
    "equilibrium",
    "g_continuity",
    "g_k",
    "kirchhoff",
    "kirchhoff_inverse",
    "parse_config",
    "record_columns",
    "run",
    "stress",
    "stress_power",
    "t_k",
    "t_k_delta",
    "t_k_delta_d1",
    "t_k_delta_d2",
    "verify",
]


def records(result):
    """Records of a run result as a list of column -> value dicts."""
    cols = result["columns"]
    return [dict(zip(cols, row)) for row in result["records"]]
