"""Feedback particle filter engine."""

from ._core import (
    ConfigError,
    DivergenceError,
    FilterCollapseError,
    GridTooSmallError,
    Model,
    __version__,
    default_bandwidth,
    dns_gain,
    fourier_gain,
    kalman_bucy,
    kalman_gain,
    ks_filter,
    make_model,
    quadrature_gain,
    relative_mse,
    run_bootstrap,
    run_fpf,
    run_scenario,
    simulate_truth,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "FilterCollapseError",
    "GridTooSmallError",
    "Model",
    "__version__",
    "default_bandwidth",
    "dns_gain",
    "fourier_gain",
    "kalman_bucy",
    "kalman_gain",
    "ks_filter",
    "make_model",
    "quadrature_gain",
    "relative_mse",
    "run_bootstrap",
    "run_fpf",
    "run_scenario",
    "simulate_truth",
]
