"""Monte Carlo-based tail exponent estimation for heavy-tailed data."""
from mctail.estimator import McEstimate, confidence_quantiles, estimate, estimate_with_ci
from mctail.hill import HillCurve, KGrid, Sample, hill_curve, hill_estimate, tail_transform
from mctail.mcgrid import GridSpec, GridSurface, load_grid, save_grid, simulate_grid
from mctail.stable import RngStream, StableParams, characteristic_function, sample, stable_mean, tail_constant

__version__ = "0.1.0"

__all__ = [
    "McEstimate", "confidence_quantiles", "estimate", "estimate_with_ci",
    "HillCurve", "KGrid", "Sample", "hill_curve", "hill_estimate", "tail_transform",
    "GridSpec", "GridSurface", "load_grid", "save_grid", "simulate_grid",
    "RngStream", "StableParams", "characteristic_function", "sample", "stable_mean", "tail_constant",
]
