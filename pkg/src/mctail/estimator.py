"""Monte Carlo tail exponent estimator: match an empirical Hill curve against
the grid of expected curves, and simulate its finite-sample quantiles."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from mctail.hill import (TailEstimationError, as_sample, hill_from_logs, raise_if_invalid, tail_transform,
                         top_order_logs)
from mctail.mcgrid import GridSpec, GridSurface
from mctail.stable import RngStream, draw

DEFAULT_LEVELS = (0.005, 0.025, 0.05, 0.95, 0.975, 0.995)
# first stream-cell index used for quantile simulations; keeps them clear of grid rows
CI_CELL_BASE = 1_000_000


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class McEstimate:
    alpha_hat: float
    loss: float
    grid_spec: GridSpec = field(repr=False)
    quantiles: dict[float, float] = field(default_factory=dict)
    failures: int = 0
    dropped: int = 0


def empirical_curve(s, grid: GridSurface) -> np.ndarray:
    """Hill estimates of ``s`` over the grid's k values, after the grid's tail transform."""
    s = as_sample(s)
    if len(s) != grid.spec.n:
        raise LengthMismatch(f"sample has n={len(s)} but the grid was simulated at n={grid.spec.n}")
    t = tail_transform(s, grid.spec.tail_mode)
    ks = grid.kgrid.ks
    logs = top_order_logs(t.values, int(ks[-1]) + 1)
    if logs.size < ks[-1] + 1:
        logs = np.concatenate([logs, np.full(int(ks[-1]) + 1 - logs.size, np.nan)])
    curve = hill_from_logs(logs, ks)
    bad = ~np.isfinite(curve)
    if bad.any():
        i = int(np.argmax(bad))
        raise_if_invalid(float(curve[i]), int(ks[i]), len(t))
    return curve


def loss_profile(curve: np.ndarray, grid: GridSurface) -> np.ndarray:
    """Sum over k of |curve_k - E[alpha_hat(alpha0, k)]| for every alpha0 row."""
    return np.abs(np.asarray(curve)[..., None, :] - grid.mean_curve).sum(axis=-1)


def estimate_curve(curve: np.ndarray, grid: GridSurface) -> McEstimate:
    losses = loss_profile(curve, grid)
    # np.argmin returns the first minimum, i.e. the smallest alpha0 on ties
    i = int(np.argmin(losses))
    return McEstimate(float(grid.spec.alpha0_values[i]), float(losses[i]), grid.spec)


def estimate(s, grid: GridSurface) -> McEstimate:
    s = as_sample(s)
    est = estimate_curve(empirical_curve(s, grid), grid)
    dropped = len(s) - len(tail_transform(s, grid.spec.tail_mode))
    return McEstimate(est.alpha_hat, est.loss, grid.spec, dropped=dropped)


def nearest_rank_quantile(values, p: float) -> float:
    """Smallest value whose empirical CDF reaches ``p`` (rank ceil(p*N), 1-based)."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("no values")
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p}")
    rank = max(1, math.ceil(round(p * v.size, 9)))
    return float(v[rank - 1])


def _ci_cell(alpha_point: float) -> int:
    return CI_CELL_BASE + int(round(alpha_point * 10_000))


def _estimate_block(args) -> tuple[np.ndarray, int]:
    alpha_point, grid, seed, start, stop = args
    spec = grid.spec
    params = spec.params(alpha_point)
    ks = grid.kgrid.ks
    x = np.stack([draw(params, spec.n, RngStream(seed, (_ci_cell(alpha_point), r)))
                  for r in range(start, stop)])
    curves = hill_from_logs(top_order_logs(x, int(ks[-1]) + 1, spec.tail_mode), ks)
    ok = np.isfinite(curves).all(axis=1)
    losses = loss_profile(curves[ok], grid)
    return grid.alpha0[np.argmin(losses, axis=1)], int((~ok).sum())


def simulate_estimates(alpha_point: float, grid: GridSurface, replications: int = 100,
                       seed: int = 2010, workers: int = 1) -> tuple[np.ndarray, int]:
    """Estimates on ``replications`` fresh samples from S(alpha_point, beta, gamma, delta).

    Returns the estimates of the successful replications (in replication
    order) and the number of replications that failed.
    """
    if not (1.0 < alpha_point <= 2.0):
        raise ValueError(f"alpha_point must lie in (1, 2], got {alpha_point}")
    if replications < 2:
        raise ValueError("replications must be at least 2")
    chunk = max(1, min(replications, 2_000_000 // grid.spec.n))
    jobs = [(alpha_point, grid, seed, a, min(replications, a + chunk))
            for a in range(0, replications, chunk)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_estimate_block, jobs))
    else:
        parts = [_estimate_block(j) for j in jobs]
    return np.concatenate([p[0] for p in parts]), sum(p[1] for p in parts)


def confidence_quantiles(alpha_point: float, grid: GridSurface, levels=DEFAULT_LEVELS,
                         replications: int = 100, seed: int = 2010, workers: int = 1) -> dict[float, float]:
    levels = tuple(float(p) for p in levels)
    if any(not (0.0 < p < 1.0) for p in levels):
        raise ValueError("levels must lie in (0, 1)")
    ests, _ = simulate_estimates(alpha_point, grid, replications, seed, workers)
    if ests.size == 0:
        raise TailEstimationError(f"every replication failed at alpha={alpha_point}")
    return {p: nearest_rank_quantile(ests, p) for p in levels}


def estimate_with_ci(s, grid: GridSurface, levels=DEFAULT_LEVELS, replications: int = 100,
                     seed: int = 2010, workers: int = 1) -> McEstimate:
    """Point estimate plus quantiles simulated at that point estimate."""
    point = estimate(s, grid)
    ests, failures = simulate_estimates(point.alpha_hat, grid, replications, seed, workers)
    if ests.size == 0:
        raise TailEstimationError(f"every replication failed at alpha={point.alpha_hat}")
    q = {float(p): nearest_rank_quantile(ests, p) for p in levels}
    return McEstimate(point.alpha_hat, point.loss, grid.spec, q, failures, point.dropped)
