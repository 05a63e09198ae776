"""Seeded finite-sample studies of the Hill estimator and of the Monte Carlo estimator."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from statistics import NormalDist

import numpy as np

from mctail.estimator import nearest_rank_quantile, simulate_estimates
from mctail.hill import KGrid
from mctail.mcgrid import GridSurface, simulate_hill_curves
from mctail.stable import SQRT2_2, StableParams

REPORT_VERSION = 1
QUANTILE_LEVELS = (0.005, 0.025, 0.05, 0.95, 0.975, 0.995)
DESK_LENGTHS = (1000, 10_000)
LONG_RUN_LENGTHS = (100_000, 1_000_000)
STUDY_ALPHAS = tuple(round(1.0 + i / 10.0, 1) for i in range(1, 11))


@dataclass
class StudyReport:
    study_id: str
    parameters: dict
    tables: dict[str, list[dict]]
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def columns(self, table: str) -> list[str]:
        rows = self.tables[table]
        return list(rows[0]) if rows else []

    def column(self, table: str, name: str) -> list:
        return [r[name] for r in self.tables[table]]

    def write(self, out_dir, stamp: bool = False) -> Path:
        """CSV per table plus ``manifest.json``. ``stamp`` adds the creation
        time to the manifest, which makes reruns differ byte-wise."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, rows in self.tables.items():
            with open(out / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                cols = self.columns(name)
                w.writerow(cols)
                for r in rows:
                    w.writerow([_cell(r[c]) for c in cols])
        manifest = {"format_version": REPORT_VERSION, "study_id": self.study_id,
                    "parameters": self.parameters,
                    "tables": {n: {"file": f"{n}.csv", "columns": self.columns(n), "rows": len(r)}
                               for n, r in self.tables.items()}}
        if stamp:
            manifest["created"] = self.created
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                           encoding="utf-8")
        return out


def _cell(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    if isinstance(v, bool):
        return str(v).lower()
    return v


def _params(alpha: float) -> StableParams:
    return StableParams(alpha, 0.0, SQRT2_2, 0.0)


def _mean_curve(job) -> tuple[np.ndarray, np.ndarray]:
    alpha, n, ks, reps, seed, cell, mode = job
    mom, _ = simulate_hill_curves(_params(alpha), n, ks, reps, seed, cell, mode)
    return mom.mean, mom.std


def _run(jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_mean_curve, jobs))
    return [_mean_curve(j) for j in jobs]


def optimal_k_study(lengths=DESK_LENGTHS, alphas=STUDY_ALPHAS, replications: int = 200, seed: int = 2010,
                    k_lo: float = 0.01, k_hi: float = 0.20, extended_hi: float = 0.30,
                    tail_mode: str = "upper", workers: int = 1, curves: bool = True,
                    common: bool = True) -> StudyReport:
    """Optimal k, as a share of n, at which the mean Hill curve is closest to alpha.

    The search runs over (k_lo, k_hi]. Optima on the k_hi edge are flagged
    and the search is repeated up to ``extended_hi`` to show where the
    crossing actually lies. With ``common`` every alpha of a given length
    reuses the same replication streams, which keeps the curves ordered in
    alpha instead of adding independent noise per cell.
    """
    lengths = [int(n) for n in lengths]
    alphas = [float(a) for a in alphas]
    if any(n < 100 for n in lengths):
        raise ValueError("every length must be at least 100")
    if any(not (1.0 < a <= 2.0) for a in alphas):
        raise ValueError("alphas must lie in (1, 2]")
    jobs, grids = [], []
    for i, n in enumerate(lengths):
        full = KGrid.from_fractions(n, k_lo, max(k_hi, extended_hi))
        grids.append(full)
        for j, a in enumerate(alphas):
            jobs.append((a, n, full.ks, replications, seed, 1000 * i + (0 if common else j), tail_mode))
    results = iter(_run(jobs, workers))

    z = NormalDist().inv_cdf(0.975)
    summary, curve_rows = [], []
    for i, n in enumerate(lengths):
        ks = grids[i].ks
        inner = ks <= math.floor(round(k_hi * n, 9))
        for a in alphas:
            mean, std = next(results)
            err = np.abs(mean - a)
            j = int(np.argmin(np.where(inner, err, np.inf)))
            je = int(np.argmin(err))
            summary.append({
                "n": n, "alpha": a, "k_opt": int(ks[j]), "k_opt_pct": 100.0 * ks[j] / n,
                "mean_at_opt": float(mean[j]), "abs_error": float(err[j]),
                "boundary": bool(j == int(np.flatnonzero(inner)[-1])),
                "k_opt_extended": int(ks[je]), "k_opt_extended_pct": 100.0 * ks[je] / n,
            })
            if curves:
                for k, m, s in zip(ks[inner].tolist(), mean[inner].tolist(), std[inner].tolist()):
                    curve_rows.append({"n": n, "alpha": a, "k": k, "k_fraction": k / n, "mean": m, "std": s,
                                       "ci_low": m - z * m / math.sqrt(k), "ci_high": m + z * m / math.sqrt(k)})
    tables = {"optimal_k": summary}
    if curves:
        tables["mean_curves"] = curve_rows
    params = {"lengths": lengths, "alphas": alphas, "replications": replications, "seed": seed,
              "k_lo": k_lo, "k_hi": k_hi, "extended_hi": extended_hi, "tail_mode": tail_mode,
              "common_random_numbers": common}
    return StudyReport("optimal-k", params, tables)


def longest_run(mask: np.ndarray) -> tuple[int, int] | None:
    """Index bounds (inclusive) of the longest run of True; first one on ties."""
    best, start = None, None
    for i, v in enumerate(list(mask) + [False]):
        if v and start is None:
            start = i
        elif not v and start is not None:
            if best is None or i - 1 - start > best[1] - best[0]:
                best = (start, i - 1)
            start = None
    return best


def small_k_study(length: int = 10_000, alphas=STUDY_ALPHAS, replications: int = 200, seed: int = 2010,
                  tolerance: float = 0.05, hi: float = 0.01, tail_mode: str = "upper",
                  workers: int = 1, common: bool = True) -> StudyReport:
    """Longest contiguous k range in [1, hi*n] where |E[alpha_hat(k)]/alpha - 1| <= tolerance.

    ``common`` shares replication streams across alphas as in ``optimal_k_study``.
    """
    n = int(length)
    kg = KGrid(n, tuple(range(1, math.floor(round(hi * n, 9)) + 1)))
    alphas = [float(a) for a in alphas]
    jobs = [(a, n, kg.ks, replications, seed, 0 if common else j, tail_mode) for j, a in enumerate(alphas)]
    rows, curve_rows = [], []
    for a, (mean, std) in zip(alphas, _run(jobs, workers)):
        run = longest_run(np.abs(mean / a - 1.0) <= tolerance)
        if run is None:
            rows.append({"alpha": a, "empty": True, "k_start": "", "k_end": "",
                         "pct_start": float("nan"), "pct_end": float("nan")})
        else:
            k0, k1 = int(kg.ks[run[0]]), int(kg.ks[run[1]])
            rows.append({"alpha": a, "empty": False, "k_start": k0, "k_end": k1,
                         "pct_start": 100.0 * k0 / n, "pct_end": 100.0 * k1 / n})
        for k, m, s in zip(kg.k_values, mean.tolist(), std.tolist()):
            curve_rows.append({"alpha": a, "k": k, "k_fraction": k / n, "mean": m, "std": s})
    params = {"length": n, "alphas": alphas, "replications": replications, "seed": seed,
              "tolerance": tolerance, "hi": hi, "tail_mode": tail_mode, "common_random_numbers": common}
    return StudyReport("small-k", params, {"ranges": rows, "mean_curves": curve_rows})


def estimator_quantile_study(grid: GridSurface, alphas=STUDY_ALPHAS, replications: int = 100,
                             seed: int = 2010, levels=QUANTILE_LEVELS, workers: int = 1) -> StudyReport:
    """Quantiles of the Monte Carlo estimator on simulated samples at each alpha.

    The ``point`` column is the median estimate, placed between the lower
    and upper quantiles.
    """
    levels = sorted(float(p) for p in levels)
    rows, raw = [], []
    for a in alphas:
        ests, failures = simulate_estimates(float(a), grid, replications, seed, workers)
        q = {p: nearest_rank_quantile(ests, p) for p in levels}
        row = {"alpha": float(a)}
        row.update({f"q{100 * p:g}": q[p] for p in levels if p < 0.5})
        row["point"] = float(np.median(ests))
        row.update({f"q{100 * p:g}": q[p] for p in levels if p >= 0.5})
        row["mean"] = float(np.mean(ests))
        row["failures"] = failures
        rows.append(row)
        raw.extend({"alpha": float(a), "replication": r, "estimate": float(e)} for r, e in enumerate(ests))
    params = {"n": grid.spec.n, "alphas": [float(a) for a in alphas], "replications": replications,
              "seed": seed, "levels": levels, "grid_seed": grid.spec.master_seed,
              "grid_replications": grid.spec.replications, "tail_mode": grid.spec.tail_mode}
    return StudyReport("quantiles", params, {"quantiles": rows, "estimates": raw})
