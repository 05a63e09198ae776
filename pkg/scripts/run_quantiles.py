"""Quantiles of the Monte Carlo estimator on simulated S(alpha) samples of length 1000."""
import argparse
from pathlib import Path

from mctail.experiments import estimator_quantile_study
from mctail.mcgrid import GridSpec, load_grid, save_grid, simulate_grid

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--grid", type=Path, default=Path("results/n1000.grid"), help="reused if present")
ap.add_argument("--reps", type=int, default=100)
ap.add_argument("--seed", type=int, default=2010)
ap.add_argument("--workers", type=int, default=1)
ap.add_argument("--out", type=Path, default=Path("results/quantiles"))
a = ap.parse_args()

if a.grid.exists():
    grid = load_grid(a.grid)
else:
    a.grid.parent.mkdir(parents=True, exist_ok=True)
    grid = simulate_grid(GridSpec(n=1000), workers=a.workers)
    save_grid(grid, a.grid)
rep = estimator_quantile_study(grid, replications=a.reps, seed=a.seed, workers=a.workers)
rep.write(a.out)
cols = ["alpha", "q0.5", "q2.5", "q5", "point", "q95", "q97.5", "q99.5"]
print("".join(c.rjust(8) for c in cols))
for r in rep.tables["quantiles"]:
    print("".join(f"{r[c]:>8.2f}" for c in cols))
