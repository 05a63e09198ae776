"""Contiguous k ranges within 5% of alpha for k <= 1% of n."""
import argparse
from pathlib import Path

from mctail.experiments import small_k_study

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--length", type=int, default=10_000, help="10^6 reproduces the full-size study (slow)")
ap.add_argument("--reps", type=int, default=200)
ap.add_argument("--seed", type=int, default=2010)
ap.add_argument("--workers", type=int, default=1)
ap.add_argument("--out", type=Path, default=Path("results/small_k"))
a = ap.parse_args()

rep = small_k_study(a.length, replications=a.reps, seed=a.seed, workers=a.workers)
rep.write(a.out)
for r in rep.tables["ranges"]:
    span = "empty" if r["empty"] else f"{r['pct_start']:.4g}% - {r['pct_end']:.4g}%"
    print(f"alpha={r['alpha']:.1f}  {span}")
