"""Regenerate the bundled synthetic price file (2,001 daily closes, S(1.7) log returns)."""
import sys
from pathlib import Path

from mctail.synthetic import synthetic_csv

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "src/mctail/data/synthetic_prices.csv"
out.write_text(synthetic_csv(), encoding="utf-8")
print(f"wrote {out}")
