"""Seeded synthetic price series with stable log returns (used for the bundled demo file)."""
from __future__ import annotations

import csv
import io
from datetime import date, timedelta
from importlib import resources

import numpy as np

from mctail.stable import SQRT2_2, RngStream, StableParams, draw

SYNTHETIC_SEED = 20100101
SYNTHETIC_ALPHA = 1.7


def synthetic_prices(rows: int = 2001, alpha: float = SYNTHETIC_ALPHA, seed: int = SYNTHETIC_SEED,
                     scale: float = 0.01, start: float = 100.0) -> np.ndarray:
    """Prices whose log returns are ``scale`` times S(alpha, 0, sqrt(2)/2, 0) draws."""
    x = draw(StableParams(alpha, 0.0, SQRT2_2, 0.0), rows - 1, RngStream(seed, (0, 0)))
    return start * np.exp(np.concatenate([[0.0], np.cumsum(scale * x)]))


def synthetic_csv(rows: int = 2001, **kwargs) -> str:
    prices = synthetic_prices(rows, **kwargs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["date", "close"])
    day = date(2002, 1, 1)
    for p in prices:
        w.writerow([day.isoformat(), "%.17g" % p])
        day += timedelta(days=1)
    return buf.getvalue()


def bundled_prices_path():
    return resources.files("mctail") / "data" / "synthetic_prices.csv"
