"""Command-line front end: ``mctail grid|estimate|hill-plot|study|hist``."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mctail import estimator, experiments, hill, mcgrid

MIN_OBSERVATIONS = 100
DEFAULT_SEED = 2010


class CliError(Exception):
    """Input problem reported as ``error: <category>: <message>``."""

    category = "InputError"


class MissingColumn(CliError):
    category = "MissingColumn"


class UnparsableRow(CliError):
    category = "UnparsableRow"


class TooShort(CliError):
    category = "TooShort"


class NotDivisible(CliError):
    category = "NotDivisible"


@dataclass(frozen=True, eq=False)
class ReturnsSeries:
    label: str
    observations: np.ndarray
    source: str = ""
    transform: str = "log-return"
    dropped: int = 0
    period: int | None = None

    def __len__(self) -> int:
        return self.observations.size


def _read_rows(path: Path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    text = path.read_text(encoding="utf-8-sig")
    lines = text.splitlines()
    if not lines:
        raise UnparsableRow(f"{path}: empty file")
    delim = "\t" if "\t" in lines[0] else ","
    reader = csv.reader(lines, delimiter=delim)
    header = [h.strip() for h in next(reader)]
    rows = [(i + 2, r) for i, r in enumerate(reader) if any(c.strip() for c in r)]
    return header, rows


def ingest(path, fmt: str = "prices", column: str | None = None, last: int | None = None,
           min_length: int = MIN_OBSERVATIONS) -> ReturnsSeries:
    """Read a delimited file into a returns series.

    ``prices`` input becomes log returns ln(P_t / P_{t-1}) after rows with a
    non-finite or non-positive price are dropped; ``returns`` input is taken
    as-is minus non-finite rows. ``last`` keeps the final N returns.
    """
    path = Path(path)
    if fmt not in ("prices", "returns"):
        raise CliError(f"unknown format {fmt!r}")
    header, rows = _read_rows(path)
    if column is None:
        idx = len(header) - 1
    elif column in header:
        idx = header.index(column)
    else:
        raise MissingColumn(f"{path}: column {column!r} not in header {header}")
    vals, dropped = [], 0
    for lineno, r in rows:
        if idx >= len(r):
            raise UnparsableRow(f"{path}:{lineno}: missing value for column {header[idx]!r}")
        try:
            v = float(r[idx].strip())
        except ValueError:
            raise UnparsableRow(f"{path}:{lineno}: cannot parse {r[idx]!r} as a number") from None
        if not math.isfinite(v) or (fmt == "prices" and v <= 0):
            dropped += 1
            continue
        vals.append(v)
    arr = np.asarray(vals, dtype=float)
    if fmt == "prices":
        arr = np.diff(np.log(arr)) if arr.size > 1 else np.empty(0)
    if last is not None:
        arr = arr[-int(last):]
    if arr.size < min_length:
        raise TooShort(f"{path}: {arr.size} observations after transform, need at least {min_length}")
    return ReturnsSeries(label=path.stem, observations=arr, source=str(path),
                         transform="log-return" if fmt == "prices" else "as-is", dropped=dropped)


def split_periods(s: ReturnsSeries, parts: int) -> list[ReturnsSeries]:
    if parts < 1:
        raise CliError("parts must be positive")
    rem = len(s) % parts
    if rem:
        raise NotDivisible(f"{len(s)} observations do not split into {parts} equal periods "
                           f"(remainder {rem})")
    size = len(s) // parts
    return [ReturnsSeries(s.label, s.observations[i * size:(i + 1) * size], s.source, s.transform,
                          s.dropped, period=i + 1) for i in range(parts)]


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(float(x)) for x in text.split(",") if x.strip()]


def _alpha_range(lo: float, hi: float, step: float) -> tuple[float, ...]:
    count = int(round((hi - lo) / step)) + 1
    return tuple(round(lo + i * step, 10) for i in range(count))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


# -- commands ---------------------------------------------------------------

def cmd_grid_simulate(a) -> None:
    spec = mcgrid.GridSpec(
        n=a.n, alpha0_values=_alpha_range(a.alpha_min, a.alpha_max, a.alpha_step), replications=a.reps,
        k_fractions=(a.k_lo, a.k_hi), tail_mode=a.tail_mode, master_seed=a.seed,
        common_random_numbers=not a.independent_streams)

    def progress(done, total):
        if not a.quiet:
            print(f"\rsimulated {done}/{total} alpha0 rows", end="", file=sys.stderr, flush=True)

    g = mcgrid.simulate_grid(spec, progress, workers=a.workers)
    if not a.quiet:
        print(file=sys.stderr)
    mcgrid.save_grid(g, a.out)
    print(f"wrote {a.out}: {g.mean_curve.shape[0]} alpha0 x {g.mean_curve.shape[1]} k, "
          f"seed={spec.master_seed}, flagged cells={int(g.flagged.sum())}")


ESTIMATE_COLUMNS = ("label", "period", "n", "q0.5", "q2.5", "q5", "alpha_mc", "q95", "q97.5", "q99.5",
                    "loss", "dropped", "ci_failures", "ci_reps", "ci_seed", "grid_seed")


def cmd_estimate(a) -> None:
    grid = mcgrid.load_grid(a.grid)
    series = ingest(a.data, a.format, a.column, a.last)
    periods = split_periods(series, a.split)
    levels = sorted(_floats(a.levels))
    rows = []
    for p in periods:
        if len(p) != grid.spec.n:
            raise estimator.LengthMismatch(
                f"period {p.period} has n={len(p)} observations but the grid was simulated at "
                f"n={grid.spec.n}")
        est = estimator.estimate_with_ci(p.observations, grid, levels, a.ci_reps, a.ci_seed, a.workers)
        row = {"label": p.label, "period": p.period, "n": len(p)}
        row.update({f"q{100 * q:g}": v for q, v in est.quantiles.items() if q < 0.5})
        row["alpha_mc"] = est.alpha_hat
        row.update({f"q{100 * q:g}": v for q, v in est.quantiles.items() if q >= 0.5})
        row.update({"loss": est.loss, "dropped": est.dropped, "ci_failures": est.failures,
                    "ci_reps": a.ci_reps, "ci_seed": a.ci_seed, "grid_seed": grid.spec.master_seed})
        rows.append(row)
    cols = [c for c in ESTIMATE_COLUMNS if c in rows[0]] + [c for c in rows[0] if c not in ESTIMATE_COLUMNS]
    widths = [max(len(c), *(len(_short(r[c])) for r in rows)) for c in cols]
    print("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
    for r in rows:
        print("  ".join(_short(r[c]).rjust(w) for c, w in zip(cols, widths)))
    if a.out_csv:
        _write_csv(a.out_csv, cols, [[_fmt(r[c]) for c in cols] for r in rows])
    if a.out_json:
        meta = {"data": str(a.data), "format": a.format, "grid": str(a.grid), "grid_spec_n": grid.spec.n,
                "grid_seed": grid.spec.master_seed, "grid_replications": grid.spec.replications,
                "tail_mode": grid.spec.tail_mode, "ci_seed": a.ci_seed, "ci_reps": a.ci_reps,
                "levels": levels, "rows_dropped": series.dropped}
        Path(a.out_json).write_text(json.dumps({"meta": meta, "estimates": rows}, indent=2) + "\n",
                                    encoding="utf-8")


def _short(v) -> str:
    if isinstance(v, float):
        return f"{v:.2f}" if abs(v) < 100 else f"{v:.1f}"
    return str(v)


def cmd_hill_plot(a) -> None:
    series = ingest(a.data, a.format, a.column, a.last)
    s = hill.tail_transform(series.observations, a.tail_mode)
    overlay = {}
    if a.overlay_grid:
        grid = mcgrid.load_grid(a.overlay_grid)
        if grid.spec.n != len(series):
            raise estimator.LengthMismatch(f"data has n={len(series)} but the grid n={grid.spec.n}")
        kg = grid.kgrid
        for alpha0 in _floats(a.overlay_alphas):
            overlay[f"grid_{alpha0:g}"] = grid.row(alpha0)
    else:
        kg = hill.KGrid.from_fractions(len(series), a.k_lo, a.k_hi)
    curve = hill.hill_curve(s, kg, a.level)
    header = ["k", "k_fraction", "estimate", "ci_low", "ci_high", *overlay]
    rows = []
    for i, k in enumerate(kg.k_values):
        rows.append([k, _fmt(k / kg.n), _fmt(float(curve.estimates[i])), _fmt(float(curve.ci_low[i])),
                     _fmt(float(curve.ci_high[i])), *(_fmt(float(v[i])) for v in overlay.values())])
    _write_csv(a.out, header, rows)
    print(f"wrote {a.out}: {len(rows)} k values, level={a.level}, tail_mode={a.tail_mode}")


def cmd_hist(a) -> None:
    series = ingest(a.data, a.format, a.column, a.last)
    rows = []
    for p in split_periods(series, a.split):
        x = p.observations
        z = (x - x.mean()) / x.std(ddof=1)
        counts, edges = np.histogram(z, bins=a.bins)
        dens = counts / (z.size * np.diff(edges))
        centers = (edges[:-1] + edges[1:]) / 2
        pdf = np.exp(-centers ** 2 / 2) / math.sqrt(2 * math.pi)
        for i in range(a.bins):
            rows.append([p.period, _fmt(float(edges[i])), _fmt(float(edges[i + 1])), _fmt(float(centers[i])),
                         int(counts[i]), _fmt(float(dens[i])), _fmt(float(pdf[i]))])
    _write_csv(a.out, ["period", "bin_left", "bin_right", "bin_center", "count", "density", "normal_pdf"],
               rows)
    print(f"wrote {a.out}: {a.bins} bins x {a.split} period(s) of standardized returns")


def cmd_study(a) -> None:
    if a.study == "optimal-k":
        lengths = _ints(a.lengths) + (list(experiments.LONG_RUN_LENGTHS) if a.long_run else [])
        rep = experiments.optimal_k_study(lengths, _floats(a.alphas), a.reps, a.seed, k_hi=a.k_hi,
                                          tail_mode=a.tail_mode, workers=a.workers)
    elif a.study == "small-k":
        length = 1_000_000 if a.long_run else a.length
        rep = experiments.small_k_study(length, _floats(a.alphas), a.reps, a.seed,
                                        tail_mode=a.tail_mode, workers=a.workers)
    else:
        grid = mcgrid.load_grid(a.grid)
        rep = experiments.estimator_quantile_study(grid, _floats(a.alphas), a.reps, a.seed, workers=a.workers)
    out = rep.write(a.out)
    first = next(iter(rep.tables))
    print(f"wrote {out}: tables {', '.join(rep.tables)} (seed={a.seed})")
    for r in rep.tables[first]:
        print("  ".join(f"{k}={_short(v)}" for k, v in r.items()))


# -- parser -----------------------------------------------------------------

def _data_args(p) -> None:
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--format", choices=("prices", "returns"), default="prices")
    p.add_argument("--column", default=None, help="value column (default: last column)")
    p.add_argument("--last", type=int, default=None, help="keep only the final N returns")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mctail", description="Monte Carlo tail exponent estimation")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("grid", help="manage the simulated grid").add_subparsers(dest="grid_cmd", required=True)
    gs = g.add_parser("simulate", help="simulate E[alpha_hat(alpha0, k)] and write a grid file")
    gs.add_argument("--n", type=int, required=True)
    gs.add_argument("--reps", type=int, default=1000)
    gs.add_argument("--seed", type=int, default=DEFAULT_SEED)
    gs.add_argument("--out", type=Path, required=True)
    gs.add_argument("--alpha-min", type=float, default=1.01)
    gs.add_argument("--alpha-max", type=float, default=2.0)
    gs.add_argument("--alpha-step", type=float, default=0.01)
    gs.add_argument("--k-lo", type=float, default=0.01)
    gs.add_argument("--k-hi", type=float, default=0.20)
    gs.add_argument("--tail-mode", choices=hill.TAIL_MODES, default="upper")
    gs.add_argument("--independent-streams", action="store_true",
                    help="draw every alpha0 row from its own streams instead of shared ones")
    gs.add_argument("--workers", type=int, default=1)
    gs.add_argument("--quiet", action="store_true")
    gs.set_defaults(func=cmd_grid_simulate)

    e = sub.add_parser("estimate", help="Monte Carlo estimate with simulated quantiles")
    _data_args(e)
    e.add_argument("--grid", required=True, type=Path)
    e.add_argument("--split", type=int, default=1)
    e.add_argument("--ci-reps", type=int, default=100)
    e.add_argument("--ci-seed", type=int, default=DEFAULT_SEED)
    e.add_argument("--levels", default=",".join(str(x) for x in estimator.DEFAULT_LEVELS))
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--out-csv", type=Path)
    e.add_argument("--out-json", type=Path)
    e.set_defaults(func=cmd_estimate)

    h = sub.add_parser("hill-plot", help="Hill curve with asymptotic bands as CSV")
    _data_args(h)
    h.add_argument("--k-lo", type=float, default=0.01)
    h.add_argument("--k-hi", type=float, default=0.20)
    h.add_argument("--level", type=float, default=0.95)
    h.add_argument("--tail-mode", choices=hill.TAIL_MODES, default="upper")
    h.add_argument("--overlay-grid", type=Path, help="add expected curves from this grid (uses its k-grid)")
    h.add_argument("--overlay-alphas", default="")
    h.add_argument("--out", type=Path, required=True)
    h.set_defaults(func=cmd_hill_plot)

    st = sub.add_parser("study", help="finite-sample studies")
    st.add_argument("study", choices=("optimal-k", "small-k", "quantiles"))
    st.add_argument("--lengths", default="1000,10000")
    st.add_argument("--length", type=int, default=10_000)
    st.add_argument("--alphas", default=",".join(str(a) for a in experiments.STUDY_ALPHAS))
    st.add_argument("--reps", type=int, default=None)
    st.add_argument("--seed", type=int, default=DEFAULT_SEED)
    st.add_argument("--k-hi", type=float, default=0.20)
    st.add_argument("--tail-mode", choices=hill.TAIL_MODES, default="upper")
    st.add_argument("--grid", type=Path, help="grid file (quantiles study)")
    st.add_argument("--long-run", action="store_true", help="add the 10^5/10^6 lengths")
    st.add_argument("--workers", type=int, default=1)
    st.add_argument("--out", type=Path, required=True)
    st.set_defaults(func=cmd_study)

    hi = sub.add_parser("hist", help="histogram of standardized returns with a N(0,1) column")
    _data_args(hi)
    hi.add_argument("--bins", type=int, default=50)
    hi.add_argument("--split", type=int, default=1)
    hi.add_argument("--out", type=Path, required=True)
    hi.set_defaults(func=cmd_hist)
    return ap


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    if getattr(a, "study", None):
        if a.reps is None:
            a.reps = 100 if a.study == "quantiles" else 200
        if a.study == "quantiles" and a.grid is None:
            print("error: InputError: study quantiles needs --grid", file=sys.stderr)
            return 2
    try:
        a.func(a)
    except CliError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return 2
    except (hill.TailEstimationError, mcgrid.GridError, estimator.LengthMismatch) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
