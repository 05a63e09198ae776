import csv
import json
import math

import numpy as np
import pytest

from mctail.cli import MissingColumn, NotDivisible, ReturnsSeries, TooShort, UnparsableRow, ingest, main, split_periods
from mctail.synthetic import bundled_prices_path, synthetic_csv


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def prices_file(tmp_path, values, name="p.csv"):
    return write(tmp_path, name, "date,close\n" + "".join(f"d{i},{v}\n" for i, v in enumerate(values)))


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_ingest_log_returns(tmp_path):
    s = ingest(prices_file(tmp_path, [100, 110, 121]), min_length=1)
    np.testing.assert_allclose(s.observations, [math.log(1.1)] * 2, rtol=1e-14)
    assert s.transform == "log-return" and s.dropped == 0


def test_ingest_drops_bad_prices(tmp_path):
    s = ingest(prices_file(tmp_path, [100, 0, 110, -3, 121, "nan"]), min_length=1)
    assert s.dropped == 3
    np.testing.assert_allclose(s.observations, [math.log(1.1)] * 2, rtol=1e-14)


def test_ingest_returns_and_tab(tmp_path):
    p = write(tmp_path, "r.tsv", "date\tret\textra\n" + "".join(f"d{i}\t{i / 100}\t1\n" for i in range(150)))
    s = ingest(p, "returns", column="ret")
    assert len(s) == 150 and s.transform == "as-is" and s.observations[3] == 0.03
    assert len(ingest(p, "returns", column="ret", last=120)) == 120


def test_ingest_bundled_file():
    s = ingest(bundled_prices_path())
    assert len(s) == 2000 and s.dropped == 0
    assert bundled_prices_path().read_text() == synthetic_csv()


def test_ingest_errors(tmp_path):
    p = prices_file(tmp_path, range(1, 300))
    with pytest.raises(MissingColumn):
        ingest(p, column="adj_close")
    with pytest.raises(TooShort):
        ingest(prices_file(tmp_path, range(1, 50), "short.csv"))
    bad = write(tmp_path, "bad.csv", "date,close\nd0,1\nd1,oops\n")
    with pytest.raises(UnparsableRow, match=":3:"):
        ingest(bad)


def test_split_periods():
    s = ReturnsSeries("x", np.arange(2000.0))
    a, b = split_periods(s, 2)
    assert (a.period, b.period, len(a), len(b)) == (1, 2, 1000, 1000)
    assert b.observations[0] == 1000.0
    with pytest.raises(NotDivisible):
        split_periods(ReturnsSeries("x", np.arange(2001.0)), 2)


def test_grid_simulate_byte_identical(tmp_path, capsys):
    args = ["grid", "simulate", "--n", "200", "--reps", "20", "--alpha-min", "1.5", "--alpha-max", "1.8",
            "--alpha-step", "0.1", "--quiet", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a.grid")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.grid"), "--workers", "2"]) == 0
    assert (tmp_path / "a.grid").read_bytes() == (tmp_path / "b.grid").read_bytes()
    assert "4 alpha0 x 39 k" in capsys.readouterr().out


def test_estimate_split_two(tmp_path, default_grid_path, capsys):
    out_csv, out_json = tmp_path / "e.csv", tmp_path / "e.json"
    code = main(["estimate", "--data", str(bundled_prices_path()), "--grid", str(default_grid_path), "--split", "2",
                 "--ci-reps", "20", "--out-csv", str(out_csv), "--out-json", str(out_json)])
    assert code == 0
    rows = read_csv(out_csv)
    assert [r["period"] for r in rows] == ["1", "2"]
    assert list(rows[0])[:10] == ["label", "period", "n", "q0.5", "q2.5", "q5", "alpha_mc", "q95", "q97.5",
                                  "q99.5"]
    meta = json.loads(out_json.read_text())["meta"]
    assert meta["ci_reps"] == 20 and meta["grid_seed"] == 2010
    assert "alpha_mc" in capsys.readouterr().out


def test_estimate_length_mismatch(tmp_path, default_grid_path, capsys):
    code = main(["estimate", "--data", str(bundled_prices_path()), "--grid", str(default_grid_path)])
    assert code == 2
    assert "LengthMismatch" in capsys.readouterr().err


@pytest.mark.parametrize("argv,category", [
    (["--column", "nope"], "MissingColumn"),
    (["--split", "3"], "NotDivisible"),
    (["--last", "50"], "TooShort"),
])
def test_estimate_error_categories(argv, category, default_grid_path, capsys):
    code = main(["estimate", "--data", str(bundled_prices_path()), "--grid", str(default_grid_path), *argv])
    assert code == 2
    assert capsys.readouterr().err.startswith(f"error: {category}:")


def test_missing_and_corrupt_grid(tmp_path, capsys):
    assert main(["estimate", "--data", str(bundled_prices_path()), "--grid", str(tmp_path / "none.grid")]) == 2
    bad = write(tmp_path, "bad.grid", "# mctail grid\nformat_version=7\n")
    assert main(["estimate", "--data", str(bundled_prices_path()), "--grid", str(bad)]) == 2
    assert "FormatVersionMismatch" in capsys.readouterr().err


def test_hill_plot(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["hill-plot", "--data", str(bundled_prices_path()), "--out", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["k", "k_fraction", "estimate", "ci_low", "ci_high"]
    assert rows[0]["k"] == "20" and rows[-1]["k"] == "400"
    assert all(float(r["ci_low"]) < float(r["estimate"]) < float(r["ci_high"]) for r in rows)


def test_hill_plot_overlay(tmp_path, default_grid_path, default_grid):
    out = tmp_path / "h.csv"
    code = main(["hill-plot", "--data", str(bundled_prices_path()), "--last", "1000", "--overlay-grid",
                 str(default_grid_path), "--overlay-alphas", "1.5,1.7", "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert list(rows[0])[-2:] == ["grid_1.5", "grid_1.7"]
    assert float(rows[5]["grid_1.7"]) == default_grid.row(1.7)[5]


def test_hist(tmp_path):
    out = tmp_path / "hist.csv"
    assert main(["hist", "--data", str(bundled_prices_path()), "--bins", "20", "--split", "2", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 40
    assert sum(int(r["count"]) for r in rows if r["period"] == "1") == 1000
    width = float(rows[0]["bin_right"]) - float(rows[0]["bin_left"])
    mass = sum(float(r["density"]) * width for r in rows[:20])
    assert mass == pytest.approx(1.0)


def test_study_commands(tmp_path, default_grid_path):
    base = ["--alphas", "1.3,1.7", "--reps", "20", "--seed", "4"]
    assert main(["study", "optimal-k", "--lengths", "400", *base, "--out", str(tmp_path / "ok")]) == 0
    assert main(["study", "small-k", "--length", "2000", *base, "--out", str(tmp_path / "sk")]) == 0
    assert main(["study", "quantiles", "--grid", str(default_grid_path), *base, "--out", str(tmp_path / "q")]) == 0
    assert len(read_csv(tmp_path / "ok" / "optimal_k.csv")) == 2
    assert len(read_csv(tmp_path / "sk" / "ranges.csv")) == 2
    q = read_csv(tmp_path / "q" / "quantiles.csv")
    assert [r["alpha"] for r in q] == ["1.3", "1.7"]
    manifest = json.loads((tmp_path / "q" / "manifest.json").read_text())
    assert manifest["parameters"]["seed"] == 4


def test_study_quantiles_needs_grid(tmp_path, capsys):
    assert main(["study", "quantiles", "--out", str(tmp_path / "q")]) == 2
    assert "--grid" in capsys.readouterr().err


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "mctail", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "estimate" in res.stdout
