import json

import numpy as np
import pytest

from mctail.experiments import (STUDY_ALPHAS, StudyReport, estimator_quantile_study, longest_run, optimal_k_study,
                                small_k_study)

REF_OPTIMAL_K_N4 = {1.1: 8.88, 1.2: 13.55, 1.3: 17.17, 1.4: 18.73, 1.5: 19.95}
REF_QUANTILES_14 = {"q0.5": 1.23, "q2.5": 1.26, "q5": 1.27, "point": 1.39, "q95": 1.54, "q97.5": 1.56, "q99.5": 1.58}


@pytest.fixture(scope="module")
def desk_study():
    return optimal_k_study(replications=200, seed=2010)


def cell(report, n, alpha):
    return next(r for r in report.tables["optimal_k"] if r["n"] == n and r["alpha"] == alpha)


def test_optimal_k_alpha_15_n4(desk_study):
    assert cell(desk_study, 10_000, 1.5)["k_opt_pct"] == pytest.approx(19.95, abs=1.5)


def test_optimal_k_alpha_11_n3(desk_study):
    assert cell(desk_study, 1000, 1.1)["k_opt_pct"] == pytest.approx(9.11, abs=2.0)


def test_optimal_k_is_argmin_of_reported_curve(desk_study):
    curves = desk_study.tables["mean_curves"]
    for row in desk_study.tables["optimal_k"]:
        pts = [c for c in curves if c["n"] == row["n"] and c["alpha"] == row["alpha"]]
        errs = np.array([abs(c["mean"] - row["alpha"]) for c in pts])
        assert row["abs_error"] <= errs.min()
        assert pts[int(np.argmin(errs))]["k"] == row["k_opt"]
        assert 1.0 < row["k_opt_pct"] <= 20.0


def test_boundary_flags(desk_study):
    for row in desk_study.tables["optimal_k"]:
        assert row["boundary"] == (row["k_opt_pct"] == 20.0)
        if not row["boundary"]:
            assert row["k_opt_extended"] == row["k_opt"]
        else:
            assert row["k_opt_extended"] >= row["k_opt"]
    # the Gaussian row never crosses alpha inside the window
    assert cell(desk_study, 10_000, 2.0)["boundary"]


def test_optimal_k_monotone_in_alpha_n4(desk_study):
    ks = [cell(desk_study, 10_000, a)["k_opt_pct"] for a in STUDY_ALPHAS]
    assert all(b >= a for a, b in zip(ks, ks[1:])), ks


def test_interior_cells_near_reference(desk_study):
    for a, pct in REF_OPTIMAL_K_N4.items():
        assert cell(desk_study, 10_000, a)["k_opt_pct"] == pytest.approx(pct, abs=2.0), a


def test_optimal_k_validation():
    with pytest.raises(ValueError):
        optimal_k_study(lengths=(50,))
    with pytest.raises(ValueError):
        optimal_k_study(alphas=(1.0,))


def test_longest_run():
    assert longest_run(np.array([False, False])) is None
    assert longest_run(np.array([True, False, True, True, False, True])) == (2, 3)
    assert longest_run(np.array([True, True, False, True, True])) == (0, 1)
    assert longest_run(np.ones(4, bool)) == (0, 3)


def test_small_k_empty_and_nonempty():
    rep = small_k_study(length=10_000, alphas=(1.3, 2.0), replications=100, seed=2010)
    rows = {r["alpha"]: r for r in rep.tables["ranges"]}
    assert rows[2.0]["empty"] and rows[2.0]["k_start"] == ""
    r = rows[1.3]
    assert not r["empty"] and 1 <= r["k_start"] <= r["k_end"] <= 100
    curve = [c for c in rep.tables["mean_curves"] if c["alpha"] == 1.3]
    inside = [abs(c["mean"] / 1.3 - 1) <= 0.05 for c in curve[r["k_start"] - 1:r["k_end"]]]
    assert all(inside)


def test_small_k_range_at_10k_is_reported(tmp_path):
    rep = small_k_study(length=10_000, replications=50, seed=5)
    assert len(rep.tables["ranges"]) == len(STUDY_ALPHAS)
    out = rep.write(tmp_path)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["tables"]["ranges"]["rows"] == len(STUDY_ALPHAS)
    assert "created" not in manifest


@pytest.mark.long_run
def test_small_k_million_alpha_13():
    rep = small_k_study(length=1_000_000, alphas=(1.3,), replications=200, seed=2010)
    r = rep.tables["ranges"][0]
    assert not r["empty"]
    assert 0.05 <= r["pct_start"] <= 0.2 and 0.175 <= r["pct_end"] <= 0.7, r


@pytest.fixture(scope="module")
def quantile_report(request):
    grid = request.getfixturevalue("default_grid")
    return estimator_quantile_study(grid, replications=100, seed=2010)


def test_quantile_row_alpha_14(quantile_report):
    row = next(r for r in quantile_report.tables["quantiles"] if r["alpha"] == 1.4)
    misses = {c: (row[c], v) for c, v in REF_QUANTILES_14.items() if abs(row[c] - v) > 0.07}
    assert not misses, misses


def test_quantile_points_near_nominal(quantile_report):
    for row in quantile_report.tables["quantiles"]:
        assert row["point"] == pytest.approx(row["alpha"], abs=0.03)
        assert row["failures"] == 0


def test_quantile_rows_monotone(quantile_report):
    order = ["q0.5", "q2.5", "q5", "point", "q95", "q97.5", "q99.5"]
    for row in quantile_report.tables["quantiles"]:
        vals = [row[c] for c in order]
        assert vals == sorted(vals), row


def test_study_reruns_identical(tmp_path):
    kw = dict(lengths=(500,), alphas=(1.3, 1.9), replications=30, seed=8)
    a = optimal_k_study(**kw).write(tmp_path / "a")
    b = optimal_k_study(workers=2, **kw).write(tmp_path / "b")
    for name in ("optimal_k.csv", "mean_curves.csv", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_report_stamp(tmp_path):
    rep = StudyReport("x", {"seed": 1}, {"t": [{"a": 1.5, "b": True, "c": float("nan")}]})
    out = rep.write(tmp_path, stamp=True)
    assert json.loads((out / "manifest.json").read_text())["created"] == rep.created
    assert (out / "t.csv").read_text() == "a,b,c\n1.5,true,\n"
