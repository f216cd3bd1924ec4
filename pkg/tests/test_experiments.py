import csv
import io
import math

import numpy as np
import pytest

from mqsdeco import (
    FilterAnnihilationError,
    GainSetting,
    LossSetting,
    OracleMismatchError,
    TruncationError,
    TruncationPolicy,
    apply_loss_two_mode,
    fidelity,
    qiopa_macrostate_pm,
    universal_visibility,
)
from mqsdeco import experiments as ex


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        ex.SweepConfig(family="laser")
    with pytest.raises(ValueError):
        ex.SweepConfig(R=[0.5, 1.1])
    with pytest.raises(ValueError):
        ex.SweepConfig(R=[])
    with pytest.raises(ValueError):
        ex.SweepConfig(g=[-0.2])
    with pytest.raises(ValueError):
        ex.SweepConfig(k=[-1])
    with pytest.raises(ValueError):
        ex.SweepConfig(workers=0)
    assert ex.SweepConfig(R=(0, 1)).R == [0.0, 1.0]


def test_check_feasible():
    ex.check_feasible(20.0, TruncationPolicy())
    with pytest.raises(TruncationError):
        ex.check_feasible(250.0, TruncationPolicy())


def test_universal_curve_rows():
    cfg = ex.SweepConfig(family="cat", R=[0.0, 0.1, 1 / 9, 0.3], alpha=3.0)
    rows = ex.run_universal_curve(cfg)
    assert [r["R"] for r in rows] == cfg.R
    for r in rows:
        assert r["x"] == pytest.approx(9 * r["R"])
        assert abs(r["D_numeric"] - r["D_closed"]) <= 1e-6
    assert rows[0]["D_numeric"] == pytest.approx(1.0)


def test_universal_curve_oracle_failure_is_raised():
    cfg = ex.SweepConfig(family="cat", R=[0.2], alpha=2.0, oracle_tol=1e-30)
    with pytest.raises(OracleMismatchError):
        ex.run_universal_curve(cfg)
    with pytest.raises(ValueError):
        ex.run_universal_curve(ex.SweepConfig(family="qiopa"))


def test_csv_is_deterministic_and_round_trips(tmp_path):
    cfg = ex.SweepConfig(family="cat", R=[0.05, 0.25, 0.5], alpha=2.5)
    rows = ex.run_universal_curve(cfg)
    text = ex.write_csv(rows, ex.HEADERS["universal-curve"])
    threaded = ex.run_universal_curve(ex.SweepConfig(family="cat", R=cfg.R, alpha=2.5, workers=3))
    assert ex.write_csv(threaded, ex.HEADERS["universal-curve"]) == text
    assert text.splitlines()[0] == "x,R,alpha,phi,D_closed,D_numeric"
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert [float(p["D_numeric"]) for p in parsed] == [r["D_numeric"] for r in rows]
    path = tmp_path / "curve.csv"
    ex.write_csv(rows, ex.HEADERS["universal-curve"], str(path))
    assert path.read_text() == text


def test_cat_distributions():
    rows = ex.run_cat_distributions(2.0, [0.0, 0.5])
    assert all(r["index_n"] == "" for r in rows)
    ideal = np.array([r["probability"] for r in rows if r["label"] == "R=0.0"])
    lossy = np.array([r["probability"] for r in rows if r["label"] == "R=0.5"])
    n = np.arange(ideal.size)
    assert ideal.sum() == pytest.approx(1.0, abs=1e-12)
    assert lossy.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(ideal[1::2] < 1e-15)  # even cat
    assert n @ lossy == pytest.approx(0.5 * (n @ ideal), abs=1e-10)


@pytest.mark.parametrize("basis", ["equatorial", "HV"])
def test_qiopa_distributions(basis):
    g = 0.6
    rows = ex.run_qiopa_distributions(g, [1.0, 0.5], basis)
    for label, T in (("T=1.0", 1.0), ("T=0.5", 0.5)):
        sel = [r for r in rows if r["label"] == label]
        assert sum(r["probability"] for r in sel) == pytest.approx(1.0, abs=1e-12)
        mean = sum((r["index_m"] + r["index_n"]) * r["probability"] for r in sel)
        assert mean == pytest.approx(T * GainSetting(g).mean_photons, abs=1e-9)
        assert all(r["probability"] > 0 for r in sel)
    ideal = [r for r in rows if r["label"] == "T=1.0" and r["probability"] > 1e-300]
    if basis == "HV":
        assert all(r["index_m"] == r["index_n"] + 1 for r in ideal)
    else:
        assert all(r["index_m"] % 2 == 1 and r["index_n"] % 2 == 0 for r in ideal)
    with pytest.raises(ValueError):
        ex.run_qiopa_distributions(g, [1.0], "RL")


def test_qiopa_visibility_endpoints():
    rows = ex.run_qiopa_visibility([0.8], [0.0, 0.5, 1.0])
    mean_n = 1 + 4 * math.sinh(0.8) ** 2
    assert [r["D"] for r in (rows[0], rows[2])] == pytest.approx([1.0, 0.0], abs=1e-6)
    assert 0.0 < rows[1]["D"] < 1.0
    for r in rows:
        assert r["mean_n"] == pytest.approx(mean_n, abs=1e-9)
        assert r["x"] == pytest.approx(r["R"] * r["mean_n"])
        assert r["D"] == pytest.approx(math.sqrt(1 - r["F"]))


def test_fast_path_matches_two_mode_fidelity():
    gain = GainSetting(0.3)
    loss = LossSetting.from_reflectivity(0.4)
    plus = apply_loss_two_mode(qiopa_macrostate_pm(gain, "+").density(), loss)
    minus = apply_loss_two_mode(qiopa_macrostate_pm(gain, "-").density(), loss)
    assert ex.qiopa_pair_fidelity(gain, 0.4) == pytest.approx(fidelity(plus, minus), abs=1e-10)


def test_filtered_pair_and_total_loss():
    # at R=1 both states are vacuum, which k=0 rejects outright
    gain = GainSetting(0.5)
    f, p = ex.filtered_pair(gain, 0.3, 0)
    assert 0.0 < p < 1.0 and 0.0 <= f <= 1.0
    with pytest.raises(FilterAnnihilationError):
        ex.filtered_pair(gain, 1.0, 0)


def test_ofilter_rows():
    rows = ex.run_ofilter_visibility(0.5, [0, 1], [0.2, 0.6])
    assert [(r["k"], r["R"]) for r in rows] == [(0, 0.2), (0, 0.6), (1, 0.2), (1, 0.6)]
    for r in rows:
        assert 0 < r["success_prob"] < 1
        assert r["D"] == pytest.approx(math.sqrt(1 - r["F"]))


def test_slope_diagnostics_on_logistic_curve():
    x = np.linspace(0, 10, 201)
    d = 1 / (1 + np.exp(x - 5))
    report = ex.slope_diagnostics(x, d)
    assert report["n_points"] == 201
    assert len(report["inflections"]) == 1
    assert report["inflections"][0]["x"] == pytest.approx(5.0, abs=0.05)
    assert report["inflections"][0]["D"] == pytest.approx(0.5, abs=0.01)
    assert report["midrange_slope"] == pytest.approx(0.25, rel=1e-3)


def test_slope_diagnostics_on_universal_curve():
    x = np.linspace(0, 4, 401)
    report = ex.slope_diagnostics(x, universal_visibility(x))
    assert report["endpoint_slope"] == pytest.approx(math.sqrt(2) * math.exp(-7.98), rel=0.05)
    assert report["tail_slope"] < report["midrange_slope"]


def test_slope_diagnostics_validation():
    with pytest.raises(ValueError):
        ex.slope_diagnostics([0, 1, 2], [1, 0.5, 0])
    with pytest.raises(ValueError):
        ex.slope_diagnostics([0, 1, 1, 2, 3], [1, 0.8, 0.7, 0.5, 0])


def test_read_curves_groups_by_parameters(tmp_path):
    rows = ex.run_qiopa_visibility([0.3, 0.5], [0.0, 0.5, 1.0])
    path = tmp_path / "vis.csv"
    ex.write_csv(rows, ex.HEADERS["qiopa-vis"], str(path))
    curves = ex.read_curves_csv(str(path))
    assert [c[0] for c in curves] == [{"g": 0.3}, {"g": 0.5}]
    assert curves[1][2] == [r["D"] for r in rows[3:]]
    with pytest.raises(KeyError):
        ex.read_curves_csv(str(path), d_column="D_closed")
