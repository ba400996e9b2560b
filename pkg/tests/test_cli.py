"""End-to-end CLI behaviour through the in-process entry point."""

import json
import shutil
import subprocess

import numpy as np
import pytest

from scalespec.cli import run
from scalespec.fit import annualize, robust_fit
from scalespec.mle import ml_fit
from scalespec.series import AnalysisWindow, ingest_csv
from scalespec.spectrum import scale_spectrum


def _run(capsys, argv):
    code = run(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _rows(text):
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    return header, [dict(zip(header, line.split(","))) for line in lines[1:]]


@pytest.fixture()
def fbm_file(tmp_path, capsys):
    path = tmp_path / "path.csv"
    code = run(["synth", "--kind", "fbm", "--H", "0.5", "--sigma", "1",
                "--n", "128", "--seed", "7", "--output", str(path)])
    capsys.readouterr()
    assert code == 0
    return path


# --------------------------------------------------------------- synth

def test_synth_deterministic_bytes(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        code, _, _ = _run(capsys, ["synth", "--kind", "fbm", "--H", "0.3",
                                   "--n", "64", "--seed", "11",
                                   "--output", str(p)])
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    header, rows = _rows(a.read_text())
    assert header == ["index", "value"]
    assert len(rows) == 64
    assert float(rows[0]["value"]) == 0.0


def test_synth_mbm_ramp(tmp_path, capsys):
    out = tmp_path / "m.csv"
    code, _, _ = _run(capsys, ["synth", "--kind", "mbm", "--H", "0.3",
                               "--H-end", "0.7", "--n", "256", "--seed", "2",
                               "--K", "4096", "--output", str(out)])
    assert code == 0
    _, rows = _rows(out.read_text())
    assert len(rows) == 256
    assert abs(float(rows[0]["value"])) < 1e-10


# ------------------------------------------------------------- returns

def test_returns_from_prices(tmp_path, capsys):
    src = tmp_path / "p.csv"
    src.write_text("date,price\n2020-01-01,100.0\n2020-01-02,110.0\n"
                   "2020-01-03,99.0\n")
    code, out, _ = _run(capsys, ["returns", "--input", str(src)])
    assert code == 0
    header, rows = _rows(out)
    assert header == ["date", "return"]
    assert [float(r["return"]) for r in rows] == \
        pytest.approx([0.1, -0.1], rel=1e-12)
    assert rows[0]["date"] == "2020-01-01"


def test_returns_rejects_log_price_input(tmp_path, capsys):
    src = tmp_path / "p.csv"
    src.write_text("date,price\n2020-01-01,4.6\n2020-01-02,4.7\n")
    code, _, err = _run(capsys, ["returns", "--input", str(src),
                                 "--input-kind", "log_price"])
    assert code == 2
    assert "returns needs actual prices" in err


# ------------------------------------------------------------ spectrum

def test_spectrum_alternating_window(tmp_path, capsys):
    src = tmp_path / "q.csv"
    src.write_text("index,value\n0,0.0\n1,1.0\n2,0.0\n3,1.0\n")
    code, out, _ = _run(capsys, ["spectrum", "--input", str(src),
                                 "--input-kind", "log_price",
                                 "--value-column", "value",
                                 "--ji", "1", "--je", "1"])
    assert code == 0
    header, rows = _rows(out)
    assert header == ["j", "scale_steps", "s_j", "n_j"]
    assert len(rows) == 1
    assert (rows[0]["j"], rows[0]["scale_steps"], rows[0]["n_j"]) == \
        ("1", "2", "3")
    assert float(rows[0]["s_j"]) == pytest.approx(0.5, rel=1e-12)


# ----------------------------------------------------------------- fit

def test_fit_matches_functional_pipeline(fbm_file, capsys):
    code, out, _ = _run(capsys, ["fit", "--input", str(fbm_file),
                                 "--input-kind", "log_price",
                                 "--value-column", "value",
                                 "--ji", "1", "--je", "32"])
    assert code == 0
    header, rows = _rows(out)
    assert header == ["h", "sigma_step", "sigma_annual", "c", "p", "misfit",
                      "branch"]
    assert len(rows) == 1
    series = ingest_csv(fbm_file.read_text(), value_column="value",
                        kind="log_price")
    window = AnalysisWindow.from_values(series.values)
    fit = robust_fit(scale_spectrum(window, 1, 32))
    assert float(rows[0]["h"]) == fit.h_hat
    assert float(rows[0]["sigma_step"]) == fit.sigma_step
    assert float(rows[0]["sigma_annual"]) == \
        annualize(fit.sigma_step, fit.h_hat, 252)
    assert float(rows[0]["misfit"]) == fit.misfit
    assert rows[0]["branch"] == fit.branch


def test_fit_fixed_mode_and_points_output(fbm_file, tmp_path, capsys):
    pts = tmp_path / "points.csv"
    code, out, _ = _run(capsys, ["fit", "--input", str(fbm_file),
                                 "--input-kind", "log_price",
                                 "--value-column", "value",
                                 "--mode", "fixed", "--H0", "0.4",
                                 "--ji", "1", "--je", "16",
                                 "--points-output", str(pts)])
    assert code == 0
    _, rows = _rows(out)
    assert rows[0]["branch"] == "fixed_h"
    assert float(rows[0]["h"]) == 0.4
    header, prows = _rows(pts.read_text())
    assert header == ["j", "scale_steps", "log2_scale", "log2_s",
                      "fitted_log2_s"]
    assert len(prows) == 16
    assert [int(r["j"]) for r in prows] == list(range(1, 17))


def test_ml_fit_row(fbm_file, capsys):
    code, out, _ = _run(capsys, ["ml-fit", "--input", str(fbm_file),
                                 "--input-kind", "log_price",
                                 "--value-column", "value"])
    assert code == 0
    header, rows = _rows(out)
    assert header == ["h", "sigma_step", "sigma_annual", "c", "p", "misfit",
                      "branch", "log_likelihood"]
    assert rows[0]["branch"] == "ml"
    series = ingest_csv(fbm_file.read_text(), value_column="value",
                        kind="log_price")
    expected = ml_fit(AnalysisWindow.from_values(series.values))
    assert float(rows[0]["h"]) == expected.h_hat
    assert float(rows[0]["log_likelihood"]) == expected.log_likelihood


# ------------------------------------------------------ roll and chain

def test_roll_then_variogram_chain(fbm_file, tmp_path, capsys):
    track = tmp_path / "track.csv"
    code, _, _ = _run(capsys, ["roll", "--input", str(fbm_file),
                               "--input-kind", "log_price",
                               "--value-column", "value",
                               "--M", "32", "--output", str(track)])
    assert code == 0
    header, rows = _rows(track.read_text())
    assert header == ["date", "h", "sigma_annual", "misfit", "flag"]
    assert len(rows) == 128
    assert all(r["flag"] == "0" for r in rows)
    code, out, _ = _run(capsys, ["variogram", "--input", str(track),
                                 "--column", "h", "--max-lag", "5"])
    assert code == 0
    vhead, vrows = _rows(out)
    assert vhead == ["lag", "gamma"]
    assert [int(r["lag"]) for r in vrows] == [1, 2, 3, 4, 5]
    assert all(float(r["gamma"]) >= 0 for r in vrows)
    # the default column (misfit) is present on track files too
    code, out, _ = _run(capsys, ["variogram", "--input", str(track),
                                 "--max-lag", "3"])
    assert code == 0


def test_roll_flags_render_in_csv(tmp_path, capsys):
    src = tmp_path / "flat.csv"
    src.write_text("index,price\n" +
                   "".join(f"{i},100.0\n" for i in range(32)))
    code, out, _ = _run(capsys, ["roll", "--input", str(src), "--M", "8"])
    assert code == 0
    _, rows = _rows(out)
    assert all(r["flag"] == "1" for r in rows)
    assert all(r["h"] == "nan" for r in rows)


def test_xcorr_with_itself(fbm_file, capsys):
    code, out, _ = _run(capsys, ["xcorr", "--input", str(fbm_file),
                                 "--other", str(fbm_file),
                                 "--input-kind", "log_price",
                                 "--value-column", "value",
                                 "--ji", "1", "--je", "8"])
    assert code == 0
    header, rows = _rows(out)
    assert header == ["j", "scale_steps", "rho"]
    assert len(rows) == 8
    assert all(float(r["rho"]) == pytest.approx(1.0, rel=1e-12) for r in rows)


# ----------------------------------------------------------- json mode

def test_json_format_carries_config_echo(fbm_file, capsys):
    code, out, _ = _run(capsys, ["fit", "--input", str(fbm_file),
                                 "--input-kind", "log_price",
                                 "--value-column", "value",
                                 "--ji", "1", "--je", "16",
                                 "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == "1"
    assert doc["config"]["subcommand"] == "fit"
    assert doc["config"]["inputs"] == [str(fbm_file)]
    assert doc["config"]["j_i"] == 1 and doc["config"]["j_e"] == 16
    assert doc["config"]["mode"] == "robust"
    assert len(doc["rows"]) == 1
    assert set(doc["rows"][0]) >= {"h", "sigma_annual", "branch"}


def test_json_nan_becomes_null(tmp_path, capsys):
    src = tmp_path / "flat.csv"
    src.write_text("index,price\n" +
                   "".join(f"{i},100.0\n" for i in range(32)))
    code, out, _ = _run(capsys, ["roll", "--input", str(src), "--M", "8",
                                 "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["rows"][0]["h"] is None
    assert doc["rows"][0]["flag"] is True


# ---------------------------------------------------------- bench table

def test_bench_estimators_table(tmp_path, capsys):
    resid = tmp_path / "resid.csv"
    code, out, _ = _run(capsys, ["bench-estimators", "--H", "0.5",
                                 "--replicas", "10", "--n", "64",
                                 "--je", "16", "--seed", "3",
                                 "--residual-output", str(resid)])
    assert code == 0
    header, rows = _rows(out)
    assert header == ["H", "noise", "estimator", "mean_h", "std_h",
                      "std_error", "bias"]
    assert [r["estimator"] for r in rows] == \
        ["robust", "gls_linear", "gls_full_covariance", "ml"]
    rhead, rrows = _rows(resid.read_text())
    assert rhead == ["H", "noise", "scale_steps", "ratio"]
    assert len(rrows) == 16


# -------------------------------------------------- paths and env vars

def test_output_dir_env_resolves_relative_paths(tmp_path, capsys,
                                                monkeypatch):
    monkeypatch.setenv("SCALESPEC_OUTPUT_DIR", str(tmp_path))
    code, _, _ = _run(capsys, ["synth", "--kind", "fbm", "--H", "0.5",
                               "--n", "16", "--seed", "1",
                               "--output", "out.csv"])
    assert code == 0
    assert (tmp_path / "out.csv").exists()


# ------------------------------------------------------------ failures

def test_unknown_flag_exits_two(capsys):
    code, _, _ = _run(capsys, ["fit", "--input", "x.csv", "--frobnicate"])
    assert code == 2


def test_missing_input_file_exits_two(capsys):
    code, _, err = _run(capsys, ["fit", "--input", "/no/such/file.csv"])
    assert code == 2
    assert "cannot read input file" in err


def test_bad_scale_range_exits_two(fbm_file, capsys):
    code, _, err = _run(capsys, ["fit", "--input", str(fbm_file),
                                 "--ji", "8", "--je", "8"])
    assert code == 2
    assert "scalespec: error" in err


def test_window_longer_than_series_exits_one(fbm_file, capsys):
    code, _, err = _run(capsys, ["fit", "--input", str(fbm_file),
                                 "--input-kind", "log_price",
                                 "--value-column", "value",
                                 "--M", "4096"])
    assert code == 1
    assert "exceeds series length" in err


def test_synth_flag_validation(capsys):
    code, _, err = _run(capsys, ["synth", "--kind", "fbm", "--H", "0.5",
                                 "--n", "32", "--H-end", "0.7"])
    assert code == 2
    assert "--H-end" in err
    code, _, err = _run(capsys, ["synth", "--kind", "mbm", "--H", "0.5",
                                 "--n", "32", "--K", "4097"])
    assert code == 2
    assert "--K" in err


def test_variogram_and_bench_flag_validation(tmp_path, capsys):
    src = tmp_path / "t.csv"
    src.write_text("misfit\n1.0\n2.0\n")
    code, _, err = _run(capsys, ["variogram", "--input", str(src),
                                 "--max-lag", "0"])
    assert code == 2
    assert "--max-lag" in err
    code, _, err = _run(capsys, ["bench-estimators", "--H", "0.5",
                                 "--replicas", "5", "--n", "64",
                                 "--seed", "1"])
    assert code == 2
    assert "--replicas" in err


# ------------------------------------------------------- console script

def test_console_script_smoke(tmp_path):
    exe = shutil.which("scalespec")
    assert exe, "console script not installed"
    out = tmp_path / "s.csv"
    proc = subprocess.run([exe, "synth", "--kind", "fbm", "--H", "0.5",
                           "--n", "16", "--seed", "1", "--output", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("index,value\n")
