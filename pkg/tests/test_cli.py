"""Command-line pipelines, exercised in-process through main(argv)."""

import json
import os

import numpy as np
import pytest

from effrank.cli import main
from effrank.panel import load_csv


def run(*argv):
    return main([str(a) for a in argv])


def _simulate(tmp_path, sub="sim", seed=7, T=150, p=8, N=10, dgp="rrsra"):
    out = os.path.join(tmp_path, sub)
    code = run("simulate", "--dgp", dgp, "--p", p, "--N", N, "--r", 3,
               "--T", T, "--seed", seed, "--out", out)
    assert code == 0
    return out


# ---------------------------------------------------------------- simulate

def test_simulate_writes_three_files(tmp_path):
    out = _simulate(tmp_path)
    files = sorted(os.listdir(out))
    assert files == ["truth.json", "x.csv", "y.csv"]
    x = load_csv(os.path.join(out, "x.csv"))
    y = load_csv(os.path.join(out, "y.csv"))
    assert x.values.shape == (150, 10)
    assert y.values.shape == (150, 8)
    with open(os.path.join(out, "truth.json")) as fh:
        truth = json.load(fh)
    assert truth["schema_version"] == 1
    assert truth["rank_A"] == 5
    assert len(truth["support_Phi"]) == 20
    assert np.asarray(truth["A"]).shape == (8, 7)


def test_simulate_seed_determinism(tmp_path):
    a = _simulate(tmp_path, "a", seed=42)
    b = _simulate(tmp_path, "b", seed=42)
    for name in ("x.csv", "y.csv", "truth.json"):
        with open(os.path.join(a, name), "rb") as fh:
            blob_a = fh.read()
        with open(os.path.join(b, name), "rb") as fh:
            blob_b = fh.read()
        assert blob_a == blob_b, name


def test_simulate_rejects_zero_length(tmp_path, capsys):
    code = run("simulate", "--dgp", "rrsra", "--p", 20, "--N", 20, "--r", 3,
               "--T", 0, "--seed", 7, "--out", os.path.join(tmp_path, "bad"))
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_unknown_subcommand_exits_2():
    assert run("frobnicate") == 2


# ---------------------------------------------------------------- fit

def test_fit_writes_report_with_rank(tmp_path):
    sim = _simulate(tmp_path)
    out = os.path.join(tmp_path, "fit")
    code = run("fit", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"), "--out", out)
    assert code == 0
    with open(os.path.join(out, "fit.json")) as fh:
        payload = json.load(fh)
    assert payload["schema_version"] == 1
    assert payload["method"] == "rrsra"
    assert "rank_A" in payload
    assert payload["r_hat"] == payload["factor"]["r_hat"]
    assert payload["effective_rank"]["rank_A"] == payload["rank_A"]
    trace = payload["fit"]["objective_trace"]
    assert all(b <= a + 1e-8 for a, b in zip(trace, trace[1:]))


def test_fit_huge_penalty_gives_rank_zero(tmp_path):
    sim = _simulate(tmp_path)
    out = os.path.join(tmp_path, "fit0")
    code = run("fit", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"),
               "--lambda-A", 1e6, "--lambda-Phi", 1e6, "--out", out)
    assert code == 0
    with open(os.path.join(out, "fit.json")) as fh:
        payload = json.load(fh)
    assert payload["rank_A"] == 0
    assert payload["effective_rank"]["support_Phi"] == []


def test_fit_irra_reports_block_ranks(tmp_path):
    sim = _simulate(tmp_path, "isim", dgp="irra")
    out = os.path.join(tmp_path, "ifit")
    code = run("fit", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"), "--method", "irra",
               "--d", 2, "--out", out)
    assert code == 0
    with open(os.path.join(out, "fit.json")) as fh:
        payload = json.load(fh)
    assert payload["method"] == "irra"
    assert len(payload["effective_rank"]["ranks_Phi"]) == 2
    assert len(payload["fit"]["Phi_hats"]) == 2


# ---------------------------------------------------------------- forecast

def test_forecast_fixed_fit_round_trip_is_bit_exact(tmp_path):
    sim = _simulate(tmp_path)
    fit_dir = os.path.join(tmp_path, "fit")
    assert run("fit", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"), "--out", fit_dir) == 0
    outs = []
    for sub in ("f1", "f2"):
        out = os.path.join(tmp_path, sub)
        assert run("forecast", "--x", os.path.join(sim, "x.csv"),
                   "--y", os.path.join(sim, "y.csv"),
                   "--fit", os.path.join(fit_dir, "fit.json"),
                   "--out", out) == 0
        with open(os.path.join(out, "predictions.csv"), "rb") as fh:
            outs.append(fh.read())
    assert outs[0] == outs[1]
    preds = load_csv(os.path.join(tmp_path, "f1", "predictions.csv"))
    y = load_csv(os.path.join(sim, "y.csv"))
    assert preds.values.shape == y.values.shape


def test_forecast_rw_identity(tmp_path):
    sim = _simulate(tmp_path)
    out = os.path.join(tmp_path, "rw")
    split = 120
    assert run("forecast", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"), "--split", split,
               "--method", "rw", "--out", out) == 0
    preds = load_csv(os.path.join(out, "predictions.csv"))
    y = load_csv(os.path.join(sim, "y.csv"))
    np.testing.assert_array_equal(preds.values, y.values[split - 1 : -1])
    with open(os.path.join(out, "report.json")) as fh:
        report = json.load(fh)
    assert report["method"] == "rw"
    assert report["n_origins"] == y.values.shape[0] - split
    # r2_oos.csv rows line up with the report
    with open(os.path.join(out, "r2_oos.csv")) as fh:
        lines = fh.read().strip().splitlines()
    assert lines[0] == "origin,r2_oos"
    assert len(lines) - 1 == report["n_origins"]
    assert float(lines[1].split(",")[1]) == pytest.approx(
        report["per_origin_r2"][0]
    )


def test_forecast_requires_split_or_fit(tmp_path, capsys):
    sim = _simulate(tmp_path)
    code = run("forecast", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"),
               "--out", os.path.join(tmp_path, "x"))
    assert code == 2
    assert "--split" in capsys.readouterr().err


def test_forecast_figures_flag(tmp_path):
    sim = _simulate(tmp_path)
    out = os.path.join(tmp_path, "fig")
    assert run("forecast", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"), "--split", 130,
               "--method", "rw", "--figures", "--out", out) == 0
    assert os.path.exists(os.path.join(out, "forecast_r2.png"))


# ---------------------------------------------------------------- tune

def test_tune_single_point_grid(tmp_path):
    sim = _simulate(tmp_path, T=60)
    out = os.path.join(tmp_path, "tune")
    code = run("tune", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"), "--T1", 55,
               "--lambda-A-grid", "0.37", "--lambda-Phi-grid", "0.12",
               "--d-grid", "1", "--r", 3, "--out", out)
    assert code == 0
    with open(os.path.join(out, "tuning.json")) as fh:
        payload = json.load(fh)
    assert payload["lambda_A"] == 0.37
    assert payload["lambda_Phi"] == 0.12
    assert payload["d"] == 1
    assert len(payload["scores"]) == 1
    with open(os.path.join(out, "tuning_scores.csv")) as fh:
        lines = fh.read().strip().splitlines()
    assert lines[0] == "d,lambda_A,lambda_Phi,forecast_error"
    assert len(lines) == 2


def test_tune_figures_flag(tmp_path):
    sim = _simulate(tmp_path, T=60)
    out = os.path.join(tmp_path, "tunefig")
    assert run("tune", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"), "--T1", 55,
               "--lambda-A-grid", "0.2,0.4", "--lambda-Phi-grid", "0.1,0.2",
               "--d-grid", "1", "--r", 3, "--figures", "--out", out) == 0
    assert os.path.exists(os.path.join(out, "tuning_fe.png"))


# ---------------------------------------------------------------- eval

def test_eval_detection_summary(tmp_path):
    out = os.path.join(tmp_path, "ev")
    code = run("eval", "--study", "detection", "--N-grid", "10",
               "--T-grid", "150", "--reps", 5, "--seed", 3, "--p", 6,
               "--out", out)
    assert code == 0
    with open(os.path.join(out, "records.csv")) as fh:
        lines = fh.read().strip().splitlines()
    assert lines[0] == "N,T,rep,r_hat"
    assert len(lines) == 6
    with open(os.path.join(out, "summary.csv")) as fh:
        summary = fh.read().strip().splitlines()
    assert summary[0] == "N,T,n,fraction_correct"
    r_hats = [int(line.split(",")[3]) for line in lines[1:]]
    frac = float(summary[1].split(",")[3])
    assert frac == pytest.approx(np.mean([v == 3 for v in r_hats]))


def test_eval_rrsra_summary_quantiles_by_hand(tmp_path):
    out = os.path.join(tmp_path, "ev2")
    code = run("eval", "--study", "rrsra", "--p", 6, "--N", 8,
               "--T-grid", "120", "--reps", 5, "--seed", 9, "--r", 2,
               "--out", out)
    assert code == 0
    with open(os.path.join(out, "records.csv")) as fh:
        lines = fh.read().strip().splitlines()
    header = lines[0].split(",")
    a_col = header.index("a_dist")
    a_vals = sorted(float(line.split(",")[a_col]) for line in lines[1:])
    assert len(a_vals) == 5
    with open(os.path.join(out, "summary.csv")) as fh:
        rows = [line.split(",") for line in fh.read().strip().splitlines()]
    srow = next(r for r in rows if r[1] == "a_dist")
    scol = rows[0].index
    # nearest-rank quantiles of five values are the 2nd, 3rd and 4th sorted
    assert float(srow[scol("q25")]) == pytest.approx(a_vals[1])
    assert float(srow[scol("median")]) == pytest.approx(a_vals[2])
    assert float(srow[scol("q75")]) == pytest.approx(a_vals[3])
    with open(os.path.join(out, "study.json")) as fh:
        study = json.load(fh)
    assert study["summaries"]["120"]["a_dist"]["median"] == pytest.approx(a_vals[2])


def test_eval_figures_flag(tmp_path):
    out = os.path.join(tmp_path, "ev3")
    assert run("eval", "--study", "detection", "--N-grid", "10",
               "--T-grid", "150", "--reps", 2, "--seed", 5, "--p", 6,
               "--figures", "--out", out) == 0
    assert os.path.exists(os.path.join(out, "detection.png"))


def test_eval_rejects_bad_reps(tmp_path):
    assert run("eval", "--study", "rrsra", "--reps", 0, "--seed", 1,
               "--out", os.path.join(tmp_path, "bad")) == 2


# ---------------------------------------------------------------- plumbing

def test_jobs_env_fallback(tmp_path, monkeypatch):
    sim = _simulate(tmp_path, T=60)
    out = os.path.join(tmp_path, "envjobs")
    monkeypatch.setenv("EFFRANK_JOBS", "not-a-number")
    code = run("tune", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"), "--T1", 55,
               "--lambda-A-grid", "0.3", "--lambda-Phi-grid", "0.1",
               "--d-grid", "1", "--r", 3, "--out", out)
    assert code == 2
    monkeypatch.setenv("EFFRANK_JOBS", "1")
    code = run("tune", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"), "--T1", 55,
               "--lambda-A-grid", "0.3", "--lambda-Phi-grid", "0.1",
               "--d-grid", "1", "--r", 3, "--out", out)
    assert code == 0


def test_missing_input_file_exits_2(tmp_path, capsys):
    code = run("fit", "--x", os.path.join(tmp_path, "absent.csv"),
               "--y", os.path.join(tmp_path, "absent.csv"),
               "--out", os.path.join(tmp_path, "o"))
    assert code == 2
    capsys.readouterr()


def test_malformed_csv_exits_2(tmp_path, capsys):
    bad = os.path.join(tmp_path, "bad.csv")
    with open(bad, "w") as fh:
        fh.write("a,b\n1,oops\n")
    code = run("fit", "--x", bad, "--y", bad, "--out", os.path.join(tmp_path, "o"))
    assert code == 2
    capsys.readouterr()


def test_fit_json_values_survive_reload_exactly(tmp_path):
    # the full chain CSV -> fit -> JSON -> predictions must be reproducible
    # from the artifacts alone, so the JSON has to carry full precision
    sim = _simulate(tmp_path, T=80)
    fit_dir = os.path.join(tmp_path, "fitp")
    assert run("fit", "--x", os.path.join(sim, "x.csv"),
               "--y", os.path.join(sim, "y.csv"), "--out", fit_dir) == 0
    with open(os.path.join(fit_dir, "fit.json")) as fh:
        payload = json.load(fh)
    A = np.asarray(payload["fit"]["A_hat"])
    again = json.loads(json.dumps(payload))
    np.testing.assert_array_equal(np.asarray(again["fit"]["A_hat"]), A)
