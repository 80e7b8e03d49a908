import json

import numpy as np
import pytest

from qpdyn.cli import main
from qpdyn.ingest import load_csv


def _bandwidth_for(series_path, Q):
    from qpdyn.ingest import delay_embed, standardize
    from qpdyn.kernel import median_squared_distance

    ts = load_csv(series_path, dt=1.0, header=True)
    ts_std, _ = standardize(ts)
    return 0.02 * median_squared_distance(delay_embed(ts_std, Q).states)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Small synthetic dataset plus an analyzed model, built once via the CLI."""
    d = tmp_path_factory.mktemp("cli")
    series = d / "series.csv"
    truth = d / "truth.json"
    rc = main([
        "synth", "--out", str(series), "--truth-out", str(truth),
        "--bins", "13,21", "--n", "520", "--grid", "512", "--burn-in", "128",
        "--chaos-a", "0.4", "--seed", "3",
    ])
    assert rc == 0
    model = d / "model.json"
    rc = main([
        "analyze", str(series), "-o", str(model),
        "--header", "--delays", "8", "--epsilon", repr(_bandwidth_for(series, 8)),
        "--num-eigs", "120", "--eps1", "1.0", "--eps2", "2.0", "--L0", "30",
    ])
    assert rc == 0
    return d


def test_synth_outputs_parse(workdir):
    ts = load_csv(workdir / "series.csv", dt=1.0, header=True)
    assert ts.n_samples == 520
    truth = json.loads((workdir / "truth.json").read_text())
    assert len(truth["generator_omegas"]) == 2
    assert truth["seed"] == 3


def test_analyze_wrote_model(workdir):
    doc = json.loads((workdir / "model.json").read_text())
    assert doc["version"].startswith("qpdyn-model/")
    assert (workdir / "model.npz").exists()


def test_frequencies_from_model(workdir, capsys):
    out = workdir / "freqs.json"
    rc = main(["frequencies", "--model", str(workdir / "model.json"),
               "--out", str(out), "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == "qpdyn-frequencies/1"
    rows = doc["rows"]
    assert rows[0]["bin"] == 0 and rows[0]["omega"] == 0.0
    bins = [r["bin"] for r in rows]
    assert 13 in bins and 21 in bins
    # period * omega = 2 pi (in samples, dt-scaled)
    for r in rows[1:]:
        assert r["period_time"] * r["omega"] == pytest.approx(2 * np.pi, rel=1e-12)
    saved = json.loads(out.read_text())
    assert saved["rows"] == rows


def test_frequencies_suggest_thresholds(workdir, capsys):
    rc = main(["frequencies", "--model", str(workdir / "model.json"),
               "--suggest-thresholds", "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    sug = doc["suggested"]
    for key in ("L0", "eps1", "eps2"):
        assert sug[key] == sorted(sug[key])


def test_decompose_modes_export(workdir, capsys):
    modes = workdir / "modes.json"
    rc = main(["decompose", "--model", str(workdir / "model.json"),
               "--modes-out", str(modes), "--modes", "2,3", "--json"])
    assert rc == 0
    doc = json.loads(modes.read_text())
    assert doc["schema"] == "qpdyn-modes/1"
    assert [m["index"] for m in doc["modes"]] == [2, 3]
    arr = np.array(doc["modes"][0]["values"])
    assert arr.ndim == 2 and arr.shape[1] == 1


def test_reconstruct_with_reference_scores(workdir, capsys):
    traj = workdir / "traj.csv"
    err = workdir / "err.csv"
    rc = main([
        "reconstruct", "--model", str(workdir / "model.json"),
        "--steps", "300", "--init-index", "0",
        "--traj-out", str(traj),
        "--reference", str(workdir / "series.csv"), "--header",
        "--error-out", str(err), "--error-window", "100", "--json",
    ])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["steps"] == 300
    assert max(doc["error_max"]) < 0.05
    t = load_csv(traj, dt=1.0, header=True)
    assert t.n_samples == 300
    e = load_csv(err, dt=1.0, header=True)
    assert e.n_samples == 300 - 100 + 1


def test_reconstruct_zero_steps(workdir):
    traj = workdir / "empty.csv"
    rc = main(["reconstruct", "--model", str(workdir / "model.json"),
               "--steps", "0", "--traj-out", str(traj)])
    assert rc == 0
    lines = traj.read_text().strip().splitlines()
    assert len(lines) == 1  # header only


def test_eval_command(workdir, capsys):
    rc = main([
        "eval", "--reference", str(workdir / "series.csv"),
        "--reconstruction", str(workdir / "series.csv"),
        "--header", "--error-window", "50", "--json",
    ])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["error_max"] == [0.0]


def test_pure_sine_single_frequency_row(tmp_path, capsys):
    # a clean tone yields the zero row plus exactly one nonzero row once
    # the regularity filter cuts the kernel-harmonic overtones
    spec = {
        "rho": [2 * np.pi * 10 / 1024],
        "gper_coeffs": [{"j": [1], "c": [[1.0, 0.0]]}],
        "chaos": {"family": "none"}, "N": 1024, "k": 1, "seed": 1,
    }
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    assert main(["synth", "--out", str(tmp_path / "sine.csv"),
                 "--spec-json", str(tmp_path / "spec.json")]) == 0
    assert main(["analyze", str(tmp_path / "sine.csv"), "-o",
                 str(tmp_path / "m.json"), "--header", "--epsilon", "auto:20",
                 "--num-eigs", "24", "--eps1", "0.3", "--eps2", "1.0",
                 "--L0", "8"]) == 0
    capsys.readouterr()
    assert main(["frequencies", "--model", str(tmp_path / "m.json"),
                 "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [r["bin"] for r in doc["rows"]] == [0, 10]
    assert doc["d_heuristic"]["d"] == 1


def test_missing_input_is_ingest_error(workdir, capsys):
    rc = main(["analyze", str(workdir / "nope.csv"), "-o", str(workdir / "x.json")])
    assert rc == 1
    assert "ingest" in capsys.readouterr().err


def test_num_eigs_truncation_still_succeeds(tmp_path, capsys):
    series = tmp_path / "s.csv"
    rc = main(["synth", "--out", str(series), "--bins", "5", "--n", "80",
               "--chaos-a", "0.0", "--burn-in", "0"])
    assert rc == 0
    with pytest.warns(RuntimeWarning):
        rc = main([
            "analyze", str(series), "-o", str(tmp_path / "m.json"),
            "--header", "--epsilon", "auto", "--num-eigs", "500",
            "--eps1", "0.01", "--eps2", "10.0", "--L0", "5",
        ])
    assert rc == 0


def test_config_file_and_override(tmp_path, capsys):
    series = tmp_path / "s.csv"
    main(["synth", "--out", str(series), "--bins", "7", "--n", "120",
          "--chaos-a", "0.2", "--burn-in", "32"])
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "delays": 4, "epsilon": "auto", "num_eigs": 30,
        "eps1": 0.5, "eps2": 3.0, "L0": 10, "header": True,
    }))
    m1 = tmp_path / "m1.json"
    rc = main(["analyze", str(series), "-o", str(m1), "--config", str(cfg)])
    assert rc == 0
    doc = json.loads(m1.read_text())
    assert doc["Q"] == 4
    assert doc["meta"]["L"] <= 30
    # explicit flag beats the config
    m2 = tmp_path / "m2.json"
    rc = main(["analyze", str(series), "-o", str(m2),
               "--config", str(cfg), "--delays", "2"])
    assert rc == 0
    assert json.loads(m2.read_text())["Q"] == 2


def test_unknown_config_key(tmp_path, capsys):
    series = tmp_path / "s.csv"
    main(["synth", "--out", str(series), "--bins", "7", "--n", "64",
          "--chaos-a", "0", "--burn-in", "0"])
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus_key": 1}))
    rc = main(["analyze", str(series), "-o", str(tmp_path / "m.json"),
               "--config", str(cfg)])
    assert rc == 1
    assert "bogus_key" in capsys.readouterr().err


def test_cli_round_trip_matches_memory(workdir, tmp_path):
    # analyze -> save -> load -> reconstruct equals the in-memory path
    from qpdyn.pipeline import AnalyzeParams, analyze
    from qpdyn.dynamics import reconstruct
    from qpdyn.model_io import load_model

    ts = load_csv(workdir / "series.csv", dt=1.0, header=True)
    eps = float(repr(_bandwidth_for(workdir / "series.csv", 8)))
    params = AnalyzeParams(Q=8, epsilon=eps, L=120, eps1=1.0, eps2=2.0, L0=30)
    result = analyze(ts, params)
    mem = result.model

    loaded = load_model(workdir / "model.json")
    state, t0 = mem.state_at(0)
    a = reconstruct(mem, initial_state=state, t0=t0, n_steps=150,
                    state_units="standardized")
    b = reconstruct(loaded, initial_state=state, t0=t0, n_steps=150,
                    state_units="standardized")
    assert np.array_equal(a.trajectory, b.trajectory)
