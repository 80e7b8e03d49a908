import json

import numpy as np
import pytest

from qpdyn.dynamics import reconstruct
from qpdyn.model_io import ModelIOError, load_model, save_model


def _roundtrip_equal(model, loaded):
    assert np.array_equal(model.emb_train.states, loaded.emb_train.states)
    assert np.array_equal(model.gammas, loaded.gammas)
    assert np.array_equal(model.phis, loaded.phis)
    assert np.array_equal(model.lambdas, loaded.lambdas)
    assert np.array_equal(model.q, loaded.q)
    assert np.array_equal(model.chaotic.E, loaded.chaotic.E)
    assert np.array_equal(model.harmonic.A, loaded.harmonic.A)
    assert np.array_equal(
        model.harmonic.freqs.omegas, loaded.harmonic.freqs.omegas
    )
    assert np.array_equal(
        model.evaluator.gamma_tilde, loaded.evaluator.gamma_tilde
    )
    assert np.array_equal(model.evaluator.products, loaded.evaluator.products)
    assert model.epsilon == loaded.epsilon
    assert model.dt == loaded.dt
    assert model.Q == loaded.Q
    assert model.evaluator.mode == loaded.evaluator.mode
    assert np.array_equal(model.channel_stats.mean, loaded.channel_stats.mean)
    assert np.array_equal(model.channel_stats.scale, loaded.channel_stats.scale)


def test_npz_round_trip_bitwise(torus_model, tmp_path):
    model = torus_model.model
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    _roundtrip_equal(model, loaded)


def test_portable_round_trip_bitwise(torus_model, tmp_path):
    model = torus_model.model
    path = tmp_path / "model.json"
    save_model(model, path, portable=True)
    assert (tmp_path / "model.csvdata" / "gammas.csv").exists()
    loaded = load_model(path)
    _roundtrip_equal(model, loaded)


def test_loaded_model_reconstructs_bitwise(torus_model, tmp_path):
    model = torus_model.model
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    state, t0 = model.state_at(0)
    a = reconstruct(model, initial_state=state, t0=t0, n_steps=100,
                    state_units="standardized")
    b = reconstruct(loaded, initial_state=state, t0=t0, n_steps=100,
                    state_units="standardized")
    assert np.array_equal(a.trajectory, b.trajectory)


def test_version_check(torus_model, tmp_path):
    path = tmp_path / "model.json"
    save_model(torus_model.model, path)
    doc = json.loads(path.read_text())
    doc["version"] = "qpdyn-model/999"
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelIOError, match="version"):
        load_model(path)


def test_missing_file():
    with pytest.raises(ModelIOError, match="not found"):
        load_model("/nonexistent/model.json")


def test_mode_tag_round_trip(torus_model, tmp_path):
    model = torus_model.model
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.evaluator.mode == model.evaluator.mode
    assert loaded.meta == model.meta
    assert loaded.thresholds == model.thresholds
