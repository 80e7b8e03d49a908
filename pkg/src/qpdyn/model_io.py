"""Model persistence: small metadata as JSON, large matrices in a sidecar.

The sidecar is a .npz next to the JSON file (exact float64 round trip) or,
in portable mode, a directory of CSV files written with full repr
precision, which also round-trips float64 bitwise.  The evaluator table is
rebuilt on load from the persisted vectors with the same arithmetic used
at build time, so a loaded model reproduces the in-memory one bit for bit.
"""

from __future__ import annotations

import csv
import datetime
import json
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from .dynamics import DecompositionModel
from .harmonic import ChaoticCoefficients, HarmonicModel
from .ingest import ChannelStats, EmbeddedSeries
from .oos import build_evaluator
from .spectral import FrequencySet

FORMAT_VERSION = "qpdyn-model/1"

_SIDECAR_ARRAYS = ("emb_states", "gammas", "lambdas", "q", "E", "phis")


class ModelIOError(RuntimeError):
    pass


def _complex_to_pairs(a: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def _pairs_to_complex(pairs) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in pairs])


def save_model(model: DecompositionModel, path, portable: bool = False) -> None:
    """Write ``path`` (JSON) plus a sidecar for the big matrices."""
    path = Path(path)
    if model.phis is None or model.gammas is None:
        raise ModelIOError("model carries no singular-vector matrices; cannot persist")
    arrays = {
        "emb_states": model.emb_train.states,
        "gammas": model.gammas,
        "lambdas": model.lambdas,
        "q": model.q,
        "E": model.chaotic.E,
        "phis": model.phis,
    }
    if portable:
        sidecar = path.with_suffix(".csvdata")
        sidecar.mkdir(exist_ok=True)
        for name, arr in arrays.items():
            _write_array_csv(sidecar / f"{name}.csv", np.atleast_2d(arr))
        sidecar_ref = {"format": "csv-dir", "name": sidecar.name}
    else:
        sidecar = path.with_suffix(".npz")
        np.savez(sidecar, **arrays)
        sidecar_ref = {"format": "npz", "name": sidecar.name}
    freqs = model.harmonic.freqs
    doc = {
        "version": FORMAT_VERSION,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "dt": model.dt,
        "k": model.k,
        "Q": model.Q,
        "epsilon": model.epsilon,
        "thresholds": model.thresholds,
        "meta": model.meta,
        "channel_stats": {
            "mean": model.channel_stats.mean.tolist(),
            "scale": model.channel_stats.scale.tolist(),
            "mode": model.channel_stats.mode,
            "constant": model.channel_stats.constant.tolist(),
        },
        "frequencies": {
            "omegas": freqs.omegas.tolist(),
            "bins": freqs.bins.tolist(),
            "dt": freqs.dt,
            "n_bins": freqs.n_bins,
            "params": freqs.params,
        },
        "A": _complex_to_pairs(model.harmonic.A),
        "residual_norm": model.harmonic.residual_norm.tolist(),
        "evaluator_mode": model.evaluator.mode,
        "emb_origin_index": model.emb_train.origin_index,
        "sidecar": sidecar_ref,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def _write_array_csv(path, arr: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in arr:
            writer.writerow([repr(float(v)) for v in row])


def _read_array_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        return np.array([[float(c) for c in row] for row in csv.reader(fh) if row])


def load_model(path) -> DecompositionModel:
    """Load a model written by :func:`save_model`."""
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ModelIOError(f"model file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ModelIOError(f"model file is not valid JSON: {exc}") from None
    if doc.get("version") != FORMAT_VERSION:
        raise ModelIOError(
            f"unsupported model version {doc.get('version')!r}; "
            f"this build reads {FORMAT_VERSION}"
        )
    ref = doc["sidecar"]
    sidecar = path.parent / ref["name"]
    if ref["format"] == "npz":
        with np.load(sidecar) as data:
            arrays = {name: data[name] for name in _SIDECAR_ARRAYS}
    elif ref["format"] == "csv-dir":
        arrays = {
            name: _read_array_csv(sidecar / f"{name}.csv")
            for name in _SIDECAR_ARRAYS
        }
        arrays["lambdas"] = arrays["lambdas"].ravel()
        arrays["q"] = arrays["q"].ravel()
    else:
        raise ModelIOError(f"unknown sidecar format {ref['format']!r}")

    stats_doc = doc["channel_stats"]
    stats = ChannelStats(
        mean=np.array(stats_doc["mean"]),
        scale=np.array(stats_doc["scale"]),
        mode=stats_doc["mode"],
        constant=np.array(stats_doc["constant"], dtype=bool),
    )
    f_doc = doc["frequencies"]
    freqs = FrequencySet(
        omegas=np.array(f_doc["omegas"]),
        bins=np.array(f_doc["bins"], dtype=int),
        dt=f_doc["dt"],
        n_bins=f_doc["n_bins"],
        params=f_doc["params"],
    )
    harmonic = HarmonicModel(
        A=_pairs_to_complex(doc["A"]),
        freqs=freqs,
        residual_norm=np.array(doc["residual_norm"]),
    )
    chaotic = ChaoticCoefficients(E=arrays["E"])
    emb = EmbeddedSeries(
        states=arrays["emb_states"],
        Q=doc["Q"],
        dt=doc["dt"],
        k=doc["k"],
        origin_index=doc.get("emb_origin_index", 0),
    )

    basis_view = SimpleNamespace(
        lambdas=arrays["lambdas"],
        gammas=arrays["gammas"],
        q=arrays["q"],
        L=arrays["gammas"].shape[1],
    )
    evaluator = build_evaluator(basis_view, chaotic, mode=doc["evaluator_mode"])
    return DecompositionModel(
        harmonic=harmonic,
        chaotic=chaotic,
        evaluator=evaluator,
        emb_train=emb,
        lambdas=arrays["lambdas"],
        q=arrays["q"],
        epsilon=doc["epsilon"],
        Q=doc["Q"],
        dt=doc["dt"],
        channel_stats=stats,
        thresholds=doc["thresholds"],
        meta=doc["meta"],
        phis=arrays["phis"],
        gammas=arrays["gammas"],
    )
