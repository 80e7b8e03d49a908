"""Command-line pipeline: analyze, frequencies, decompose, reconstruct, synth, eval.

Any long flag can also be supplied through a JSON config file
(``--config``); explicit command-line values win over the config, which
wins over built-in defaults.  Machine-readable output goes to files or the
``--json`` stream; human summaries go to stdout.  Subcommands exit 0 on
success and 1 on a stage-labeled error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .ingest import TimeSeries, load_csv, write_csv
from .spectral import (
    ScoreMatrix,
    frequency_scores,
    generator_heuristic,
    select_frequencies,
    suggest_thresholds,
)
from .harmonic import eval_gper
from .dynamics import anma_error, reconstruct
from .model_io import load_model, save_model
from .pipeline import AnalyzeParams, StageError, analyze
from .synth import SynthSpec, generate, on_grid_rho

FREQ_SCHEMA = "qpdyn-frequencies/1"
MODES_SCHEMA = "qpdyn-modes/1"

# defaults shared by analyze-style commands; config files override these,
# explicit flags override the config
_DEFAULTS = {
    "dt": 1.0,
    "delays": 0,
    "epsilon": None,
    "prune_tau": 0.0,
    "sparse": False,
    "num_eigs": 100,
    "eps1": 0.1,
    "eps2": 3.0,
    "L0": 20,
    "drop_bin1": False,
    "standardize": True,
    "evaluator_mode": "consistent",
    "seed": None,
    "header": False,
    "json": False,
    "portable": False,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file supplying any long flag")
    p.add_argument("--dt", type=float, default=None, help="sampling interval")
    p.add_argument("--delays", type=int, default=None, help="number of delays Q")
    p.add_argument(
        "--epsilon",
        default=None,
        help="kernel bandwidth: a number, 'auto' (median squared state "
        "distance / 50), or 'auto:D' to divide the median by D; "
        "default 0.01 * channels",
    )
    p.add_argument("--prune-tau", type=float, default=None, help="sparse prune threshold")
    p.add_argument("--sparse", action="store_const", const=True, default=None,
                   help="sparse kernel storage")
    p.add_argument("--dense", dest="sparse", action="store_const", const=False,
                   help="dense kernel storage (default)")
    p.add_argument("--num-eigs", type=int, default=None, help="eigenpairs L")
    p.add_argument("--eps1", type=float, default=None, help="score floor threshold")
    p.add_argument("--eps2", type=float, default=None, help="log-growth cap threshold")
    p.add_argument("--L0", type=int, default=None, help="intermediate column L0")
    p.add_argument("--drop-bin1", action="store_const", const=True, default=None,
                   help="drop the spurious lowest nonzero bin")
    p.add_argument("--no-standardize", dest="standardize", action="store_const",
                   const=False, default=None)
    p.add_argument("--evaluator-mode", choices=["consistent", "paper_exact"],
                   default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--header", action="store_const", const=True, default=None,
                   help="input CSV has a header row")
    p.add_argument("--json", action="store_const", const=True, default=None,
                   help="machine-readable stdout")
    p.add_argument("--portable", action="store_const", const=True, default=None,
                   help="CSV sidecar instead of binary")


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
        unknown = set(cfg) - set(_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key, default in _DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, cfg.get(key, default))
    return args


def _params_from(args: argparse.Namespace) -> AnalyzeParams:
    eps = args.epsilon
    if isinstance(eps, str) and eps != "auto" and not eps.startswith("auto:"):
        eps = float(eps)
    return AnalyzeParams(
        Q=args.delays,
        epsilon=eps,
        tau=args.prune_tau,
        storage="sparse" if args.sparse else "dense",
        L=args.num_eigs,
        eps1=args.eps1,
        eps2=args.eps2,
        L0=args.L0,
        drop_bin1=args.drop_bin1,
        standardize=args.standardize,
        evaluator_mode=args.evaluator_mode,
        seed=args.seed,
    )


def _load_input(path, dt: float, header: bool) -> TimeSeries:
    try:
        return load_csv(path, dt=dt, header=header)
    except Exception as exc:
        raise StageError("ingest", exc) from exc


def _freq_rows(freqs) -> list:
    rows = []
    p_samples = freqs.periods_samples()
    p_time = freqs.periods_time()
    for i in range(freqs.m):
        rows.append(
            {
                "bin": int(freqs.bins[i]),
                "omega": float(freqs.omegas[i]),
                "period_samples": None if np.isinf(p_samples[i]) else float(p_samples[i]),
                "period_time": None if np.isinf(p_time[i]) else float(p_time[i]),
            }
        )
    return rows


def _freq_doc(freqs) -> dict:
    return {
        "schema": FREQ_SCHEMA,
        "dt": freqs.dt,
        "params": freqs.params,
        "rows": _freq_rows(freqs),
    }


def _print_freq_table(freqs) -> None:
    print(f"{'bin':>6} {'omega':>14} {'period (samples)':>18} {'period (time)':>16}")
    for row in _freq_rows(freqs):
        ps = "inf" if row["period_samples"] is None else f"{row['period_samples']:.4g}"
        pt = "inf" if row["period_time"] is None else f"{row['period_time']:.4g}"
        print(f"{row['bin']:>6} {row['omega']:>14.6g} {ps:>18} {pt:>16}")


def cmd_analyze(args) -> int:
    ts = _load_input(args.input, dt=args.dt, header=args.header)
    result = analyze(ts, _params_from(args))
    model = result.model
    save_model(model, args.output, portable=args.portable)
    freqs = model.harmonic.freqs
    if args.json:
        print(json.dumps({
            "model": str(args.output),
            "frequencies": _freq_doc(freqs),
            "residual_norm": model.harmonic.residual_norm.tolist(),
            "n_states": model.emb_train.n_states,
            "L": int(model.lambdas.size),
        }))
    else:
        print(f"model written to {args.output}")
        print(f"{model.emb_train.n_states} states, {model.lambdas.size} eigenpairs, "
              f"{freqs.m} frequencies")
        _print_freq_table(freqs)
        print("residual RMS per channel:",
              " ".join(f"{v:.6g}" for v in model.harmonic.residual_norm))
    return 0


def _scores_from_model(model) -> ScoreMatrix:
    if model.phis is None:
        raise ValueError("model carries no eigenvectors; re-run analyze")
    view = argparse.Namespace(phis=model.phis, lambdas=model.lambdas,
                              L=model.phis.shape[1], n=model.phis.shape[0])
    return frequency_scores(view, dft_norm=model.meta.get("dft_norm", "empirical"))


def cmd_frequencies(args) -> int:
    if args.model:
        model = load_model(args.model)
        scores = _scores_from_model(model)
        eps1 = args.eps1 if args.eps1 is not None else model.thresholds["eps1"]
        eps2 = args.eps2 if args.eps2 is not None else model.thresholds["eps2"]
        L0 = args.L0 if args.L0 is not None else model.thresholds["L0"]
        drop1 = args.drop_bin1 if args.drop_bin1 is not None else model.meta.get("drop_bin1", False)
        args = _merge_config(args)
        freqs = select_frequencies(scores, eps1=eps1, eps2=eps2, L0=L0,
                                   dt=model.dt, drop_bin1=drop1)
    else:
        if not args.input:
            raise ValueError("need an input CSV or --model")
        args = _merge_config(args)
        ts = _load_input(args.input, dt=args.dt, header=args.header)
        result = analyze(ts, _params_from(args))
        scores = result.scores
        freqs = result.model.harmonic.freqs
    doc = _freq_doc(freqs)
    doc["d_heuristic"] = generator_heuristic(freqs.bins, freqs.n_bins)
    if args.suggest_thresholds:
        doc["suggested"] = suggest_thresholds(scores)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=1)
    if args.json:
        print(json.dumps(doc))
    else:
        _print_freq_table(freqs)
        dh = doc["d_heuristic"]
        print(f"quasiperiodicity dimension (heuristic): {dh['d']} "
              f"with generators {dh['generators']}")
        if args.suggest_thresholds:
            s = doc["suggested"]
            print(f"candidate L0: {s['L0']}")
            print(f"candidate eps1 (at L0={s['L0_used']}): "
                  + " ".join(f"{v:.4g}" for v in s["eps1"]))
            print(f"candidate eps2: " + " ".join(f"{v:.4g}" for v in s["eps2"]))
    return 0


def cmd_decompose(args) -> int:
    model = load_model(args.model)
    freqs = model.harmonic.freqs
    out = {
        "residual_norm": model.harmonic.residual_norm.tolist(),
        "m": freqs.m,
    }
    if args.modes_out:
        indices = [int(s) for s in args.modes.split(",")] if args.modes else [2, 3, 4]
        if model.phis is None:
            raise ValueError("model carries no eigenvectors; re-run analyze")
        bad = [l for l in indices if not 1 <= l <= model.phis.shape[1]]
        if bad:
            raise ValueError(f"mode indices out of range: {bad}")
        modes = []
        for l in indices:
            contrib = np.outer(model.phis[:, l - 1], model.chaotic.E[l - 1])
            modes.append({
                "index": l,
                "lambda": float(model.lambdas[l - 1]),
                "values": contrib.tolist(),
            })
        with open(args.modes_out, "w") as fh:
            json.dump({"schema": MODES_SCHEMA, "dt": model.dt, "modes": modes}, fh)
        out["modes_out"] = str(args.modes_out)
    if args.json:
        print(json.dumps(out))
    else:
        print("residual RMS per channel:",
              " ".join(f"{v:.6g}" for v in model.harmonic.residual_norm))
        if args.modes_out:
            print(f"eigenmode contributions written to {args.modes_out}")
    return 0


def cmd_reconstruct(args) -> int:
    model = load_model(args.model)
    if args.steps < 0:
        raise ValueError("--steps must be nonnegative")
    init_index = args.init_index
    if init_index is None:
        init_index = model.emb_train.n_states - 1
    if not 0 <= init_index < model.emb_train.n_states:
        raise ValueError(
            f"--init-index must lie in [0, {model.emb_train.n_states - 1}]"
        )
    state, t0 = model.state_at(init_index)
    run = reconstruct(
        model,
        initial_state=state,
        t0=t0,
        n_steps=args.steps,
        policy=args.policy,
        state_units="standardized",
    )
    names = [f"ch{i}" for i in range(model.k)]
    traj = TimeSeries(values=run.trajectory, dt=model.dt, channel_names=names) \
        if args.steps >= 2 else None
    if traj is not None:
        write_csv(args.traj_out, traj)
    else:
        # degenerate 0/1-step runs still produce a file
        with open(args.traj_out, "w") as fh:
            fh.write(",".join(names) + "\n")
            for row in run.trajectory:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    summary = {
        "trajectory": str(args.traj_out),
        "steps": args.steps,
        "t0": run.t0,
        "support_fallbacks": run.support_fallbacks,
        "init_index": init_index,
    }
    if args.reference:
        ref = load_csv(args.reference, dt=model.dt, header=args.header or False)
        offset = model.emb_train.leading_source_index(init_index) + 1
        if ref.n_samples < offset + args.steps:
            raise ValueError(
                f"reference has {ref.n_samples} rows; rollout needs "
                f"{offset + args.steps} (offset {offset} + steps)"
            )
        ref_window = TimeSeries(values=ref.values[offset : offset + args.steps],
                                dt=model.dt)
        err = anma_error(ref_window,
                         TimeSeries(values=run.trajectory, dt=model.dt),
                         T=args.error_window, mode=args.error_mode)
        if args.error_out:
            with open(args.error_out, "w", newline="") as fh:
                fh.write(",".join(names) + "\n")
                for row in err:
                    fh.write(",".join(repr(float(v)) for v in row) + "\n")
            summary["error"] = str(args.error_out)
        summary["error_max"] = [float(v) for v in np.abs(err).max(axis=0)]
        summary["error_mean"] = [float(v) for v in np.abs(err).mean(axis=0)]
    if args.json:
        print(json.dumps(summary))
    else:
        print(f"trajectory ({args.steps} steps) written to {args.traj_out}")
        if run.support_fallbacks:
            print(f"chaotic term frozen on {run.support_fallbacks} steps "
                  "(out of kernel support)")
        if "error_max" in summary:
            for c, (mx, mn) in enumerate(zip(summary["error_max"],
                                             summary["error_mean"])):
                print(f"channel {c}: max error {mx:.4%}, mean {mn:.4%}")
    return 0


def cmd_synth(args) -> int:
    if args.spec_json:
        with open(args.spec_json) as fh:
            raw = json.load(fh)
        coeffs = {tuple(e["j"]): [complex(re, im) for re, im in e["c"]]
                  for e in raw.pop("gper_coeffs")}
        spec = SynthSpec(rho=np.array(raw.pop("rho")), gper_coeffs=coeffs, **raw)
    else:
        bins = [int(b) for b in args.bins.split(",")]
        grid = args.grid or args.n
        rho = on_grid_rho(bins, grid)
        d = len(bins)
        coeffs = {}
        # generators plus a few low-order combinations so the lattice shows
        base = [1.0, 0.8, 0.65, 0.5]
        for i in range(d):
            j = tuple(1 if a == i else 0 for a in range(d))
            coeffs[j] = base[i % len(base)]
        if d >= 2:
            coeffs[(1, 1) + (0,) * (d - 2)] = 0.4
            coeffs[(1, -1) + (0,) * (d - 2)] = 0.3 + 0.1j
            coeffs[(2, 0) + (0,) * (d - 2)] = 0.25
        else:
            coeffs[(2,)] = 0.4
            coeffs[(3,)] = 0.2
        chaos = {"family": "none"} if args.chaos_a == 0 else \
            {"family": "tanh", "a": args.chaos_a, "b": args.chaos_b}
        spec = SynthSpec(
            rho=rho, gper_coeffs=coeffs, chaos=chaos, noise_sd=args.noise_sd,
            N=args.n, dt=args.dt or 1.0, k=args.k, seed=args.seed or 0,
            burn_in=args.burn_in,
        )
    ts, truth = generate(spec)
    write_csv(args.out, ts)
    truth_doc = {
        "generator_omegas": truth.generator_omegas.tolist(),
        "rho": truth.rho.tolist(),
        "gper_coeffs": [
            {"j": list(j), "c": [[v.real, v.imag] for v in c]}
            for j, c in spec.gper_coeffs.items()
        ],
        "chaos": spec.chaos,
        "noise_sd": spec.noise_sd,
        "seed": truth.seed,
        "dt": spec.dt,
        "N": spec.N,
        "k": spec.k,
    }
    if args.truth_out:
        with open(args.truth_out, "w") as fh:
            json.dump(truth_doc, fh, indent=1)
    if args.json:
        print(json.dumps({"series": str(args.out),
                          "truth": str(args.truth_out) if args.truth_out else None,
                          "N": spec.N, "k": spec.k}))
    else:
        print(f"series written to {args.out}"
              + (f", ground truth to {args.truth_out}" if args.truth_out else ""))
    return 0


def cmd_eval(args) -> int:
    dt = args.dt or 1.0
    ref = _load_input(args.reference, dt=dt, header=args.header or False)
    rec = _load_input(args.reconstruction, dt=dt, header=args.header or False)
    err = anma_error(ref, rec, T=args.error_window, mode=args.error_mode)
    summary = {
        "error_max": [float(v) for v in np.abs(err).max(axis=0)],
        "error_mean": [float(v) for v in np.abs(err).mean(axis=0)],
        "window": args.error_window,
        "mode": args.error_mode,
    }
    if args.error_out:
        names = ref.channel_names or [f"ch{i}" for i in range(ref.n_channels)]
        with open(args.error_out, "w", newline="") as fh:
            fh.write(",".join(names) + "\n")
            for row in err:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        summary["error"] = str(args.error_out)
    if args.json:
        print(json.dumps(summary))
    else:
        for c, (mx, mn) in enumerate(zip(summary["error_max"], summary["error_mean"])):
            print(f"channel {c}: max error {mx:.4%}, mean {mn:.4%}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpdyn",
        description="Reconstruct quasiperiodically driven dynamics from a time series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="build a model from a CSV series")
    p.add_argument("input", help="input CSV path")
    p.add_argument("-o", "--output", required=True, help="model JSON path")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("frequencies", help="list identified frequencies")
    p.add_argument("input", nargs="?", help="input CSV (or use --model)")
    p.add_argument("--model", help="existing model JSON")
    p.add_argument("--out", help="write the frequency table as JSON")
    p.add_argument("--suggest-thresholds", action="store_true",
                   help="print elbow candidates for L0/eps1/eps2")
    _add_common(p)
    p.set_defaults(func=cmd_frequencies)

    p = sub.add_parser("decompose", help="report the periodic/chaotic split")
    p.add_argument("--model", required=True)
    p.add_argument("--modes-out", help="write eigenmode contributions as JSON")
    p.add_argument("--modes", help="comma-separated 1-based mode indices")
    _add_common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", help="iterate a model forward")
    p.add_argument("--model", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--init-index", type=int, default=None,
                   help="training state to start from (default: last)")
    p.add_argument("--policy", choices=["freeze", "abort"], default="freeze")
    p.add_argument("--traj-out", required=True, help="trajectory CSV path")
    p.add_argument("--reference", help="reference CSV for error scoring")
    p.add_argument("--error-out", help="error CSV path")
    p.add_argument("--error-window", type=int, default=500)
    p.add_argument("--error-mode", choices=["absolute", "signed"], default="absolute")
    _add_common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("synth", help="generate a synthetic driven system")
    p.add_argument("--out", required=True, help="series CSV path")
    p.add_argument("--truth-out", help="ground-truth JSON path")
    p.add_argument("--bins", default="55,89",
                   help="comma-separated on-grid generator bins")
    p.add_argument("--n", type=int, default=4096, help="number of samples")
    p.add_argument("--grid", type=int, default=None,
                   help="DFT grid the bins refer to (default: the sample "
                   "count; set to n minus the delays you will analyze with "
                   "so the generators stay exactly on the analysis grid)")
    p.add_argument("--k", type=int, default=1, help="channels")
    p.add_argument("--chaos-a", type=float, default=0.5)
    p.add_argument("--chaos-b", type=float, default=1.0)
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--burn-in", type=int, default=256)
    p.add_argument("--spec-json", help="full system spec as JSON (overrides flags)")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score a reconstruction against a reference")
    p.add_argument("--reference", required=True)
    p.add_argument("--reconstruction", required=True)
    p.add_argument("--error-window", type=int, default=500)
    p.add_argument("--error-mode", choices=["absolute", "signed"], default="absolute")
    p.add_argument("--error-out")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("analyze", "synth", "eval", "decompose", "reconstruct"):
            args = _merge_config(args)
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - single exit point for the CLI
        stage = getattr(exc, "stage", None)
        label = f"{stage}: " if stage else ""
        print(f"error: {label}{exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
