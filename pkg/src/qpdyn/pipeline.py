"""End-to-end model building: embed, kernel basis, frequencies, split, evaluator.

The training pairing is one step ahead: the delay state whose newest
sample sits at time t is matched with the sample at t + dt, and the
periodic design is evaluated at t.  One shift of the rollout state then
equals one step through the training set.  The last embedded state has no
successor sample, so the harmonic/chaotic fit uses the first N' - 1 basis
rows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .ingest import ChannelStats, TimeSeries, delay_embed, standardize
from .kernel import (
    KernelBasis,
    bistochastic_normalize,
    gaussian_kernel_matrix,
    kernel_eigenbasis,
    median_squared_distance,
)
from .spectral import ScoreMatrix, frequency_scores, select_frequencies
from .harmonic import build_fourier_matrix, chaotic_coefficients, fit_periodic
from .oos import build_evaluator
from .dynamics import DecompositionModel


class StageError(RuntimeError):
    """Pipeline failure labeled with the stage it came from."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


@dataclass
class AnalyzeParams:
    """Knobs of the analysis pipeline.

    ``epsilon`` may be a number, "auto" (1/50 of the median pairwise
    squared distance of the embedded states; small enough that the kernel
    spectrum decays slowly and hundreds of eigenpairs stay usable) or None
    (0.01 * number of channels, the standardized-data rule of thumb).
    """

    Q: int = 0
    epsilon: Union[float, str, None] = None
    tau: float = 0.0
    storage: str = "dense"
    L: int = 100
    eps1: float = 0.1
    eps2: float = 3.0
    L0: int = 20
    drop_bin1: bool = False
    standardize: bool = True
    std_mode: str = "std"
    evaluator_mode: str = "consistent"
    dft_norm: str = "empirical"
    seed: Optional[int] = None
    extra_meta: dict = field(default_factory=dict)


@dataclass
class AnalyzeResult:
    """Model plus the diagnostics that are cheap to keep around."""

    model: DecompositionModel
    basis: KernelBasis
    scores: ScoreMatrix
    y_non: np.ndarray


def _stage(name: str):
    def deco(fn):
        def wrapped(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, exc) from exc

        return wrapped

    return deco


def resolve_epsilon(params: AnalyzeParams, states: np.ndarray, k: int) -> float:
    if params.epsilon is None:
        return 0.01 * k
    if isinstance(params.epsilon, str):
        if params.epsilon == "auto":
            return median_squared_distance(states) / 50.0
        if params.epsilon.startswith("auto:"):
            divisor = float(params.epsilon.split(":", 1)[1])
            if divisor <= 0:
                raise ValueError("auto divisor must be positive")
            return median_squared_distance(states) / divisor
        raise ValueError(f"unknown epsilon spec {params.epsilon!r}")
    eps = float(params.epsilon)
    if eps <= 0:
        raise ValueError(f"epsilon must be positive, got {eps}")
    return eps


def analyze(ts: TimeSeries, params: AnalyzeParams) -> AnalyzeResult:
    """Run the full pipeline on a series and assemble the model."""
    run_ingest = _stage("ingest")(_ingest)
    run_kernel = _stage("kernel")(_kernel)
    run_spectral = _stage("spectral")(_spectral)
    run_harmonic = _stage("harmonic")(_harmonic)
    run_oos = _stage("oos")(_oos)

    ts_std, stats, emb = run_ingest(ts, params)
    basis, eps = run_kernel(emb, params)
    scores, freqs = run_spectral(basis, params, ts.dt)
    harmonic, chaotic, y_non = run_harmonic(ts_std, emb, basis, freqs, params)
    evaluator = run_oos(basis, chaotic, params)

    model = DecompositionModel(
        harmonic=harmonic,
        chaotic=chaotic,
        evaluator=evaluator,
        emb_train=emb,
        lambdas=basis.lambdas,
        q=basis.q,
        epsilon=eps,
        Q=params.Q,
        dt=ts.dt,
        channel_stats=stats,
        thresholds={"eps1": params.eps1, "eps2": params.eps2, "L0": params.L0},
        meta={
            "n_samples": ts.n_samples,
            "n_states": emb.n_states,
            "n_fit": emb.n_states - 1,
            "L": basis.L,
            "tau": params.tau,
            "storage": params.storage,
            "evaluator_mode": params.evaluator_mode,
            "dft_norm": params.dft_norm,
            "standardize": params.standardize,
            "std_mode": params.std_mode,
            "drop_bin1": params.drop_bin1,
            "seed": params.seed,
            **params.extra_meta,
        },
        phis=basis.phis,
        gammas=basis.gammas,
    )
    return AnalyzeResult(model=model, basis=basis, scores=scores, y_non=y_non)


def _ingest(ts: TimeSeries, params: AnalyzeParams):
    if params.standardize:
        ts_std, stats = standardize(ts, mode=params.std_mode)
    else:
        k = ts.n_channels
        ts_std = ts
        stats = ChannelStats(
            mean=np.zeros(k), scale=np.ones(k), mode="none",
            constant=np.zeros(k, dtype=bool),
        )
    emb = delay_embed(ts_std, params.Q)
    if emb.n_states < 3:
        raise ValueError(
            f"only {emb.n_states} delay states; need at least 3 to fit"
        )
    return ts_std, stats, emb


def _kernel(emb, params: AnalyzeParams):
    eps = resolve_epsilon(params, emb.states, emb.k)
    km = gaussian_kernel_matrix(
        emb, epsilon=eps, tau=params.tau, storage=params.storage
    )
    nk = bistochastic_normalize(km)
    L = min(params.L, nk.n)
    if L < params.L:
        warnings.warn(
            f"requested {params.L} eigenpairs but only {nk.n} states; "
            f"truncating to {L}",
            RuntimeWarning,
        )
    basis = kernel_eigenbasis(nk, L)
    return basis, eps


def _spectral(basis, params: AnalyzeParams, dt: float):
    scores = frequency_scores(basis, dft_norm=params.dft_norm)
    L0 = min(params.L0, basis.L - 1)
    freqs = select_frequencies(
        scores,
        eps1=params.eps1,
        eps2=params.eps2,
        L0=L0,
        dt=dt,
        drop_bin1=params.drop_bin1,
    )
    return scores, freqs


def _harmonic(ts_std: TimeSeries, emb, basis, freqs, params: AnalyzeParams):
    n_fit = emb.n_states - 1
    # state m (newest sample at (m+Q) dt) pairs with sample m+Q+1
    times = (np.arange(n_fit) + params.Q) * ts_std.dt
    targets = ts_std.values[params.Q + 1 :]
    F = build_fourier_matrix(freqs, times)
    harmonic = fit_periodic(targets, F, freqs)
    chaotic, y_non = chaotic_coefficients(targets, harmonic, basis, F)
    return harmonic, chaotic, y_non


def _oos(basis, chaotic, params: AnalyzeParams):
    return build_evaluator(basis, chaotic, mode=params.evaluator_mode)
