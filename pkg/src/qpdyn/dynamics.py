"""Iterate the reconstructed model and score reconstructions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ingest import ChannelStats, EmbeddedSeries, TimeSeries
from .harmonic import ChaoticCoefficients, HarmonicModel, eval_gper
from .oos import EvaluatorTable, OutOfSupportError, eval_gchaos0


class DynamicsError(RuntimeError):
    pass


@dataclass
class DecompositionModel:
    """Everything needed to run the reconstructed dynamics.

    The harmonic and chaotic parts operate in standardized units; the
    channel stats convert to and from original units at the boundary.
    """

    harmonic: HarmonicModel
    chaotic: ChaoticCoefficients
    evaluator: EvaluatorTable
    emb_train: EmbeddedSeries
    lambdas: np.ndarray
    q: np.ndarray
    epsilon: float
    Q: int
    dt: float
    channel_stats: ChannelStats
    thresholds: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    # singular-vector matrices kept for persistence and diagnostics
    phis: Optional[np.ndarray] = None
    gammas: Optional[np.ndarray] = None

    def __post_init__(self):
        k = self.emb_train.k
        dim = self.emb_train.state_dim
        if self.harmonic.k != k or self.chaotic.k != k:
            raise ValueError("coefficient matrices disagree on channel count")
        if dim != k * (self.Q + 1):
            raise ValueError("embedding dimension does not match k(Q+1)")
        if self.evaluator.n != self.emb_train.n_states:
            raise ValueError("evaluator rows do not match training states")

    @property
    def k(self) -> int:
        return self.emb_train.k

    def standardize_state(self, state_orig: np.ndarray) -> np.ndarray:
        """Original-unit delay state -> standardized units, blockwise."""
        blocks = np.asarray(state_orig, dtype=float).reshape(self.Q + 1, self.k)
        return ((blocks - self.channel_stats.mean) / self.channel_stats.scale).ravel()

    def default_initial_state(self) -> tuple[np.ndarray, float]:
        """Last training delay-state (standardized) and its timestamp."""
        n = self.emb_train.n_states - 1
        return self.emb_train.states[n].copy(), self.emb_train.leading_time(n)

    def state_at(self, index: int) -> tuple[np.ndarray, float]:
        """Training delay-state ``index`` (standardized) and its timestamp."""
        return (
            self.emb_train.states[index].copy(),
            self.emb_train.leading_time(index),
        )


@dataclass
class ReconstructionRun:
    """Rollout output in original units, one row per emitted sample.

    The sample in row n carries timestamp t0 + (n+1) dt.  When the chaotic
    term was skipped for lack of kernel support, ``support_fallbacks``
    counts those steps.
    """

    trajectory: np.ndarray
    t0: float
    dt: float
    support_fallbacks: int = 0
    state_log: Optional[np.ndarray] = None


def reconstruct(
    model: DecompositionModel,
    initial_state: Optional[np.ndarray] = None,
    t0: Optional[float] = None,
    n_steps: int = 0,
    policy: str = "freeze",
    keep_states: bool = False,
    state_units: str = "original",
) -> ReconstructionRun:
    """Iterate the model ``n_steps`` times from a delay state.

    Each step evaluates the periodic part at the current time, the chaotic
    part at the current state, sums them into a new leading block, and
    shifts the older blocks down one slot.  ``policy`` decides what happens
    when the state drifts out of kernel support: "freeze" contributes zero
    chaotic term that step (counted), "abort" raises.

    ``initial_state`` defaults to the last training state; explicit states
    are in original units unless ``state_units="standardized"``.  ``t0``
    defaults to the timestamp of the initial state so the periodic phase
    lines up with training.
    """
    if policy not in ("freeze", "abort"):
        raise DynamicsError(f"unknown out-of-support policy {policy!r}")
    if n_steps < 0:
        raise DynamicsError(f"n_steps must be nonnegative, got {n_steps}")
    if initial_state is None:
        state, t_state = model.default_initial_state()
    else:
        state = np.asarray(initial_state, dtype=float).ravel()
        if state.size != model.emb_train.state_dim:
            raise DynamicsError(
                f"initial state has dim {state.size}, expected "
                f"{model.emb_train.state_dim}"
            )
        if state_units == "original":
            state = model.standardize_state(state)
        elif state_units != "standardized":
            raise DynamicsError(f"unknown state_units {state_units!r}")
        t_state = 0.0
    if t0 is None:
        t0 = t_state
    k = model.k
    trajectory = np.empty((n_steps, k))
    states = np.empty((n_steps, state.size)) if keep_states else None
    fallbacks = 0
    for step in range(n_steps):
        t = t0 + step * model.dt
        per = eval_gper(model.harmonic, t)
        try:
            chaos = eval_gchaos0(
                model.evaluator, model.emb_train, model.epsilon, state
            )
        except OutOfSupportError:
            if policy == "abort":
                raise DynamicsError(
                    f"state out of kernel support at step {step}"
                ) from None
            chaos = np.zeros(k)
            fallbacks += 1
        new_block = per + chaos
        if not np.all(np.isfinite(new_block)):
            raise DynamicsError(f"non-finite state at step {step}")
        state = np.concatenate([new_block, state[:-k]]) if model.Q > 0 else new_block
        if keep_states:
            states[step] = state
        trajectory[step] = new_block * model.channel_stats.scale + model.channel_stats.mean
    return ReconstructionRun(
        trajectory=trajectory,
        t0=t0,
        dt=model.dt,
        support_fallbacks=fallbacks,
        state_log=states,
    )


def anma_error(
    reference: TimeSeries,
    reconstruction: TimeSeries,
    T: int,
    mode: str = "absolute",
) -> np.ndarray:
    """Amplitude-normalized moving-averaged error, shape (N - T + 1, k).

    e[n, c] = (1/sup_c) (1/T) sum_{t<T} f(yhat[n+t, c] - y[n+t, c]) with
    sup_c the per-channel sup-norm of the reference and f the identity
    ("signed") or absolute value ("absolute", default for reporting).
    """
    if mode not in ("signed", "absolute"):
        raise DynamicsError(f"unknown error mode {mode!r}")
    y = reference.values
    yhat = reconstruction.values
    if y.shape != yhat.shape:
        raise DynamicsError(
            f"shape mismatch: reference {y.shape}, reconstruction {yhat.shape}"
        )
    n = y.shape[0]
    if not 1 <= T <= n:
        raise DynamicsError(f"window must satisfy 1 <= T <= N={n}, got {T}")
    sup = np.abs(y).max(axis=0)
    if np.any(sup == 0):
        ch = int(np.argmax(sup == 0))
        raise DynamicsError(f"channel {ch} has zero sup-norm; cannot normalize")
    diff = yhat - y
    if mode == "absolute":
        diff = np.abs(diff)
    csum = np.cumsum(diff, axis=0)
    csum = np.vstack([np.zeros((1, y.shape[1])), csum])
    window_sums = csum[T:] - csum[:-T]
    return window_sums / T / sup
