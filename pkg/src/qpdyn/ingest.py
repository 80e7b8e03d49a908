"""Loading, standardization and delay embedding of raw observation data."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class IngestError(ValueError):
    """Raised for malformed input data."""


@dataclass
class TimeSeries:
    """N samples of a k-channel observable taken every ``dt`` time units.

    ``values`` has shape (N, k); rows are samples in time order.
    """

    values: np.ndarray
    dt: float
    channel_names: Optional[list[str]] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.ndim != 2:
            raise IngestError(f"values must be 2-D, got shape {self.values.shape}")
        n, k = self.values.shape
        if n < 2 or k < 1:
            raise IngestError(f"need at least 2 samples and 1 channel, got {n}x{k}")
        if not self.dt > 0:
            raise IngestError(f"dt must be positive, got {self.dt}")
        if not np.all(np.isfinite(self.values)):
            bad = np.argwhere(~np.isfinite(self.values))[0]
            raise IngestError(
                f"non-finite value at row {bad[0]}, column {bad[1]}"
            )
        if self.channel_names is not None and len(self.channel_names) != k:
            raise IngestError(
                f"{len(self.channel_names)} channel names for {k} channels"
            )

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]


@dataclass
class ChannelStats:
    """Per-channel location/scale recorded by :func:`standardize`.

    ``scale`` is strictly positive; constant channels get scale 1 and are
    flagged so the transform stays invertible.
    """

    mean: np.ndarray
    scale: np.ndarray
    mode: str = "std"
    constant: np.ndarray = field(default=None)  # bool per channel

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.scale = np.asarray(self.scale, dtype=float)
        if self.constant is None:
            self.constant = np.zeros(self.mean.shape, dtype=bool)
        else:
            self.constant = np.asarray(self.constant, dtype=bool)
        if np.any(self.scale <= 0):
            raise IngestError("scale entries must be positive")


@dataclass
class EmbeddedSeries:
    """Delay-coordinate states of a series.

    Row n is the concatenation (y_{n+Q}, y_{n+Q-1}, ..., y_n): the current
    sample first, then successively older samples.  With N source samples
    there are N' = N - Q states of dimension k(Q+1).  ``origin_index`` is
    the source index of the oldest sample in row 0 (0 for a full embed),
    so the leading block of row n is source sample ``origin_index + n + Q``.
    """

    states: np.ndarray
    Q: int
    dt: float
    k: int
    origin_index: int = 0

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2 or self.states.shape[1] != self.k * (self.Q + 1):
            raise IngestError(
                f"states shape {self.states.shape} does not match k(Q+1)="
                f"{self.k * (self.Q + 1)}"
            )
        if self.states.shape[0] < 1:
            raise IngestError("need at least one embedded state")

    @property
    def n_states(self) -> int:
        return self.states.shape[0]

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    def leading_block(self, n: int) -> np.ndarray:
        """Newest k-sample of state n."""
        return self.states[n, : self.k]

    def leading_source_index(self, n: int) -> int:
        """Source-series index of the newest sample of state n."""
        return self.origin_index + n + self.Q

    def leading_time(self, n: int) -> float:
        """Timestamp of the newest sample of state n."""
        return self.leading_source_index(n) * self.dt


def load_csv(path, dt: float, header: bool = False) -> TimeSeries:
    """Load a comma-separated series: one sample per row, k numeric columns.

    Ragged rows, non-numeric fields and empty files raise
    :class:`IngestError` naming the offending data row (1-based, header
    excluded).
    """
    rows: list[list[float]] = []
    names: Optional[list[str]] = None
    width: Optional[int] = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, raw in enumerate(reader):
            if not raw or (len(raw) == 1 and raw[0].strip() == ""):
                continue  # blank line
            if header and names is None:
                names = [c.strip() for c in raw]
                continue
            rowno = len(rows) + 1
            if width is None:
                width = len(raw)
            elif len(raw) != width:
                raise IngestError(
                    f"row {rowno}: expected {width} fields, got {len(raw)}"
                )
            try:
                rows.append([float(c) for c in raw])
            except ValueError:
                bad = next(c for c in raw if not _is_float(c))
                raise IngestError(f"row {rowno}: non-numeric field {bad!r}") from None
    if not rows:
        raise IngestError(f"{path}: no data rows")
    values = np.array(rows, dtype=float)
    if names is not None and len(names) != values.shape[1]:
        raise IngestError(
            f"header has {len(names)} fields but rows have {values.shape[1]}"
        )
    return TimeSeries(values=values, dt=dt, channel_names=names)


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_csv(path, ts: TimeSeries, header: bool = True) -> None:
    """Write a series with full float round-trip precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            names = ts.channel_names or [f"ch{i}" for i in range(ts.n_channels)]
            writer.writerow(names)
        for row in ts.values:
            writer.writerow([repr(float(v)) for v in row])


def standardize(ts: TimeSeries, mode: str = "std") -> tuple[TimeSeries, ChannelStats]:
    """Shift each channel to mean 0 and rescale it to unit size.

    ``mode="std"`` divides by the sample standard deviation (ddof=1),
    ``mode="sup"`` by the centered sup-norm.  Constant channels map to zero
    with scale 1 and a flag, so the stats always invert exactly.
    """
    if mode not in ("std", "sup"):
        raise IngestError(f"unknown standardization mode {mode!r}")
    vals = ts.values
    mean = vals.mean(axis=0)
    centered = vals - mean
    if mode == "std":
        scale = centered.std(axis=0, ddof=1)
    else:
        scale = np.abs(centered).max(axis=0)
    constant = scale <= 0
    scale = np.where(constant, 1.0, scale)
    stats = ChannelStats(mean=mean, scale=scale, mode=mode, constant=constant)
    out = TimeSeries(values=centered / scale, dt=ts.dt, channel_names=ts.channel_names)
    return out, stats


def unstandardize(values: np.ndarray, stats: ChannelStats) -> np.ndarray:
    """Invert :func:`standardize` on an (n, k) array or a length-k vector."""
    return np.asarray(values) * stats.scale + stats.mean


def delay_embed(ts: TimeSeries, Q: int) -> EmbeddedSeries:
    """Stack each sample with its Q predecessors into one state vector.

    State n is (y_{n+Q}, y_{n+Q-1}, ..., y_n); there are N - Q of them.
    """
    if Q < 0:
        raise IngestError(f"number of delays must be nonnegative, got {Q}")
    n, k = ts.values.shape
    if Q >= n:
        raise IngestError(f"need Q < N, got Q={Q} with N={n}")
    n_states = n - Q
    # column block q holds the samples q steps back
    blocks = [ts.values[Q - q : Q - q + n_states] for q in range(Q + 1)]
    states = np.hstack(blocks)
    return EmbeddedSeries(states=states, Q=Q, dt=ts.dt, k=k, origin_index=0)


def embed_state(history: Sequence[np.ndarray]) -> np.ndarray:
    """Build one delay state from samples ordered newest first."""
    return np.concatenate([np.asarray(h, dtype=float).ravel() for h in history])
