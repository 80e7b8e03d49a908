"""Identify rotational frequencies from the kernel eigenbasis.

Each eigenvector column is Fourier-transformed in time; candidate DFT bins
are scored by the cumulative, eigenvalue-weighted magnitude across
eigenfunctions and filtered twice: a floor on the score at column L0
(signal strength) and a cap on the log-growth between columns L0 and L
(regularity of the waveform in the kernel space).  Surviving bins are the
reported frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernel import KernelBasis


class SpectralError(ValueError):
    pass


@dataclass
class ScoreMatrix:
    """Cumulative bin scores.

    W[j, l] = sum_{l' <= l} |H[j, l']| with H the column-wise DFT of the
    eigenvector matrix weighted by lambda^(-1/2).  Rows are DFT bins.
    ``dft_norm`` records the DFT normalization ("empirical": coefficients
    with respect to unit-empirical-norm exponentials, i.e. FFT/N').
    """

    W: np.ndarray
    H: np.ndarray
    dft_norm: str = "empirical"

    @property
    def n_bins(self) -> int:
        return self.W.shape[0]

    @property
    def L(self) -> int:
        return self.W.shape[1]


@dataclass
class FrequencySet:
    """Selected angular frequencies, always including 0, sorted ascending.

    omega[j] = 2*pi*bin[j] / (N' * dt); every omega lies in [0, pi/dt].
    """

    omegas: np.ndarray
    bins: np.ndarray
    dt: float
    n_bins: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.omegas = np.asarray(self.omegas, dtype=float)
        self.bins = np.asarray(self.bins, dtype=int)
        if self.omegas[0] != 0.0:
            raise SpectralError("frequency set must start with 0")
        if np.any(np.diff(self.omegas) <= 0):
            raise SpectralError("frequencies must be strictly increasing")

    @property
    def m(self) -> int:
        return len(self.omegas)

    def periods_samples(self) -> np.ndarray:
        """Period in samples per frequency (inf for the zero row)."""
        with np.errstate(divide="ignore"):
            return np.where(self.omegas > 0, 2 * np.pi / (self.omegas * self.dt), np.inf)

    def periods_time(self) -> np.ndarray:
        return self.periods_samples() * self.dt


def frequency_scores(basis: KernelBasis, dft_norm: str = "empirical") -> ScoreMatrix:
    """DFT the eigenvector columns and accumulate weighted magnitudes.

    "empirical" normalization divides the raw FFT by N', so a unit
    empirical-norm cosine column scores ~0.707 at its bin regardless of
    N'; "ortho" divides by sqrt(N').  Thresholds are only comparable
    across data sizes under "empirical".
    """
    if basis.L < 2:
        raise SpectralError("need at least 2 eigenfunctions to score bins")
    n = basis.n
    if dft_norm == "empirical":
        phat = np.fft.fft(basis.phis, axis=0) / n
    elif dft_norm == "ortho":
        phat = np.fft.fft(basis.phis, axis=0, norm="ortho")
    else:
        raise SpectralError(f"unknown dft_norm {dft_norm!r}")
    h = phat / np.sqrt(basis.lambdas)[None, :]
    w = np.cumsum(np.abs(h), axis=1)
    return ScoreMatrix(W=w, H=h, dft_norm=dft_norm)


def select_frequencies(
    scores: ScoreMatrix,
    eps1: float,
    eps2: float,
    L0: int,
    dt: float,
    drop_bin1: bool = False,
) -> FrequencySet:
    """Two-threshold filtering of DFT bins into a frequency set.

    Bins with W[:, L0] < eps1 are dropped (weak), then bins whose score
    grows by more than eps2 in log between columns L0 and L are dropped
    (irregular).  Conjugate twins (j, N'-j) merge to the representative
    j <= N'/2, bin 0 is always included, and bins convert to angular
    frequency via omega = 2*pi*j/(N'*dt).

    ``drop_bin1`` removes bin 1 (the spurious lowest resolvable frequency
    that discrete spectral estimates tend to produce).
    """
    n, L = scores.W.shape
    if not 1 < L0 < L:
        raise SpectralError(f"need 1 < L0 < L={L}, got L0={L0}")
    if eps1 <= 0 or eps2 <= 0:
        raise SpectralError("thresholds must be positive")
    w_l0 = scores.W[:, L0 - 1]
    w_l = scores.W[:, L - 1]
    survivors = w_l0 >= eps1
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = np.log(w_l) - np.log(w_l0)
    survivors &= ~(growth > eps2)
    bins = np.flatnonzero(survivors)
    # fold conjugate twins onto the nonnegative-frequency half
    folded = np.unique(np.minimum(bins, n - bins))
    if drop_bin1:
        folded = folded[folded != 1]
    if folded.size == 0 or folded[0] != 0:
        folded = np.concatenate([[0], folded])
    omegas = 2 * np.pi * folded / (n * dt)
    return FrequencySet(
        omegas=omegas,
        bins=folded,
        dt=dt,
        n_bins=n,
        params={"eps1": eps1, "eps2": eps2, "L0": L0, "drop_bin1": drop_bin1},
    )


def generator_heuristic(
    bins: np.ndarray, n_bins: int, max_coeff: int = 5
) -> dict:
    """Greedy guess at a small generating set for the selected bins.

    Walks the nonzero bins smallest first; a bin not reachable as an
    integer combination (coefficients in [-max_coeff, max_coeff], folded
    onto the half grid) of the current set becomes a new generator.  The
    count is only an upper bound on the true generator dimension, hence
    "heuristic": the coefficient cap can split one generator into two.
    """
    targets = sorted(int(b) for b in np.asarray(bins).ravel() if b != 0)
    gens: list[int] = []
    reachable = {0}

    def expand():
        reachable.clear()
        combos = [0]
        for g in gens:
            combos = [
                c + a * g for c in combos
                for a in range(-max_coeff, max_coeff + 1)
            ]
        for c in combos:
            j = c % n_bins
            reachable.add(min(j, n_bins - j))

    for b in targets:
        if b not in reachable:
            gens.append(b)
            expand()
    return {"d": len(gens), "generators": gens, "max_coeff": max_coeff}


def _elbow_candidates(curve: np.ndarray, top: int = 3) -> list[int]:
    """Indices of the largest discrete-curvature changes of a 1-D curve."""
    if len(curve) < 3:
        return []
    second = np.abs(np.diff(curve, 2))
    order = np.argsort(second)[::-1][:top]
    return sorted(int(i) + 1 for i in order)


def suggest_thresholds(scores: ScoreMatrix, L0: int | None = None) -> dict:
    """Heuristic elbow report for picking L0, eps1 and eps2.

    Returns sorted candidate lists; the choice stays with the user.  L0
    candidates come from elbows of the mean per-column increment, eps1
    candidates from elbows of the sorted score column at L0, eps2
    candidates from elbows of the sorted log-growth curve.
    """
    n, L = scores.W.shape
    mean_increment = np.abs(scores.H).mean(axis=0)
    l0_cands = [c for c in _elbow_candidates(np.log(mean_increment + 1e-300)) if 1 < c < L]
    if not l0_cands:
        l0_cands = [max(2, L // 4)]
    l0 = L0 if L0 is not None else l0_cands[0]
    l0 = min(max(2, l0), L - 1)
    col = np.sort(scores.W[:, l0 - 1])[::-1]
    eps1_cands = sorted(
        float(col[i]) for i in _elbow_candidates(np.log(col + 1e-300))
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = np.log(scores.W[:, L - 1]) - np.log(scores.W[:, l0 - 1])
    growth = np.sort(growth[np.isfinite(growth)])
    eps2_cands = sorted(float(growth[i]) for i in _elbow_candidates(growth))
    return {
        "L0": sorted(l0_cands),
        "eps1": eps1_cands,
        "eps2": eps2_cands,
        "L0_used": l0,
    }
